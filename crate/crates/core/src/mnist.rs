//! IDX-format image and label files, binary {0,1} dataset assembly, and the
//! block-average pooling that shrinks images for small quantum registers.
//!
//! The IDX layout is the classic MNIST container: a big-endian 32-bit magic
//! (0x803 for images, 0x801 for labels), big-endian 32-bit dimension sizes,
//! then raw unsigned bytes. Gzip-wrapped files are detected by their 1f 8b
//! prefix and unwrapped transparently. Parsing is strict: any deviation is an
//! error naming the byte offset, and serialize(parse(bytes)) == bytes.

use crate::seed::mix_seed;
use flate2::read::GzDecoder;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::f64::consts::PI;
use std::io::Read;
use thiserror::Error;

pub const IMAGE_SIDE: usize = 28;
pub const IMAGE_PIXELS: usize = IMAGE_SIDE * IMAGE_SIDE;

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;
const SPLIT_TAG: u64 = 0x73706c69;

/// One raw image, row-major.
pub type Grid = [[u8; IMAGE_SIDE]; IMAGE_SIDE];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DataError {
    #[error("bad magic 0x{found:08x} at offset {offset}, expected 0x{expected:08x}")]
    BadMagic { offset: usize, found: u32, expected: u32 },
    #[error("file truncated at offset {offset}: need {needed} more bytes, have {available}")]
    Truncated { offset: usize, needed: usize, available: usize },
    #[error("dimension {found} at offset {offset}, expected {expected}")]
    DimMismatch { offset: usize, found: u32, expected: u32 },
    #[error("{extra} trailing bytes after payload ending at offset {offset}")]
    TrailingBytes { offset: usize, extra: usize },
    #[error("label {value} at offset {offset} outside 0..=9")]
    BadLabel { offset: usize, value: u8 },
    #[error("gzip decode failed: {0}")]
    Gzip(String),
    #[error("need {need} images of digit {label}, only {have} available")]
    InsufficientClass { label: u8, need: usize, have: usize },
    #[error("{which} count {n} must be even for a balanced split")]
    OddSplit { which: &'static str, n: usize },
    #[error("{images} images but {labels} labels")]
    LabelCountMismatch { images: usize, labels: usize },
    #[error("pooling grid must be nonempty, got {rows}x{cols}")]
    EmptyPool { rows: usize, cols: usize },
    #[error("feature vector has {got} values, expected {expected}")]
    FeatureLength { expected: usize, got: usize },
}

/// Feature vector plus its class label and one-hot regression target.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    pub label: u8,
    pub target: [f64; 2],
}

/// Binary {0,1} samples with 784 features scaled to [0,1].
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

fn unwrap_gzip(bytes: &[u8]) -> Result<Option<Vec<u8>>, DataError> {
    if bytes.len() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b {
        let mut out = Vec::new();
        GzDecoder::new(bytes)
            .read_to_end(&mut out)
            .map_err(|e| DataError::Gzip(e.to_string()))?;
        Ok(Some(out))
    } else {
        Ok(None)
    }
}

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32, DataError> {
    let end = offset.checked_add(4).filter(|&e| e <= bytes.len()).ok_or(
        DataError::Truncated {
            offset,
            needed: 4,
            available: bytes.len().saturating_sub(offset),
        },
    )?;
    Ok(u32::from_be_bytes(bytes[offset..end].try_into().unwrap()))
}

fn expect_magic(bytes: &[u8], expected: u32) -> Result<(), DataError> {
    let found = read_u32(bytes, 0)?;
    if found != expected {
        return Err(DataError::BadMagic {
            offset: 0,
            found,
            expected,
        });
    }
    Ok(())
}

fn expect_payload(bytes: &[u8], start: usize, len: usize) -> Result<(), DataError> {
    let available = bytes.len().saturating_sub(start);
    if available < len {
        return Err(DataError::Truncated {
            offset: start,
            needed: len,
            available,
        });
    }
    if available > len {
        return Err(DataError::TrailingBytes {
            offset: start + len,
            extra: available - len,
        });
    }
    Ok(())
}

/// Parse an IDX image file (optionally gzip-wrapped) into 28x28 grids.
pub fn parse_idx_images(bytes: &[u8]) -> Result<Vec<Grid>, DataError> {
    if let Some(inner) = unwrap_gzip(bytes)? {
        return parse_idx_images(&inner);
    }
    expect_magic(bytes, IMAGE_MAGIC)?;
    let count = read_u32(bytes, 4)? as usize;
    for (offset, expected) in [(8, IMAGE_SIDE as u32), (12, IMAGE_SIDE as u32)] {
        let found = read_u32(bytes, offset)?;
        if found != expected {
            return Err(DataError::DimMismatch {
                offset,
                found,
                expected,
            });
        }
    }
    expect_payload(bytes, 16, count * IMAGE_PIXELS)?;
    let grids = bytes[16..]
        .chunks_exact(IMAGE_PIXELS)
        .map(|chunk| {
            let mut grid = [[0u8; IMAGE_SIDE]; IMAGE_SIDE];
            for (row, src) in grid.iter_mut().zip(chunk.chunks_exact(IMAGE_SIDE)) {
                row.copy_from_slice(src);
            }
            grid
        })
        .collect();
    Ok(grids)
}

/// Parse an IDX label file (optionally gzip-wrapped).
pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>, DataError> {
    if let Some(inner) = unwrap_gzip(bytes)? {
        return parse_idx_labels(&inner);
    }
    expect_magic(bytes, LABEL_MAGIC)?;
    let count = read_u32(bytes, 4)? as usize;
    expect_payload(bytes, 8, count)?;
    for (i, &value) in bytes[8..].iter().enumerate() {
        if value > 9 {
            return Err(DataError::BadLabel {
                offset: 8 + i,
                value,
            });
        }
    }
    Ok(bytes[8..].to_vec())
}

pub fn write_idx_images(grids: &[Grid]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + grids.len() * IMAGE_PIXELS);
    out.extend_from_slice(&IMAGE_MAGIC.to_be_bytes());
    out.extend_from_slice(&(grids.len() as u32).to_be_bytes());
    out.extend_from_slice(&(IMAGE_SIDE as u32).to_be_bytes());
    out.extend_from_slice(&(IMAGE_SIDE as u32).to_be_bytes());
    for grid in grids {
        for row in grid {
            out.extend_from_slice(row);
        }
    }
    out
}

pub fn write_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

/// Pixel bytes as features in [0,1].
pub fn image_to_features(grid: &Grid) -> Vec<f64> {
    grid.iter()
        .flatten()
        .map(|&p| p as f64 / 255.0)
        .collect()
}

fn one_hot(label: u8) -> [f64; 2] {
    if label == 0 {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    }
}

/// Filter to digits {0,1} and build disjoint balanced train/validation sets:
/// n_train/2 and n_val/2 images of each digit, selected and ordered by a
/// seed-determined shuffle.
pub fn make_binary_split(
    images: &[Grid],
    labels: &[u8],
    n_train: usize,
    n_val: usize,
    seed: u64,
) -> Result<(Dataset, Dataset), DataError> {
    if images.len() != labels.len() {
        return Err(DataError::LabelCountMismatch {
            images: images.len(),
            labels: labels.len(),
        });
    }
    if n_train % 2 != 0 {
        return Err(DataError::OddSplit { which: "train", n: n_train });
    }
    if n_val % 2 != 0 {
        return Err(DataError::OddSplit { which: "validation", n: n_val });
    }

    let mut rng = ChaCha12Rng::seed_from_u64(mix_seed(seed, &[SPLIT_TAG]));
    let mut pools: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &label) in labels.iter().enumerate() {
        if label <= 1 {
            pools[label as usize].push(i);
        }
    }
    let per_class_train = n_train / 2;
    let per_class_val = n_val / 2;
    for (label, pool) in pools.iter_mut().enumerate() {
        let need = per_class_train + per_class_val;
        if pool.len() < need {
            return Err(DataError::InsufficientClass {
                label: label as u8,
                need,
                have: pool.len(),
            });
        }
        pool.shuffle(&mut rng);
    }

    let collect = |zero_range: std::ops::Range<usize>, rng: &mut ChaCha12Rng| {
        let mut picked: Vec<usize> = pools[0][zero_range.clone()]
            .iter()
            .chain(&pools[1][zero_range])
            .copied()
            .collect();
        picked.shuffle(rng);
        Dataset {
            samples: picked
                .into_iter()
                .map(|i| Sample {
                    x: image_to_features(&images[i]),
                    label: labels[i],
                    target: one_hot(labels[i]),
                })
                .collect(),
        }
    };
    let train = collect(0..per_class_train, &mut rng);
    let val = collect(per_class_train..per_class_train + per_class_val, &mut rng);
    Ok((train, val))
}

/// Block-average a 28x28 feature image down to rows x cols, flattened
/// row-major and scaled to [0, pi]. Non-dividing grids get unequal block
/// edges (boundary k at floor(k * 28 / rows)).
pub fn pool_to_grid(image: &[f64], rows: usize, cols: usize) -> Result<Vec<f64>, DataError> {
    if rows == 0 || cols == 0 {
        return Err(DataError::EmptyPool { rows, cols });
    }
    if image.len() != IMAGE_PIXELS {
        return Err(DataError::FeatureLength {
            expected: IMAGE_PIXELS,
            got: image.len(),
        });
    }
    let edge = |k: usize, blocks: usize| k * IMAGE_SIDE / blocks;
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let (r0, r1) = (edge(r, rows), edge(r + 1, rows));
        for c in 0..cols {
            let (c0, c1) = (edge(c, cols), edge(c + 1, cols));
            let mut sum = 0.0;
            for row in r0..r1 {
                for col in c0..c1 {
                    sum += image[row * IMAGE_SIDE + col];
                }
            }
            out.push(PI * sum / ((r1 - r0) * (c1 - c0)) as f64);
        }
    }
    Ok(out)
}

/// Samples with features replaced by their pooled version.
pub fn pooled_samples(ds: &Dataset, rows: usize, cols: usize) -> Result<Vec<Sample>, DataError> {
    ds.samples
        .iter()
        .map(|s| {
            Ok(Sample {
                x: pool_to_grid(&s.x, rows, cols)?,
                label: s.label,
                target: s.target,
            })
        })
        .collect()
}

/// Threshold rendering for eyeballing a parsed image in test output.
pub fn ascii_render(grid: &Grid) -> String {
    let mut out = String::with_capacity(IMAGE_SIDE * (IMAGE_SIDE + 1));
    for row in grid {
        for &p in row {
            out.push(if p >= 128 { '#' } else { '.' });
        }
        out.push('\n');
    }
    out
}
