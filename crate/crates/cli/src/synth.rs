//! Deterministic synthetic stand-in for the handwritten-digit corpus: rings
//! for the digit 0, near-vertical strokes for the digit 1. The generator is a
//! pure function of (count, seed), so the files it produces are bit-stable
//! across machines and the training pipeline stays reproducible when no real
//! dataset is on disk.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use esqnn_core::mnist::{write_idx_images, write_idx_labels, Grid, IMAGE_SIDE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Seed of the built-in corpus used when no data directory is supplied.
pub const CORPUS_SEED: u64 = 0x64696769;

/// Size of the built-in corpus: enough for the full-scale 2000/200 split.
pub const CORPUS_COUNT: usize = 3000;

/// `count` images with labels alternating 0, 1, 0, 1, ...
pub fn synthetic_corpus(count: usize, seed: u64) -> (Vec<Grid>, Vec<u8>) {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut images = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for i in 0..count {
        let label = (i % 2) as u8;
        let mut grid = if label == 0 {
            draw_zero(&mut rng)
        } else {
            draw_one(&mut rng)
        };
        speckle(&mut grid, &mut rng);
        images.push(grid);
        labels.push(label);
    }
    (images, labels)
}

/// What the `gen-data` command writes.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub count: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
}

/// Write the corpus as an IDX image/label pair the data loader picks up.
pub fn write_corpus(spec: &GenSpec) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(&spec.out_dir)
        .with_context(|| format!("creating {}", spec.out_dir.display()))?;
    let (images, labels) = synthetic_corpus(spec.count, spec.seed);
    let image_path = spec.out_dir.join("images-idx3-ubyte");
    let label_path = spec.out_dir.join("labels-idx1-ubyte");
    write_file(&image_path, &write_idx_images(&images))?;
    write_file(&label_path, &write_idx_labels(&labels))?;
    Ok(vec![image_path, label_path])
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// Elliptical ring with jittered center, radii, and stroke width.
fn draw_zero(rng: &mut ChaCha12Rng) -> Grid {
    let cx = 13.5 + rng.gen_range(-1.5..1.5);
    let cy = 13.5 + rng.gen_range(-1.5..1.5);
    let rx = rng.gen_range(5.5..8.5);
    let ry = rng.gen_range(7.0..10.0);
    let width = rng.gen_range(1.2..2.0);
    let peak = rng.gen_range(200.0..255.0);
    let mean_radius = 0.5 * (rx + ry);
    render(|r, c| {
        let dx = (c - cx) / rx;
        let dy = (r - cy) / ry;
        let d = (dx * dx + dy * dy).sqrt();
        // distance from the ellipse in roughly pixel units
        let radial = (d - 1.0) * mean_radius;
        peak * (-(radial / width) * (radial / width)).exp()
    })
}

/// Slightly sloped vertical stroke.
fn draw_one(rng: &mut ChaCha12Rng) -> Grid {
    let cx = 13.5 + rng.gen_range(-2.5..2.5);
    let slope = rng.gen_range(-0.12..0.12);
    let width = rng.gen_range(1.0..1.9);
    let peak = rng.gen_range(200.0..255.0);
    let top = rng.gen_range(3.0..6.0);
    let bottom = rng.gen_range(22.0..26.0);
    render(|r, c| {
        if r < top || r > bottom {
            return 0.0;
        }
        let dc = c - (cx + slope * (r - 14.0));
        peak * (-(dc / width) * (dc / width)).exp()
    })
}

fn render(intensity: impl Fn(f64, f64) -> f64) -> Grid {
    let mut grid = [[0u8; IMAGE_SIDE]; IMAGE_SIDE];
    for (r, row) in grid.iter_mut().enumerate() {
        for (c, px) in row.iter_mut().enumerate() {
            let v = intensity(r as f64, c as f64);
            // cut faint tails so the background stays blank like scanned digits
            *px = if v < 8.0 { 0 } else { v.min(255.0) as u8 };
        }
    }
    grid
}

/// A few bright specks of sensor noise.
fn speckle(grid: &mut Grid, rng: &mut ChaCha12Rng) {
    let count = rng.gen_range(0..6);
    for _ in 0..count {
        let r = rng.gen_range(0..IMAGE_SIDE);
        let c = rng.gen_range(0..IMAGE_SIDE);
        grid[r][c] = grid[r][c].saturating_add(rng.gen_range(30..90));
    }
}
