//! Locating and loading the digit corpus that training samples are drawn
//! from: IDX files in a user-supplied directory, or the built-in synthetic
//! corpus when no directory is given.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use esqnn_core::mnist::{parse_idx_images, parse_idx_labels, Grid};

use crate::synth::{synthetic_corpus, CORPUS_COUNT, CORPUS_SEED};

/// Image/label file stems probed inside a data directory, in order of
/// preference. Each stem is also tried with a `.gz` suffix.
const CANDIDATES: [(&str, &str); 3] = [
    ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
    ("images-idx3-ubyte", "labels-idx1-ubyte"),
];

/// A parsed image pool plus a human-readable note about where it came from.
#[derive(Debug)]
pub struct LoadedPool {
    pub images: Vec<Grid>,
    pub labels: Vec<u8>,
    pub source: String,
}

/// Load from `data_dir` if given, otherwise generate the built-in corpus.
pub fn load_pool(data_dir: Option<&Path>) -> Result<LoadedPool> {
    match data_dir {
        Some(dir) => load_dir(dir),
        None => {
            let (images, labels) = synthetic_corpus(CORPUS_COUNT, CORPUS_SEED);
            Ok(LoadedPool {
                images,
                labels,
                source: format!("built-in synthetic corpus ({CORPUS_COUNT} images)"),
            })
        }
    }
}

fn find(dir: &Path, stem: &str) -> Option<PathBuf> {
    for name in [stem.to_string(), format!("{stem}.gz")] {
        let path = dir.join(name);
        if path.is_file() {
            return Some(path);
        }
    }
    None
}

fn load_dir(dir: &Path) -> Result<LoadedPool> {
    if !dir.is_dir() {
        bail!("data directory {} does not exist", dir.display());
    }
    for (image_stem, label_stem) in CANDIDATES {
        let (Some(image_path), Some(label_path)) = (find(dir, image_stem), find(dir, label_stem))
        else {
            continue;
        };
        let images = parse_idx_images(&read(&image_path)?)
            .with_context(|| format!("parsing {}", image_path.display()))?;
        let labels = parse_idx_labels(&read(&label_path)?)
            .with_context(|| format!("parsing {}", label_path.display()))?;
        return Ok(LoadedPool {
            images,
            labels,
            source: format!("{} + {}", image_path.display(), label_path.display()),
        });
    }
    let stems: Vec<&str> = CANDIDATES.iter().map(|(i, _)| *i).collect();
    bail!(
        "no image/label file pair found in {} (tried {}, each also with .gz)",
        dir.display(),
        stems.join(", ")
    );
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}
