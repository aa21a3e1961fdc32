//! Command-line surface. Every option is optional here; defaults and config
//! file values are merged in during resolution, with explicit flags winning.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "esqnn",
    version,
    about = "Train hybrid quantum-classical networks with evolution strategies and scan their gradient variance"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an eta x lambda training sweep and write per-cell CSV/SVG reports
    Train(TrainArgs),
    /// Scan the variance of one gradient component across qubit counts and depths
    BpVariance(BpArgs),
    /// Write a deterministic synthetic digit corpus as IDX files
    GenData(GenDataArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Model to train: 1 (all-quantum on pooled 5x3 images) or 2 (linear-quantum-linear on raw pixels)
    #[arg(long)]
    pub model: Option<u8>,
    /// Comma-separated learning rates, e.g. 1e-3,1e-4 [default: 1e-3]
    #[arg(long)]
    pub eta: Option<String>,
    /// ES sample count per gradient: "rule" for floor(4 + 3 ln p), or comma-separated fixed values [default: rule]
    #[arg(long)]
    pub lambda: Option<String>,
    /// Training epochs [default: 30]
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Independently seeded repetitions per cell [default: 1]
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Training set size, split evenly between the two digits [default: 200]
    #[arg(long = "train-n")]
    pub train_n: Option<usize>,
    /// Validation set size, split evenly between the two digits [default: 50]
    #[arg(long = "val-n")]
    pub val_n: Option<usize>,
    /// Mini-batch size [default: 32]
    #[arg(long)]
    pub batch: Option<usize>,
    /// ES search distribution width [default: pi/24]
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Master seed; every random draw in the run derives from it [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory holding IDX image/label files; omit to use the built-in synthetic corpus
    #[arg(long = "data-dir")]
    pub data_dir: Option<PathBuf>,
    /// Output directory for CSV and SVG artifacts [default: out]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// key=value config file supplying any of the above; flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BpArgs {
    /// Comma-separated qubit counts [default: 2,3,4,5,6,7,8]
    #[arg(long)]
    pub qubits: Option<String>,
    /// Comma-separated circuit depths [default: 1,2,4,8]
    #[arg(long)]
    pub layers: Option<String>,
    /// Random parameter draws per (qubits, depth) cell [default: 500]
    #[arg(long)]
    pub samples: Option<usize>,
    /// Gradient estimator: es or psr [default: psr]
    #[arg(long)]
    pub estimator: Option<String>,
    /// ES search distribution width [default: pi/24]
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Master seed; parameter draws depend only on (seed, cell, draw index) [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for CSV and SVG artifacts [default: out]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// key=value config file supplying any of the above; flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    /// Number of images, labels alternating 0 and 1 [default: 3000]
    #[arg(long)]
    pub count: Option<usize>,
    /// Generator seed [default: the built-in corpus seed]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory to write images-idx3-ubyte and labels-idx1-ubyte into [default: data]
    #[arg(long)]
    pub out: Option<PathBuf>,
}
