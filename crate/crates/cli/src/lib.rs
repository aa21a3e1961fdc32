//! Command-line experiment driver over the core library: training sweeps on
//! the binary digit task, gradient-variance scans, and synthetic data
//! generation, all emitting deterministic CSV and SVG artifacts.

pub mod args;
pub mod config;
pub mod data;
pub mod experiments;
pub mod report;
pub mod synth;

use std::path::PathBuf;

use anyhow::Result;

use args::{Cli, Command};

/// Resolve the invocation and run it, printing every file written.
pub fn run(cli: &Cli) -> Result<()> {
    let files: Vec<PathBuf> = match &cli.command {
        Command::Train(a) => experiments::run_experiment(&config::resolve_train(a)?)?,
        Command::BpVariance(a) => experiments::run_experiment(&config::resolve_bp(a)?)?,
        Command::GenData(a) => synth::write_corpus(&config::resolve_gen(a)?)?,
    };
    for file in files {
        println!("wrote {}", file.display());
    }
    Ok(())
}
