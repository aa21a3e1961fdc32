//! key=value config files and the three-way merge that produces a runnable
//! spec: built-in defaults, overridden by the config file, overridden by
//! explicit command-line flags.

use std::collections::HashMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use esqnn_core::model::{GradMode, DEFAULT_SIGMA};

use crate::args::{BpArgs, GenDataArgs, TrainArgs};
use crate::experiments::{
    BpSpec, ExperimentKind, ExperimentSpec, LambdaMode, ModelId, TrainSpec,
};
use crate::synth::{GenSpec, CORPUS_COUNT, CORPUS_SEED};

const TRAIN_KEYS: &[&str] = &[
    "model", "eta", "lambda", "epochs", "repeats", "train-n", "val-n", "batch", "sigma", "seed",
    "data-dir", "out",
];
const BP_KEYS: &[&str] = &["qubits", "layers", "samples", "estimator", "sigma", "seed", "out"];

/// Parsed key=value file. Blank lines and `#` comments are ignored;
/// duplicate keys keep the last value.
#[derive(Debug)]
pub struct FileConfig {
    map: HashMap<String, String>,
}

impl FileConfig {
    pub fn empty() -> Self {
        FileConfig { map: HashMap::new() }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config file {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut map = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key=value, got {raw:?}", i + 1))?;
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(FileConfig { map })
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        let mut unknown: Vec<&str> = self
            .map
            .keys()
            .map(String::as_str)
            .filter(|k| !allowed.contains(k))
            .collect();
        unknown.sort_unstable();
        if !unknown.is_empty() {
            bail!(
                "unknown config key(s) {}; expected one of: {}",
                unknown.join(", "),
                allowed.join(", ")
            );
        }
        Ok(())
    }

    fn raw(&self, key: &str) -> Option<String> {
        self.map.get(key).cloned()
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        self.map
            .get(key)
            .map(|s| {
                s.parse()
                    .map_err(|e| anyhow!("config key {key}: cannot parse {s:?}: {e}"))
            })
            .transpose()
    }
}

fn load_file(path: Option<&Path>) -> Result<FileConfig> {
    match path {
        Some(p) => FileConfig::load(p),
        None => Ok(FileConfig::empty()),
    }
}

pub fn parse_f64_list(text: &str) -> Result<Vec<f64>> {
    parse_list(text)
}

pub fn parse_usize_list(text: &str) -> Result<Vec<usize>> {
    parse_list(text)
}

fn parse_list<T: FromStr>(text: &str) -> Result<Vec<T>>
where
    T::Err: Display,
{
    let items: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        bail!("expected a comma-separated list, got {text:?}");
    }
    items
        .into_iter()
        .map(|s| s.parse().map_err(|e| anyhow!("cannot parse {s:?}: {e}")))
        .collect()
}

pub fn parse_lambda_mode(text: &str) -> Result<LambdaMode> {
    if text.trim().eq_ignore_ascii_case("rule") {
        Ok(LambdaMode::Rule)
    } else {
        Ok(LambdaMode::Fixed(
            parse_usize_list(text).context("lambda must be \"rule\" or a list of counts")?,
        ))
    }
}

pub fn parse_estimator(text: &str) -> Result<GradMode> {
    match text.trim().to_ascii_lowercase().as_str() {
        "es" => Ok(GradMode::Es),
        "psr" => Ok(GradMode::Psr),
        other => bail!("estimator must be \"es\" or \"psr\", got {other:?}"),
    }
}

pub fn resolve_train(args: &TrainArgs) -> Result<ExperimentSpec> {
    let file = load_file(args.config.as_deref())?;
    file.check_keys(TRAIN_KEYS)?;

    let model_num = args
        .model
        .or(file.parsed("model")?)
        .ok_or_else(|| anyhow!("--model is required (1 or 2)"))?;
    let eta_text = args.eta.clone().or_else(|| file.raw("eta")).unwrap_or_else(|| "1e-3".into());
    let lambda_text =
        args.lambda.clone().or_else(|| file.raw("lambda")).unwrap_or_else(|| "rule".into());

    let spec = ExperimentSpec {
        kind: ExperimentKind::Train(TrainSpec {
            model: ModelId::from_number(model_num)?,
            etas: parse_f64_list(&eta_text).context("learning-rate list")?,
            lambda: parse_lambda_mode(&lambda_text)?,
            epochs: args.epochs.or(file.parsed("epochs")?).unwrap_or(30),
            repeats: args.repeats.or(file.parsed("repeats")?).unwrap_or(1),
            train_n: args.train_n.or(file.parsed("train-n")?).unwrap_or(200),
            val_n: args.val_n.or(file.parsed("val-n")?).unwrap_or(50),
            batch_size: args.batch.or(file.parsed("batch")?).unwrap_or(32),
            sigma: args.sigma.or(file.parsed("sigma")?).unwrap_or(DEFAULT_SIGMA),
            data_dir: args.data_dir.clone().or_else(|| file.raw("data-dir").map(PathBuf::from)),
        }),
        out_dir: args
            .out
            .clone()
            .or_else(|| file.raw("out").map(PathBuf::from))
            .unwrap_or_else(|| "out".into()),
        seed: args.seed.or(file.parsed("seed")?).unwrap_or(0),
    };
    spec.validate()?;
    Ok(spec)
}

pub fn resolve_bp(args: &BpArgs) -> Result<ExperimentSpec> {
    let file = load_file(args.config.as_deref())?;
    file.check_keys(BP_KEYS)?;

    let qubits_text =
        args.qubits.clone().or_else(|| file.raw("qubits")).unwrap_or_else(|| "2,3,4,5,6,7,8".into());
    let layers_text =
        args.layers.clone().or_else(|| file.raw("layers")).unwrap_or_else(|| "1,2,4,8".into());
    let estimator_text =
        args.estimator.clone().or_else(|| file.raw("estimator")).unwrap_or_else(|| "psr".into());

    let spec = ExperimentSpec {
        kind: ExperimentKind::BpVariance(BpSpec {
            qubits: parse_usize_list(&qubits_text).context("qubit list")?,
            layers: parse_usize_list(&layers_text).context("layer list")?,
            samples: args.samples.or(file.parsed("samples")?).unwrap_or(500),
            estimator: parse_estimator(&estimator_text)?,
            sigma: args.sigma.or(file.parsed("sigma")?).unwrap_or(DEFAULT_SIGMA),
        }),
        out_dir: args
            .out
            .clone()
            .or_else(|| file.raw("out").map(PathBuf::from))
            .unwrap_or_else(|| "out".into()),
        seed: args.seed.or(file.parsed("seed")?).unwrap_or(0),
    };
    spec.validate()?;
    Ok(spec)
}

pub fn resolve_gen(args: &GenDataArgs) -> Result<GenSpec> {
    let count = args.count.unwrap_or(CORPUS_COUNT);
    if count == 0 {
        bail!("--count must be at least 1");
    }
    Ok(GenSpec {
        count,
        seed: args.seed.unwrap_or(CORPUS_SEED),
        out_dir: args.out.clone().unwrap_or_else(|| "data".into()),
    })
}
