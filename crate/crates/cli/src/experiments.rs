//! The two experiment drivers: eta x lambda training sweeps over the binary
//! digit task, and the gradient-variance scan across qubit counts and circuit
//! depths. Both write CSV records plus an SVG chart and are bit-reproducible
//! from (spec, master seed) regardless of worker parallelism.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use esqnn_core::circuits::{build_ansatz, AnsatzSpec, EncoderSpec};
use esqnn_core::grad::{es_gradient, rule_lambda, EsConfig, FnObjective};
use esqnn_core::mnist::{make_binary_split, pooled_samples, Sample};
use esqnn_core::model::{
    build_model1, build_model2, train, GradMode, Model, TrainConfig, TrainHistory,
};
use esqnn_core::seed::mix_seed;
use esqnn_core::sim::{Observable, MAX_QUBITS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::data::load_pool;
use crate::report::{number, write_csv, write_svg, Band, LinePlot, Series, PALETTE};

/// Derives one training seed per (eta, lambda) grid cell.
const CELL_TAG: u64 = 0x63656c6c;
/// Derives the variance scan's parameter draws and estimator streams.
const SCAN_TAG: u64 = 0x7363616e;
/// Distinguishes an estimator's sample stream from the theta draw it sees.
const ESTIMATOR_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelId {
    One,
    Two,
}

impl ModelId {
    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(ModelId::One),
            2 => Ok(ModelId::Two),
            other => bail!("model must be 1 or 2, got {other}"),
        }
    }

    pub fn number(self) -> u8 {
        match self {
            ModelId::One => 1,
            ModelId::Two => 2,
        }
    }

    fn builder(self) -> fn(u64) -> Model {
        match self {
            ModelId::One => build_model1,
            ModelId::Two => build_model2,
        }
    }
}

/// Which sample counts the ES estimator uses across the sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LambdaMode {
    /// floor(4 + 3 ln p) per layer, the built-in heuristic.
    Rule,
    /// One sweep cell per fixed value.
    Fixed(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSpec {
    pub model: ModelId,
    pub etas: Vec<f64>,
    pub lambda: LambdaMode,
    pub epochs: usize,
    pub repeats: usize,
    pub train_n: usize,
    pub val_n: usize,
    pub batch_size: usize,
    pub sigma: f64,
    pub data_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BpSpec {
    pub qubits: Vec<usize>,
    pub layers: Vec<usize>,
    pub samples: usize,
    pub estimator: GradMode,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentKind {
    Train(TrainSpec),
    BpVariance(BpSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            ExperimentKind::Train(t) => {
                if t.etas.is_empty() {
                    bail!("the learning-rate sweep needs at least one value");
                }
                if t.etas.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
                    bail!("learning rates must be finite and non-negative");
                }
                if let LambdaMode::Fixed(ls) = &t.lambda {
                    if ls.is_empty() {
                        bail!("the lambda sweep needs at least one value");
                    }
                    if ls.contains(&0) {
                        bail!("lambda must be at least 1");
                    }
                }
                if t.epochs == 0 || t.repeats == 0 || t.batch_size == 0 {
                    bail!("epochs, repeats, and batch size must be at least 1");
                }
                if !(t.sigma > 0.0 && t.sigma.is_finite()) {
                    bail!("sigma must be positive, got {}", t.sigma);
                }
                if t.train_n == 0 {
                    bail!("the training set cannot be empty");
                }
            }
            ExperimentKind::BpVariance(b) => {
                if b.qubits.is_empty() || b.layers.is_empty() {
                    bail!("the variance scan needs at least one qubit count and one depth");
                }
                if let Some(&n) = b.qubits.iter().find(|&&n| n == 0 || n > MAX_QUBITS) {
                    bail!("qubit count {n} outside supported range 1..={MAX_QUBITS}");
                }
                if b.samples < 30 {
                    bail!("variance over fewer than 30 draws is too noisy to report, got {}", b.samples);
                }
                if !(b.sigma > 0.0 && b.sigma.is_finite()) {
                    bail!("sigma must be positive, got {}", b.sigma);
                }
            }
        }
        Ok(())
    }
}

/// Aggregated curves for one (eta, lambda) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochAgg {
    pub epoch: usize,
    pub cost_mean: f64,
    pub cost_min: f64,
    pub cost_max: f64,
    pub val_acc_mean: f64,
}

/// Everything produced for one sweep cell: raw histories, their aggregation,
/// and the files written.
#[derive(Debug)]
pub struct CellReport {
    pub eta: f64,
    pub lambda: Option<usize>,
    pub stem: String,
    pub history: TrainHistory,
    pub epochs: Vec<EpochAgg>,
    pub files: Vec<PathBuf>,
}

/// One measured point of the variance scan.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceRecord {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub variance: f64,
    pub samples: usize,
}

/// Validate and dispatch, returning every file written.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<PathBuf>> {
    spec.validate()?;
    match &spec.kind {
        ExperimentKind::Train(t) => {
            let cells = run_training_experiment(t, &spec.out_dir, spec.seed)?;
            Ok(cells.into_iter().flat_map(|c| c.files).collect())
        }
        ExperimentKind::BpVariance(b) => {
            let (_, files) = run_bp_variance(b, &spec.out_dir, spec.seed)?;
            Ok(files)
        }
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased variance of a sample; 0 for fewer than two values.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Per-epoch mean/min/max cost and mean validation accuracy over repeats.
pub fn aggregate(history: &TrainHistory) -> Vec<EpochAgg> {
    let epochs = history.runs.first().map_or(0, |r| r.train_cost.len());
    (0..epochs)
        .map(|e| {
            let costs: Vec<f64> = history.runs.iter().map(|r| r.train_cost[e]).collect();
            let accs: Vec<f64> = history.runs.iter().map(|r| r.val_acc[e]).collect();
            EpochAgg {
                epoch: e + 1,
                cost_mean: mean(&costs),
                cost_min: costs.iter().cloned().fold(f64::INFINITY, f64::min),
                cost_max: costs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                val_acc_mean: mean(&accs),
            }
        })
        .collect()
}

fn eta_label(eta: f64) -> String {
    format!("{eta:e}")
}

fn lambda_label(lambda: Option<usize>) -> String {
    match lambda {
        None => "rule".to_string(),
        Some(l) => l.to_string(),
    }
}

pub fn cell_stem(model: ModelId, eta: f64, lambda: Option<usize>) -> String {
    format!("model{}_eta{}_lambda{}", model.number(), eta_label(eta), lambda_label(lambda))
}

/// Train every (eta, lambda) cell of the sweep and write per-cell artifacts:
/// an aggregate CSV, one raw CSV per repeat, and an SVG chart of the mean
/// cost (min/max band) and mean validation accuracy.
pub fn run_training_experiment(
    t: &TrainSpec,
    out_dir: &Path,
    seed: u64,
) -> Result<Vec<CellReport>> {
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let pool = load_pool(t.data_dir.as_deref())?;
    println!("data: {}", pool.source);
    let (train_ds, val_ds) = make_binary_split(&pool.images, &pool.labels, t.train_n, t.val_n, seed)?;
    let (train_samples, val_samples): (Vec<Sample>, Vec<Sample>) = match t.model {
        ModelId::One => (pooled_samples(&train_ds, 5, 3)?, pooled_samples(&val_ds, 5, 3)?),
        ModelId::Two => (train_ds.samples, val_ds.samples),
    };

    let lambdas: Vec<Option<usize>> = match &t.lambda {
        LambdaMode::Rule => vec![None],
        LambdaMode::Fixed(ls) => ls.iter().map(|&l| Some(l)).collect(),
    };

    let mut reports = Vec::new();
    for (cell_index, (&eta, &lambda)) in t
        .etas
        .iter()
        .flat_map(|e| lambdas.iter().map(move |l| (e, l)))
        .enumerate()
    {
        let cfg = TrainConfig {
            eta,
            epochs: t.epochs,
            batch_size: t.batch_size,
            repeats: t.repeats,
            sigma: t.sigma,
            lambda_override: lambda,
            seed: mix_seed(seed, &[CELL_TAG, cell_index as u64]),
            ..TrainConfig::default()
        };
        let stem = cell_stem(t.model, eta, lambda);
        let history = train(t.model.builder(), &train_samples, &val_samples, &cfg)
            .with_context(|| format!("training cell {stem}"))?;
        let epochs = aggregate(&history);
        let files = write_cell_artifacts(out_dir, &stem, &history, &epochs)?;
        reports.push(CellReport { eta, lambda, stem, history, epochs, files });
    }
    Ok(reports)
}

fn write_cell_artifacts(
    out_dir: &Path,
    stem: &str,
    history: &TrainHistory,
    epochs: &[EpochAgg],
) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();

    let agg_path = out_dir.join(format!("{stem}.csv"));
    let rows: Vec<Vec<String>> = epochs
        .iter()
        .map(|e| {
            vec![
                e.epoch.to_string(),
                number(e.cost_mean),
                number(e.cost_min),
                number(e.cost_max),
                number(e.val_acc_mean),
            ]
        })
        .collect();
    write_csv(&agg_path, &["epoch", "cost_mean", "cost_min", "cost_max", "val_acc_mean"], &rows)?;
    files.push(agg_path);

    for (r, run) in history.runs.iter().enumerate() {
        let rep_path = out_dir.join(format!("{stem}_rep{r}.csv"));
        let rows: Vec<Vec<String>> = (0..run.train_cost.len())
            .map(|e| {
                vec![
                    (e + 1).to_string(),
                    number(run.train_cost[e]),
                    number(run.val_cost[e]),
                    number(run.val_acc[e]),
                ]
            })
            .collect();
        write_csv(&rep_path, &["epoch", "cost", "val_cost", "val_acc"], &rows)?;
        files.push(rep_path);
    }

    let xs = |f: fn(&EpochAgg) -> f64| -> Vec<(f64, f64)> {
        epochs.iter().map(|e| (e.epoch as f64, f(e))).collect()
    };
    let plot = LinePlot {
        title: stem.replace('_', " "),
        x_label: "epoch".into(),
        y_label: "cost / accuracy".into(),
        series: vec![
            Series { label: "cost mean".into(), color: PALETTE[0].into(), points: xs(|e| e.cost_mean) },
            Series { label: "val accuracy mean".into(), color: PALETTE[1].into(), points: xs(|e| e.val_acc_mean) },
        ],
        bands: vec![Band {
            color: PALETTE[0].into(),
            lower: xs(|e| e.cost_min),
            upper: xs(|e| e.cost_max),
        }],
    };
    let svg_path = out_dir.join(format!("{stem}.svg"));
    write_svg(&svg_path, &plot)?;
    files.push(svg_path);
    Ok(files)
}

/// Mean single-qubit ground-state population after the depth-`layers` ansatz,
/// with every input pinned to pi/4 through the one-rotation-per-qubit encoder.
pub fn scan_cost(n: usize, layers: usize, x: &[f64], theta: &[f64]) -> f64 {
    let mut state = EncoderSpec::Input2 { n_qubits: n }
        .prepare(x)
        .expect("input length matches qubit count");
    let ops = build_ansatz(theta, &AnsatzSpec::new(n, layers)).expect("theta length matches ansatz");
    state.apply_all(&ops).expect("ops stay in range");
    let total: f64 = (0..n)
        .map(|q| {
            state
                .expectation(&Observable::LocalZeroProjector(q))
                .expect("qubit in range")
        })
        .sum();
    total / n as f64
}

fn even(l: usize) -> usize {
    if l % 2 == 1 {
        l + 1
    } else {
        l
    }
}

/// First-component gradient estimates over `samples` uniform theta draws.
/// The draws depend only on (seed, n, layers, draw index), so runs with
/// different estimators see identical parameter vectors and their variances
/// are directly comparable.
pub fn gradient_draws(
    n: usize,
    layers: usize,
    samples: usize,
    estimator: GradMode,
    sigma: f64,
    seed: u64,
) -> Vec<f64> {
    let dim = n * layers;
    if dim == 0 {
        // no parameters: the cost is constant and every gradient is zero
        return vec![0.0; samples];
    }
    let x = vec![PI / 4.0; n];
    let cost = move |theta: &[f64]| scan_cost(n, layers, &x, theta);
    (0..samples)
        .into_par_iter()
        .map(|k| {
            let draw_seed = mix_seed(seed, &[SCAN_TAG, n as u64, layers as u64, k as u64]);
            let mut rng = ChaCha12Rng::seed_from_u64(draw_seed);
            let theta: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
            match estimator {
                GradMode::Psr => {
                    let mut plus = theta.clone();
                    let mut minus = theta.clone();
                    plus[0] += FRAC_PI_2;
                    minus[0] -= FRAC_PI_2;
                    (cost(&plus) - cost(&minus)) / 2.0
                }
                GradMode::Es => {
                    let cfg = EsConfig {
                        sigma,
                        lambda: even(rule_lambda(dim)),
                        seed: mix_seed(draw_seed, &[ESTIMATOR_STREAM]),
                        mirrored: true,
                    };
                    let obj = FnObjective::new(dim, &cost);
                    es_gradient(&obj, &theta, &cfg).expect("valid es config")[0]
                }
            }
        })
        .collect()
}

/// Scan Var[dC/d theta_1] over the (layers x qubits) grid and write the CSV
/// and the log-variance chart.
pub fn run_bp_variance(
    b: &BpSpec,
    out_dir: &Path,
    seed: u64,
) -> Result<(Vec<VarianceRecord>, Vec<PathBuf>)> {
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut records = Vec::new();
    for &layers in &b.layers {
        for &n in &b.qubits {
            let grads = gradient_draws(n, layers, b.samples, b.estimator, b.sigma, seed);
            records.push(VarianceRecord {
                n_qubits: n,
                n_layers: layers,
                variance: sample_variance(&grads),
                samples: b.samples,
            });
        }
    }

    let csv_path = out_dir.join("bp_variance.csv");
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            vec![
                r.n_qubits.to_string(),
                r.n_layers.to_string(),
                number(r.variance),
                r.samples.to_string(),
            ]
        })
        .collect();
    write_csv(&csv_path, &["n", "L", "variance", "samples"], &rows)?;

    let series: Vec<Series> = b
        .layers
        .iter()
        .enumerate()
        .map(|(i, &layers)| Series {
            label: format!("L={layers}"),
            color: PALETTE[i % PALETTE.len()].into(),
            points: records
                .iter()
                .filter(|r| r.n_layers == layers && r.variance > 0.0)
                .map(|r| (r.n_qubits as f64, r.variance.log10()))
                .collect(),
        })
        .collect();
    let estimator = match b.estimator {
        GradMode::Es => "es",
        GradMode::Psr => "psr",
    };
    let plot = LinePlot {
        title: format!("gradient variance vs qubits ({estimator})"),
        x_label: "qubits".into(),
        y_label: "log10 variance".into(),
        series,
        bands: vec![],
    };
    let svg_path = out_dir.join("bp_variance.svg");
    write_svg(&svg_path, &plot)?;

    Ok((records, vec![csv_path, svg_path]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use esqnn_testkit::stats::{std_error, variance_sample};

    #[test]
    fn aggregation_degenerates_correctly_for_one_repeat() {
        let history = TrainHistory {
            runs: vec![esqnn_core::model::RunHistory {
                train_cost: vec![0.4, 0.3],
                val_cost: vec![0.5, 0.45],
                val_acc: vec![0.5, 0.75],
                batch_costs: vec![vec![0.4], vec![0.3]],
            }],
        };
        let agg = aggregate(&history);
        assert_eq!(agg.len(), 2);
        for (e, a) in agg.iter().enumerate() {
            assert_eq!(a.epoch, e + 1);
            assert_eq!(a.cost_mean, a.cost_min);
            assert_eq!(a.cost_mean, a.cost_max);
        }
        assert_eq!(agg[1].val_acc_mean, 0.75);
    }

    #[test]
    fn depth_zero_scan_cell_has_zero_variance() {
        let grads = gradient_draws(3, 0, 40, GradMode::Psr, 0.1, 1);
        assert!(grads.iter().all(|&g| g == 0.0));
        assert_eq!(sample_variance(&grads), 0.0);
    }

    #[test]
    fn single_qubit_shallow_variance_matches_the_closed_form() {
        // C(theta) = cos^2((pi/4 + theta)/2), so dC/dtheta = -sin(pi/4 + theta)/2
        // and over uniform theta the variance is E[sin^2]/4 = 1/8.
        let grads = gradient_draws(1, 1, 4000, GradMode::Psr, 0.1, 7);
        let var = sample_variance(&grads);
        // SE of a sample variance of a bounded variable, estimated from the
        // fourth moment: use 3 * SE of the squared deviations' mean.
        let m = grads.iter().sum::<f64>() / grads.len() as f64;
        let sq: Vec<f64> = grads.iter().map(|g| (g - m) * (g - m)).collect();
        let tol = 3.0 * std_error(&sq);
        assert!(
            (var - 0.125).abs() <= tol,
            "variance {var} not within {tol} of 1/8"
        );
        assert!((variance_sample(&grads) - var).abs() < 1e-15);
    }

    #[test]
    fn paired_draws_share_thetas_across_estimators() {
        // same seed: the PSR and ES runs see identical theta draws, so the
        // two series are correlated; unpaired draws would decorrelate them
        // (empirical correlation magnitude ~ 1/sqrt(samples) ~ 0.05)
        let psr = gradient_draws(2, 2, 400, GradMode::Psr, PI / 24.0, 3);
        let es = gradient_draws(2, 2, 400, GradMode::Es, PI / 24.0, 3);
        assert_eq!(psr.len(), es.len());
        let corr = {
            let (mp, me) = (mean(&psr), mean(&es));
            let cov: f64 = psr.iter().zip(&es).map(|(p, e)| (p - mp) * (e - me)).sum();
            let vp: f64 = psr.iter().map(|p| (p - mp) * (p - mp)).sum();
            let ve: f64 = es.iter().map(|e| (e - me) * (e - me)).sum();
            cov / (vp * ve).sqrt()
        };
        assert!(corr > 0.35, "paired estimator correlation too low: {corr}");
    }

    #[test]
    fn estimator_labels_and_stems_are_stable() {
        assert_eq!(cell_stem(ModelId::Two, 1e-4, None), "model2_eta1e-4_lambdarule");
        assert_eq!(cell_stem(ModelId::One, 0.001, Some(6)), "model1_eta1e-3_lambda6");
        assert_eq!(lambda_label(Some(12)), "12");
    }

    #[test]
    fn validation_rejects_bad_specs() {
        let spec = ExperimentSpec {
            kind: ExperimentKind::BpVariance(BpSpec {
                qubits: vec![2],
                layers: vec![1],
                samples: 10,
                estimator: GradMode::Psr,
                sigma: 0.1,
            }),
            out_dir: PathBuf::from("out"),
            seed: 0,
        };
        assert!(spec.validate().unwrap_err().to_string().contains("30"));

        let spec = ExperimentSpec {
            kind: ExperimentKind::Train(TrainSpec {
                model: ModelId::One,
                etas: vec![],
                lambda: LambdaMode::Rule,
                epochs: 1,
                repeats: 1,
                train_n: 4,
                val_n: 2,
                batch_size: 1,
                sigma: 0.1,
                data_dir: None,
            }),
            out_dir: PathBuf::from("out"),
            seed: 0,
        };
        assert!(spec.validate().is_err());
    }
}
