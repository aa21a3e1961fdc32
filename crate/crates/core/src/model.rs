//! Model assembly and training: the two reference architectures, the
//! layer-chaining forward/backward passes, and the mini-batch training loop
//! with per-repeat seeding.
//!
//! Every piece of randomness in a run is derived from the master seed through
//! tagged [`mix_seed`] paths: (repeat) for model init, (repeat, epoch) for
//! the shuffle, and (repeat, epoch, batch, sample, layer) for ES draws. Work
//! parallelized over repeats or batch samples therefore produces the same
//! bits as a sequential run.

use crate::circuits::{AnsatzSpec, EncoderSpec};
use crate::grad::rule_lambda;
use crate::grad::EsConfig;
use crate::mnist::Sample;
use crate::nn::{
    linear_backward, linear_forward, mse_grad, mse_loss, optimizer_step, quantum_backward_seeded,
    quantum_forward, quantum_psr_backward, LinearLayer, Matrix, NnError, OptimizerKind,
    OptimizerState, QuantumLayer,
};
use crate::seed::mix_seed;
use crate::sim::Observable;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use std::f64::consts::{PI, TAU};
use thiserror::Error;

/// Search-distribution width used by the model builders; training configs
/// can override it.
pub const DEFAULT_SIGMA: f64 = PI / 24.0;

const INIT_TAG: u64 = 0x696e6974;
const REPEAT_TAG: u64 = 0x72657065;
const EPOCH_TAG: u64 = 0x65706f63;
const SHUFFLE_TAG: u64 = 0x73687566;
const SAMPLE_TAG: u64 = 0x73616d70;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrainError {
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error("training set is empty")]
    EmptyDataset,
    #[error("bad training config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Linear(LinearLayer),
    Quantum(QuantumLayer),
}

impl Layer {
    pub fn in_dim(&self) -> usize {
        match self {
            Layer::Linear(l) => l.in_dim(),
            Layer::Quantum(q) => q.in_dim(),
        }
    }

    pub fn out_dim(&self) -> usize {
        match self {
            Layer::Linear(l) => l.out_dim(),
            Layer::Quantum(q) => q.out_dim(),
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            Layer::Linear(l) => l.param_count(),
            Layer::Quantum(q) => q.param_count(),
        }
    }
}

/// Layers applied in order; adjacent dimensions must chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub name: String,
    pub layers: Vec<Layer>,
}

impl Model {
    pub fn new(name: impl Into<String>, layers: Vec<Layer>) -> Result<Self, NnError> {
        if layers.is_empty() {
            return Err(NnError::Shape {
                what: "model layers",
                expected: 1,
                got: 0,
            });
        }
        for pair in layers.windows(2) {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(NnError::Shape {
                    what: "layer chain",
                    expected: pair[0].out_dim(),
                    got: pair[1].in_dim(),
                });
            }
        }
        Ok(Model {
            name: name.into(),
            layers,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }
}

/// Shared sample count for a quantum layer: the larger of the rule values
/// for its parameter count and its input dimension.
pub fn effective_lambda(param_count: usize, input_dim: usize) -> usize {
    rule_lambda(param_count).max(rule_lambda(input_dim))
}

fn builder_es(lambda: usize) -> EsConfig {
    EsConfig {
        sigma: DEFAULT_SIGMA,
        lambda,
        seed: 0,
        mirrored: false,
    }
}

fn uniform_angles(rng: &mut impl Rng, count: usize) -> Vec<f64> {
    (0..count).map(|_| rng.gen_range(0.0..TAU)).collect()
}

/// Two stacked quantum layers: a 5-qubit three-round angle encoder measured
/// on its last three qubits, feeding a 3-qubit single-round layer measured on
/// its last two. The intermediate probabilities are scaled by pi to use the
/// full rotation range.
pub fn build_model1(seed: u64) -> Model {
    let mut rng = ChaCha12Rng::seed_from_u64(mix_seed(seed, &[INIT_TAG]));
    let lambda1 = effective_lambda(20, 15);
    let layer1 = QuantumLayer::new(
        EncoderSpec::Input1 {
            n_qubits: 5,
            rounds: 3,
        },
        AnsatzSpec::new(5, 4),
        uniform_angles(&mut rng, 20),
        vec![
            Observable::LocalZeroProjector(2),
            Observable::LocalZeroProjector(3),
            Observable::LocalZeroProjector(4),
        ],
        builder_es(lambda1),
        builder_es(lambda1),
    )
    .expect("fixed layout");

    let lambda2 = effective_lambda(12, 3);
    let mut layer2 = QuantumLayer::new(
        EncoderSpec::Input2 { n_qubits: 3 },
        AnsatzSpec::new(3, 4),
        uniform_angles(&mut rng, 12),
        vec![
            Observable::LocalZeroProjector(1),
            Observable::LocalZeroProjector(2),
        ],
        builder_es(lambda2),
        builder_es(lambda2),
    )
    .expect("fixed layout");
    layer2.input_scale = PI;

    Model::new("model1", vec![Layer::Quantum(layer1), Layer::Quantum(layer2)])
        .expect("dimensions chain by construction")
}

/// Linear(784 -> 4, tanh), a 4-qubit quantum layer measured on every qubit,
/// then Linear(4 -> 2, identity).
pub fn build_model2(seed: u64) -> Model {
    let mut rng = ChaCha12Rng::seed_from_u64(mix_seed(seed, &[INIT_TAG]));
    let front = LinearLayer::uniform_init(4, 784, crate::nn::Activation::Tanh, &mut rng);
    let lambda = effective_lambda(16, 4);
    let quantum = QuantumLayer::new(
        EncoderSpec::Input2 { n_qubits: 4 },
        AnsatzSpec::new(4, 4),
        uniform_angles(&mut rng, 16),
        (0..4).map(Observable::LocalZeroProjector).collect(),
        builder_es(lambda),
        builder_es(lambda),
    )
    .expect("fixed layout");
    let back = LinearLayer::uniform_init(2, 4, crate::nn::Activation::Identity, &mut rng);

    Model::new(
        "model2",
        vec![
            Layer::Linear(front),
            Layer::Quantum(quantum),
            Layer::Linear(back),
        ],
    )
    .expect("dimensions chain by construction")
}

pub fn model_forward(model: &Model, x: &[f64]) -> Result<Vec<f64>, NnError> {
    let mut v = x.to_vec();
    for layer in &model.layers {
        v = match layer {
            Layer::Linear(l) => linear_forward(l, &v)?,
            Layer::Quantum(q) => quantum_forward(q, &v)?,
        };
    }
    Ok(v)
}

/// Per-layer inputs captured during a forward pass, for the backward sweep.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub inputs: Vec<Vec<f64>>,
    pub output: Vec<f64>,
}

pub fn forward_trace(model: &Model, x: &[f64]) -> Result<ForwardTrace, NnError> {
    let mut inputs = Vec::with_capacity(model.layers.len());
    let mut v = x.to_vec();
    for layer in &model.layers {
        inputs.push(v.clone());
        v = match layer {
            Layer::Linear(l) => linear_forward(l, &v)?,
            Layer::Quantum(q) => quantum_forward(q, &v)?,
        };
    }
    Ok(ForwardTrace { inputs, output: v })
}

/// Loss gradient for one layer, congruent to its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum LayerGrad {
    Linear { w: Matrix, b: Vec<f64> },
    Quantum { theta: Vec<f64> },
}

impl LayerGrad {
    pub fn zeros_like(layer: &Layer) -> LayerGrad {
        match layer {
            Layer::Linear(l) => LayerGrad::Linear {
                w: Matrix::zeros(l.out_dim(), l.in_dim()),
                b: vec![0.0; l.out_dim()],
            },
            Layer::Quantum(q) => LayerGrad::Quantum {
                theta: vec![0.0; q.param_count()],
            },
        }
    }

    pub fn add_assign(&mut self, other: &LayerGrad) {
        match (self, other) {
            (LayerGrad::Linear { w, b }, LayerGrad::Linear { w: ow, b: ob }) => {
                for (a, o) in w.as_mut_slice().iter_mut().zip(ow.as_slice()) {
                    *a += o;
                }
                for (a, o) in b.iter_mut().zip(ob) {
                    *a += o;
                }
            }
            (LayerGrad::Quantum { theta }, LayerGrad::Quantum { theta: ot }) => {
                for (a, o) in theta.iter_mut().zip(ot) {
                    *a += o;
                }
            }
            _ => panic!("layer gradient kind mismatch"),
        }
    }

    pub fn scale(&mut self, factor: f64) {
        match self {
            LayerGrad::Linear { w, b } => {
                for v in w.as_mut_slice() {
                    *v *= factor;
                }
                for v in b {
                    *v *= factor;
                }
            }
            LayerGrad::Quantum { theta } => {
                for v in theta {
                    *v *= factor;
                }
            }
        }
    }
}

/// How quantum-layer gradients are obtained: the ES estimator, or the exact
/// parameter-shift rule (the noise-free oracle).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradMode {
    Es,
    Psr,
}

/// Gradients of the squared-error loss with respect to every layer's
/// parameters, using each quantum layer's stored sample seeds.
pub fn model_backward(
    model: &Model,
    x: &[f64],
    target: &[f64],
    mode: GradMode,
) -> Result<Vec<LayerGrad>, NnError> {
    backward_inner(model, x, target, mode, None).map(|(grads, _)| grads)
}

/// Same, with ES sample seeds derived from `call_seed` and the layer index.
/// Also returns the sample's loss, which the trainer logs.
pub fn model_backward_seeded(
    model: &Model,
    x: &[f64],
    target: &[f64],
    mode: GradMode,
    call_seed: u64,
) -> Result<(Vec<LayerGrad>, f64), NnError> {
    backward_inner(model, x, target, mode, Some(call_seed))
}

fn backward_inner(
    model: &Model,
    x: &[f64],
    target: &[f64],
    mode: GradMode,
    call_seed: Option<u64>,
) -> Result<(Vec<LayerGrad>, f64), NnError> {
    let trace = forward_trace(model, x)?;
    let loss = mse_loss(&trace.output, target)?;
    let mut upstream = mse_grad(&trace.output, target)?;
    let mut grads_rev = Vec::with_capacity(model.layers.len());
    for (idx, layer) in model.layers.iter().enumerate().rev() {
        let input = &trace.inputs[idx];
        match layer {
            Layer::Linear(l) => {
                let g = linear_backward(l, input, &upstream)?;
                upstream = g.x;
                grads_rev.push(LayerGrad::Linear { w: g.w, b: g.b });
            }
            Layer::Quantum(q) => {
                let (grad_theta, grad_x) = match mode {
                    GradMode::Psr => quantum_psr_backward(q, input, &upstream)?,
                    GradMode::Es => {
                        let (sp, si) = match call_seed {
                            Some(s) => (
                                mix_seed(s, &[idx as u64, 0]),
                                mix_seed(s, &[idx as u64, 1]),
                            ),
                            None => (q.es_params.seed, q.es_inputs.seed),
                        };
                        quantum_backward_seeded(q, input, &upstream, sp, si)?
                    }
                };
                upstream = grad_x;
                grads_rev.push(LayerGrad::Quantum { theta: grad_theta });
            }
        }
    }
    grads_rev.reverse();
    Ok((grads_rev, loss))
}

/// Index of the largest component (first on ties).
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in xs.iter().enumerate().skip(1) {
        if *v > xs[best] {
            best = i;
        }
    }
    best
}

/// Whether fresh perturbations are drawn for every sample's backward call or
/// shared across a mini-batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EsSampling {
    PerCall,
    PerBatch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub eta: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub repeats: usize,
    pub optimizer: OptimizerKind,
    pub sigma: f64,
    pub lambda_override: Option<usize>,
    pub seed: u64,
    pub grad_mode: GradMode,
    pub es_sampling: EsSampling,
    pub mirrored: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            eta: 0.001,
            epochs: 30,
            batch_size: 32,
            repeats: 1,
            optimizer: OptimizerKind::adam_default(),
            sigma: DEFAULT_SIGMA,
            lambda_override: None,
            seed: 0,
            grad_mode: GradMode::Es,
            es_sampling: EsSampling::PerCall,
            mirrored: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.epochs == 0 || self.repeats == 0 || self.batch_size == 0 {
            return Err(TrainError::Config(
                "epochs, repeats, and batch size must be at least 1".into(),
            ));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(TrainError::Config(format!(
                "learning rate must be finite and non-negative, got {}",
                self.eta
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(TrainError::Config(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        match self.lambda_override {
            Some(0) => {
                return Err(TrainError::Config("lambda must be at least 1".into()));
            }
            Some(l) if self.mirrored && l % 2 != 0 => {
                return Err(TrainError::Config(format!(
                    "mirrored sampling needs an even lambda, got {l}"
                )));
            }
            _ => {}
        }
        Ok(())
    }
}

/// One repeat's logged series, each `epochs` long. `batch_costs[e]` holds the
/// pre-update cost of every mini-batch of epoch e; `train_cost[e]` is their
/// mean.
#[derive(Debug, Clone, PartialEq)]
pub struct RunHistory {
    pub train_cost: Vec<f64>,
    pub val_cost: Vec<f64>,
    pub val_acc: Vec<f64>,
    pub batch_costs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainHistory {
    pub runs: Vec<RunHistory>,
}

/// Train `cfg.repeats` independently seeded models and log their curves.
/// `builder` receives a derived per-repeat seed; the returned model's ES
/// configs are overridden by the config's sigma/lambda/mirrored settings.
pub fn train<B>(
    builder: B,
    train_set: &[Sample],
    val_set: &[Sample],
    cfg: &TrainConfig,
) -> Result<TrainHistory, TrainError>
where
    B: Fn(u64) -> Model + Sync,
{
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let runs: Vec<Result<RunHistory, TrainError>> = (0..cfg.repeats)
        .into_par_iter()
        .map(|r| train_one_repeat(&builder, train_set, val_set, cfg, r))
        .collect();
    let mut out = Vec::with_capacity(runs.len());
    for run in runs {
        out.push(run?);
    }
    Ok(TrainHistory { runs: out })
}

fn apply_config(model: &mut Model, cfg: &TrainConfig) {
    for layer in &mut model.layers {
        if let Layer::Quantum(q) = layer {
            for es in [&mut q.es_params, &mut q.es_inputs] {
                es.sigma = cfg.sigma;
                es.mirrored = cfg.mirrored;
                if let Some(l) = cfg.lambda_override {
                    es.lambda = l;
                }
            }
        }
    }
}

fn train_one_repeat<B>(
    builder: &B,
    train_set: &[Sample],
    val_set: &[Sample],
    cfg: &TrainConfig,
    repeat: usize,
) -> Result<RunHistory, TrainError>
where
    B: Fn(u64) -> Model + Sync,
{
    let repeat_seed = mix_seed(cfg.seed, &[REPEAT_TAG, repeat as u64]);
    let mut model = builder(repeat_seed);
    apply_config(&mut model, cfg);
    let mut optimizers: Vec<OptimizerState> = model
        .layers
        .iter()
        .map(|l| OptimizerState::new(cfg.optimizer, cfg.eta, l.param_count()))
        .collect();

    let mut history = RunHistory {
        train_cost: Vec::with_capacity(cfg.epochs),
        val_cost: Vec::with_capacity(cfg.epochs),
        val_acc: Vec::with_capacity(cfg.epochs),
        batch_costs: Vec::with_capacity(cfg.epochs),
    };

    for epoch in 0..cfg.epochs {
        let epoch_seed = mix_seed(repeat_seed, &[EPOCH_TAG, epoch as u64]);
        let mut order: Vec<usize> = (0..train_set.len()).collect();
        order.shuffle(&mut ChaCha12Rng::seed_from_u64(mix_seed(
            epoch_seed,
            &[SHUFFLE_TAG],
        )));

        let mut batch_costs = Vec::new();
        for (batch_idx, batch) in order.chunks(cfg.batch_size).enumerate() {
            let results: Vec<Result<(Vec<LayerGrad>, f64), NnError>> = batch
                .par_iter()
                .enumerate()
                .map(|(pos, &sample_idx)| {
                    let sample = &train_set[sample_idx];
                    let call_seed = match cfg.es_sampling {
                        EsSampling::PerCall => {
                            mix_seed(epoch_seed, &[SAMPLE_TAG, batch_idx as u64, pos as u64])
                        }
                        EsSampling::PerBatch => {
                            mix_seed(epoch_seed, &[SAMPLE_TAG, batch_idx as u64])
                        }
                    };
                    model_backward_seeded(&model, &sample.x, &sample.target, cfg.grad_mode, call_seed)
                })
                .collect();

            let mut sum: Vec<LayerGrad> = model.layers.iter().map(LayerGrad::zeros_like).collect();
            let mut cost_sum = 0.0;
            for result in results {
                let (grads, loss) = result?;
                for (acc, g) in sum.iter_mut().zip(&grads) {
                    acc.add_assign(g);
                }
                cost_sum += loss;
            }
            let inv = 1.0 / batch.len() as f64;
            for g in &mut sum {
                g.scale(inv);
            }
            batch_costs.push(cost_sum * inv);

            for ((layer, state), grad) in model.layers.iter_mut().zip(&mut optimizers).zip(&sum) {
                step_layer(layer, state, grad)?;
            }
        }

        history
            .train_cost
            .push(batch_costs.iter().sum::<f64>() / batch_costs.len() as f64);
        let (val_cost, val_acc) = evaluate(&model, val_set)?;
        history.val_cost.push(val_cost);
        history.val_acc.push(val_acc);
        history.batch_costs.push(batch_costs);
    }
    Ok(history)
}

fn step_layer(
    layer: &mut Layer,
    state: &mut OptimizerState,
    grad: &LayerGrad,
) -> Result<(), NnError> {
    match (layer, grad) {
        (Layer::Linear(l), LayerGrad::Linear { w, b }) => {
            let w_len = l.w.as_slice().len();
            let mut params: Vec<f64> = l.w.as_slice().to_vec();
            params.extend_from_slice(&l.b);
            let mut g: Vec<f64> = w.as_slice().to_vec();
            g.extend_from_slice(b);
            optimizer_step(state, &mut params, &g)?;
            l.w.as_mut_slice().copy_from_slice(&params[..w_len]);
            l.b.copy_from_slice(&params[w_len..]);
            Ok(())
        }
        (Layer::Quantum(q), LayerGrad::Quantum { theta }) => {
            optimizer_step(state, &mut q.theta, theta)
        }
        _ => panic!("layer gradient kind mismatch"),
    }
}

/// Deterministic (sampling-free) validation pass: mean loss and argmax
/// accuracy. Empty sets yield NaN.
pub fn evaluate(model: &Model, samples: &[Sample]) -> Result<(f64, f64), NnError> {
    if samples.is_empty() {
        return Ok((f64::NAN, f64::NAN));
    }
    let per_sample: Vec<Result<(f64, bool), NnError>> = samples
        .par_iter()
        .map(|s| {
            let y = model_forward(model, &s.x)?;
            let loss = mse_loss(&y, &s.target)?;
            let correct = argmax(&y) == argmax(&s.target);
            Ok((loss, correct))
        })
        .collect();
    let mut loss_sum = 0.0;
    let mut n_correct = 0usize;
    for r in per_sample {
        let (loss, correct) = r?;
        loss_sum += loss;
        n_correct += correct as usize;
    }
    let n = samples.len() as f64;
    Ok((loss_sum / n, n_correct as f64 / n))
}
