//! Layer primitives for hybrid networks: classical affine layers with
//! analytic backprop, quantum expectation layers with ES or parameter-shift
//! gradients, the mean-squared-error loss, and SGD/Adam updates.
//!
//! A quantum layer's backward pass needs derivatives with respect to both its
//! parameters and its inputs (the inputs feed the chain rule of the layer
//! below). Both come from the same trick: the vector output is collapsed to
//! one scalar h(z) = sum_i upstream_i f_i(z) before estimating, so one ES
//! call of lambda evaluations covers all output components at once.

use crate::circuits::{build_ansatz, AnsatzSpec, CircuitError, EncoderSpec};
use crate::grad::{es_gradient, shift_gradient, EsConfig, FnObjective, GradError};
use crate::sim::{Observable, SimError};
use rand::Rng;
use std::f64::consts::FRAC_PI_2;
use std::ops::{Index, IndexMut};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NnError {
    #[error("{what}: expected dimension {expected}, got {got}")]
    Shape {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("quantum layer needs at least one observable")]
    NoObservables,
    #[error("encoder acts on {encoder} qubits but ansatz on {ansatz}")]
    QubitMismatch { encoder: usize, ansatz: usize },
    #[error("encoder has no per-input rotation angle, cannot shift-differentiate inputs")]
    NoAngleFactor,
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Grad(#[from] GradError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Dense row-major real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |r, c| if r == c { 1.0 } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// W x.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        self.data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(x).map(|(w, v)| w * v).sum())
            .collect()
    }

    /// W^T y.
    pub fn tr_matvec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (row, yi) in self.data.chunks_exact(self.cols).zip(y) {
            for (o, w) in out.iter_mut().zip(row) {
                *o += w * yi;
            }
        }
        out
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Identity,
}

impl Activation {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Tanh => v.tanh(),
            Activation::Identity => v,
        }
    }

    /// phi'(pre) evaluated at the pre-activation value.
    pub fn derivative(self, pre: f64) -> f64 {
        match self {
            Activation::Tanh => {
                let t = pre.tanh();
                1.0 - t * t
            }
            Activation::Identity => 1.0,
        }
    }
}

/// Affine layer y = phi(W x + b).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearLayer {
    pub w: Matrix,
    pub b: Vec<f64>,
    pub activation: Activation,
}

impl LinearLayer {
    pub fn new(w: Matrix, b: Vec<f64>, activation: Activation) -> Result<Self, NnError> {
        if b.len() != w.rows() {
            return Err(NnError::Shape {
                what: "bias",
                expected: w.rows(),
                got: b.len(),
            });
        }
        Ok(LinearLayer { w, b, activation })
    }

    /// W and b drawn uniformly from [-1/sqrt(n_in), 1/sqrt(n_in)].
    pub fn uniform_init(
        n_out: usize,
        n_in: usize,
        activation: Activation,
        rng: &mut impl Rng,
    ) -> Self {
        let bound = 1.0 / (n_in as f64).sqrt();
        let w = Matrix::from_fn(n_out, n_in, |_, _| rng.gen_range(-bound..bound));
        let b = (0..n_out).map(|_| rng.gen_range(-bound..bound)).collect();
        LinearLayer {
            w,
            b,
            activation,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.w.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.w.rows()
    }

    pub fn param_count(&self) -> usize {
        self.w.rows() * self.w.cols() + self.b.len()
    }
}

pub fn linear_forward(layer: &LinearLayer, x: &[f64]) -> Result<Vec<f64>, NnError> {
    expect("linear input", layer.in_dim(), x.len())?;
    let out = layer
        .w
        .matvec(x)
        .iter()
        .zip(&layer.b)
        .map(|(wx, b)| layer.activation.apply(wx + b))
        .collect();
    Ok(out)
}

/// Gradients of a scalar loss through one linear layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearGrad {
    pub w: Matrix,
    pub b: Vec<f64>,
    pub x: Vec<f64>,
}

pub fn linear_backward(
    layer: &LinearLayer,
    x: &[f64],
    upstream: &[f64],
) -> Result<LinearGrad, NnError> {
    expect("linear input", layer.in_dim(), x.len())?;
    expect("linear upstream", layer.out_dim(), upstream.len())?;
    let pre: Vec<f64> = layer
        .w
        .matvec(x)
        .iter()
        .zip(&layer.b)
        .map(|(wx, b)| wx + b)
        .collect();
    let g: Vec<f64> = upstream
        .iter()
        .zip(&pre)
        .map(|(u, p)| u * layer.activation.derivative(*p))
        .collect();
    let grad_w = Matrix::from_fn(layer.out_dim(), layer.in_dim(), |r, c| g[r] * x[c]);
    let grad_x = layer.w.tr_matvec(&g);
    Ok(LinearGrad {
        w: grad_w,
        b: g,
        x: grad_x,
    })
}

/// Encoder, parameterized circuit, and measurement list, evaluated as one
/// layer. `input_scale` multiplies inputs before encoding; input gradients
/// include the factor.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumLayer {
    pub encoder: EncoderSpec,
    pub ansatz: AnsatzSpec,
    pub theta: Vec<f64>,
    pub observables: Vec<Observable>,
    pub es_params: EsConfig,
    pub es_inputs: EsConfig,
    pub input_scale: f64,
}

impl QuantumLayer {
    pub fn new(
        encoder: EncoderSpec,
        ansatz: AnsatzSpec,
        theta: Vec<f64>,
        observables: Vec<Observable>,
        es_params: EsConfig,
        es_inputs: EsConfig,
    ) -> Result<Self, NnError> {
        if encoder.n_qubits() != ansatz.n_qubits {
            return Err(NnError::QubitMismatch {
                encoder: encoder.n_qubits(),
                ansatz: ansatz.n_qubits,
            });
        }
        expect("ansatz parameters", ansatz.param_count(), theta.len())?;
        if observables.is_empty() {
            return Err(NnError::NoObservables);
        }
        for obs in &observables {
            let q = match *obs {
                Observable::GlobalBasisProjector(i) => {
                    if i >= 1 << encoder.n_qubits() {
                        return Err(NnError::Sim(SimError::BasisOutOfRange {
                            index: i,
                            n_qubits: encoder.n_qubits(),
                        }));
                    }
                    continue;
                }
                Observable::LocalZeroProjector(q) => q,
            };
            if q >= encoder.n_qubits() {
                return Err(NnError::Sim(SimError::QubitOutOfRange {
                    qubit: q,
                    n_qubits: encoder.n_qubits(),
                }));
            }
        }
        Ok(QuantumLayer {
            encoder,
            ansatz,
            theta,
            observables,
            es_params,
            es_inputs,
            input_scale: 1.0,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.encoder.input_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.observables.len()
    }

    pub fn param_count(&self) -> usize {
        self.theta.len()
    }

    /// Expectations for explicit (scaled input, parameters), shared by the
    /// forward pass and every gradient objective. Dimensions must already be
    /// validated; this cannot fail for angle-based encoders.
    fn outputs(&self, scaled_x: &[f64], theta: &[f64]) -> Vec<f64> {
        let mut state = self
            .encoder
            .prepare(scaled_x)
            .expect("encoder input validated");
        let ops = build_ansatz(theta, &self.ansatz).expect("parameter count validated");
        state.apply_all(&ops).expect("ops validated");
        self.observables
            .iter()
            .map(|obs| state.expectation(obs).expect("observable validated"))
            .collect()
    }

    fn scaled(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|v| v * self.input_scale).collect()
    }
}

pub fn quantum_forward(layer: &QuantumLayer, x: &[f64]) -> Result<Vec<f64>, NnError> {
    expect("quantum input", layer.in_dim(), x.len())?;
    Ok(layer.outputs(&layer.scaled(x), &layer.theta))
}

/// ES gradients of h = upstream . f with respect to (theta, x), using the
/// seeds stored in the layer's configs.
pub fn quantum_backward(
    layer: &QuantumLayer,
    x: &[f64],
    upstream: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), NnError> {
    quantum_backward_seeded(layer, x, upstream, layer.es_params.seed, layer.es_inputs.seed)
}

/// Same as [`quantum_backward`] with the two sample-stream seeds supplied by
/// the caller. The training loop derives one pair per (repeat, epoch, batch,
/// sample, layer) so that parallel execution cannot reorder draws.
pub fn quantum_backward_seeded(
    layer: &QuantumLayer,
    x: &[f64],
    upstream: &[f64],
    seed_params: u64,
    seed_inputs: u64,
) -> Result<(Vec<f64>, Vec<f64>), NnError> {
    expect("quantum input", layer.in_dim(), x.len())?;
    expect("quantum upstream", layer.out_dim(), upstream.len())?;
    let scaled = layer.scaled(x);

    let obj_theta = FnObjective::new(layer.param_count(), |theta: &[f64]| {
        weighted(&layer.outputs(&scaled, theta), upstream)
    });
    let cfg_theta = EsConfig {
        seed: seed_params,
        ..layer.es_params
    };
    let grad_theta = es_gradient(&obj_theta, &layer.theta, &cfg_theta)?;

    let obj_x = FnObjective::new(layer.in_dim(), |sx: &[f64]| {
        weighted(&layer.outputs(sx, &layer.theta), upstream)
    });
    let cfg_x = EsConfig {
        seed: seed_inputs,
        ..layer.es_inputs
    };
    let mut grad_x = es_gradient(&obj_x, &scaled, &cfg_x)?;
    for g in &mut grad_x {
        *g *= layer.input_scale;
    }
    Ok((grad_theta, grad_x))
}

/// Exact gradients of h via the parameter-shift rule, for oracle comparisons
/// and noise-free training runs. Input gradients require an encoder whose
/// inputs enter as rotation angles.
pub fn quantum_psr_backward(
    layer: &QuantumLayer,
    x: &[f64],
    upstream: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), NnError> {
    expect("quantum input", layer.in_dim(), x.len())?;
    expect("quantum upstream", layer.out_dim(), upstream.len())?;
    let scaled = layer.scaled(x);

    let obj_theta = FnObjective::new(layer.param_count(), |theta: &[f64]| {
        weighted(&layer.outputs(&scaled, theta), upstream)
    });
    let grad_theta = shift_gradient(&obj_theta, &layer.theta, FRAC_PI_2, 0.5);

    let factor = layer.encoder.angle_factor().ok_or(NnError::NoAngleFactor)?;
    let obj_x = FnObjective::new(layer.in_dim(), |sx: &[f64]| {
        weighted(&layer.outputs(sx, &layer.theta), upstream)
    });
    // Shifting input j by pi/(2 factor) shifts its rotation angle by pi/2.
    let mut grad_x = shift_gradient(&obj_x, &scaled, FRAC_PI_2 / factor, 0.5 * factor);
    for g in &mut grad_x {
        *g *= layer.input_scale;
    }
    Ok((grad_theta, grad_x))
}

fn weighted(outputs: &[f64], upstream: &[f64]) -> f64 {
    outputs.iter().zip(upstream).map(|(f, u)| f * u).sum()
}

/// (1/N) sum (y_j - target_j)^2.
pub fn mse_loss(y: &[f64], target: &[f64]) -> Result<f64, NnError> {
    expect("loss target", y.len(), target.len())?;
    let n = y.len() as f64;
    Ok(y.iter()
        .zip(target)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n)
}

/// d loss / d y = (2/N)(y - target).
pub fn mse_grad(y: &[f64], target: &[f64]) -> Result<Vec<f64>, NnError> {
    expect("loss target", y.len(), target.len())?;
    let n = y.len() as f64;
    Ok(y.iter().zip(target).map(|(a, b)| 2.0 * (a - b) / n).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimizerKind {
    Sgd,
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl OptimizerKind {
    pub fn adam_default() -> Self {
        OptimizerKind::Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Per-parameter-vector optimizer state. Adam keeps bias-corrected first and
/// second moments; SGD keeps nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub kind: OptimizerKind,
    pub eta: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl OptimizerState {
    pub fn new(kind: OptimizerKind, eta: f64, dim: usize) -> Self {
        let moments = match kind {
            OptimizerKind::Sgd => 0,
            OptimizerKind::Adam { .. } => dim,
        };
        OptimizerState {
            kind,
            eta,
            m: vec![0.0; moments],
            v: vec![0.0; moments],
            t: 0,
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match self.kind {
            OptimizerKind::Sgd => None,
            OptimizerKind::Adam { .. } => Some(self.m.len()),
        }
    }
}

pub fn optimizer_step(
    state: &mut OptimizerState,
    params: &mut [f64],
    grad: &[f64],
) -> Result<(), NnError> {
    expect("gradient", params.len(), grad.len())?;
    match state.kind {
        OptimizerKind::Sgd => {
            for (p, g) in params.iter_mut().zip(grad) {
                *p -= state.eta * g;
            }
        }
        OptimizerKind::Adam { beta1, beta2, epsilon } => {
            expect("optimizer moments", params.len(), state.m.len())?;
            state.t += 1;
            let bc1 = 1.0 - beta1.powi(state.t as i32);
            let bc2 = 1.0 - beta2.powi(state.t as i32);
            for i in 0..params.len() {
                let g = grad[i];
                state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g;
                state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g * g;
                let m_hat = state.m[i] / bc1;
                let v_hat = state.v[i] / bc2;
                params[i] -= state.eta * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
    }
    Ok(())
}

fn expect(what: &'static str, expected: usize, got: usize) -> Result<(), NnError> {
    if expected != got {
        return Err(NnError::Shape {
            what,
            expected,
            got,
        });
    }
    Ok(())
}
