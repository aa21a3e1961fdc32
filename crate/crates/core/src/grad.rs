//! Gradient estimation for parameterized circuits: the evolution-strategies
//! search gradient, the parameter-shift rule, and finite differences.
//!
//! The ES estimator treats the objective as a black box. It draws lambda
//! samples z_k ~ N(mu, sigma^2 I), evaluates the objective at every sample,
//! and combines them into
//!
//! ```text
//! grad ~= 1/(lambda sigma^2) * sum_k (z_k - mu) f(z_k)
//! ```
//!
//! which estimates the gradient of the Gaussian-smoothed objective
//! J(mu) = E[f(z)]. All samples are materialized before any evaluation, and
//! evaluations are combined in sample order, so a fixed seed gives bitwise
//! reproducible results regardless of thread scheduling.

use crate::seed::mix_seed;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GradError {
    #[error("sample count lambda must be at least 1")]
    ZeroLambda,
    #[error("mirrored sampling needs an even lambda, got {0}")]
    MirroredOddLambda(usize),
    #[error("sigma must be positive and finite, got {0}")]
    BadSigma(f64),
    #[error("point has dimension {got}, objective expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Black-box scalar objective over R^dim. `Sync` so sample evaluations can
/// run on worker threads.
pub trait Objective: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, z: &[f64]) -> f64;
}

/// Adapts a closure into an [`Objective`].
pub struct FnObjective<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnObjective<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnObjective { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Objective for FnObjective<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, z: &[f64]) -> f64 {
        (self.f)(z)
    }
}

/// Population size heuristic floor(4 + 3 ln(dim)).
pub fn rule_lambda(dim: usize) -> usize {
    assert!(dim > 0, "rule_lambda needs a positive dimension");
    (4.0 + 3.0 * (dim as f64).ln()).floor() as usize
}

/// Settings for one ES estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsConfig {
    pub sigma: f64,
    pub lambda: usize,
    pub seed: u64,
    /// Draw perturbations in +/- pairs. Requires even lambda.
    pub mirrored: bool,
}

impl EsConfig {
    pub fn validate(&self) -> Result<(), GradError> {
        if self.lambda == 0 {
            return Err(GradError::ZeroLambda);
        }
        if self.mirrored && self.lambda % 2 != 0 {
            return Err(GradError::MirroredOddLambda(self.lambda));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(GradError::BadSigma(self.sigma));
        }
        Ok(())
    }

    /// Copy of this config with a child seed derived from `tags`.
    pub fn reseeded(&self, tags: &[u64]) -> EsConfig {
        EsConfig {
            seed: mix_seed(self.seed, tags),
            ..*self
        }
    }
}

/// Perturbations sigma * eps_k in draw order. Mirrored pairs are exact
/// negations, so pair sums cancel bit-exactly.
fn draw_offsets(dim: usize, cfg: &EsConfig) -> Vec<Vec<f64>> {
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let n_fresh = if cfg.mirrored { cfg.lambda / 2 } else { cfg.lambda };
    let mut offsets = Vec::with_capacity(cfg.lambda);
    for _ in 0..n_fresh {
        let d: Vec<f64> = (0..dim)
            .map(|_| {
                let eps: f64 = StandardNormal.sample(&mut rng);
                cfg.sigma * eps
            })
            .collect();
        if cfg.mirrored {
            let neg = d.iter().map(|v| -v).collect();
            offsets.push(d);
            offsets.push(neg);
        } else {
            offsets.push(d);
        }
    }
    offsets
}

/// The lambda search points z_k = mu + sigma * eps_k, all materialized up
/// front. The same (mu, cfg) always yields the same points, which is what
/// lets a gradient estimate and a smoothed-objective estimate share noise.
pub fn gaussian_samples(mu: &[f64], cfg: &EsConfig) -> Result<Vec<Vec<f64>>, GradError> {
    cfg.validate()?;
    Ok(draw_offsets(mu.len(), cfg)
        .into_iter()
        .map(|d| d.iter().zip(mu).map(|(di, mi)| mi + di).collect())
        .collect())
}

/// Gradient of log N(z; mu, sigma^2 I) with respect to mu: (z - mu)/sigma^2.
pub fn log_derivative_mu(z: &[f64], mu: &[f64], sigma: f64) -> Vec<f64> {
    z.iter()
        .zip(mu)
        .map(|(zi, mi)| (zi - mi) / (sigma * sigma))
        .collect()
}

/// ES search-gradient estimate at `mu`.
pub fn es_gradient<O: Objective + ?Sized>(
    obj: &O,
    mu: &[f64],
    cfg: &EsConfig,
) -> Result<Vec<f64>, GradError> {
    cfg.validate()?;
    expect_dim(obj, mu)?;
    let offsets = draw_offsets(mu.len(), cfg);
    let points: Vec<Vec<f64>> = offsets
        .iter()
        .map(|d| d.iter().zip(mu).map(|(di, mi)| mi + di).collect())
        .collect();
    let values: Vec<f64> = points.par_iter().map(|z| obj.eval(z)).collect();

    let mut grad = vec![0.0; mu.len()];
    for (d, &f) in offsets.iter().zip(&values) {
        for (g, di) in grad.iter_mut().zip(d) {
            *g += di * f;
        }
    }
    let scale = 1.0 / (cfg.lambda as f64 * cfg.sigma * cfg.sigma);
    for g in &mut grad {
        *g *= scale;
    }
    Ok(grad)
}

/// Monte Carlo estimate of the smoothed objective J(mu) = E[f(z)], using the
/// same search points as [`es_gradient`] for the same config.
pub fn smoothed_objective<O: Objective + ?Sized>(
    obj: &O,
    mu: &[f64],
    cfg: &EsConfig,
) -> Result<f64, GradError> {
    expect_dim(obj, mu)?;
    let points = gaussian_samples(mu, cfg)?;
    let values: Vec<f64> = points.par_iter().map(|z| obj.eval(z)).collect();
    Ok(values.iter().sum::<f64>() / cfg.lambda as f64)
}

/// Parameter-shift gradient: component k is
/// [f(theta + pi/2 e_k) - f(theta - pi/2 e_k)] / 2. Exact for objectives
/// built from Ry rotations and measurement, up to float roundoff.
pub fn psr_gradient<O: Objective + ?Sized>(obj: &O, theta: &[f64]) -> Vec<f64> {
    shift_gradient(obj, theta, FRAC_PI_2, 0.5)
}

/// Central-difference gradient with step `h`.
pub fn fd_gradient<O: Objective + ?Sized>(obj: &O, theta: &[f64], h: f64) -> Vec<f64> {
    shift_gradient(obj, theta, h, 0.5 / h)
}

pub(crate) fn shift_gradient<O: Objective + ?Sized>(
    obj: &O,
    theta: &[f64],
    shift: f64,
    scale: f64,
) -> Vec<f64> {
    (0..theta.len())
        .into_par_iter()
        .map(|k| {
            let mut plus = theta.to_vec();
            let mut minus = theta.to_vec();
            plus[k] += shift;
            minus[k] -= shift;
            (obj.eval(&plus) - obj.eval(&minus)) * scale
        })
        .collect()
}

fn expect_dim<O: Objective + ?Sized>(obj: &O, point: &[f64]) -> Result<(), GradError> {
    if obj.dim() != point.len() {
        return Err(GradError::DimensionMismatch {
            expected: obj.dim(),
            got: point.len(),
        });
    }
    Ok(())
}
