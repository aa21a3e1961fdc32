//! Finite-difference verification of the analytic and parameter-shift
//! backward passes, through single layers and whole models.

use esqnn_core::{
    build_model1, build_model2, linear_backward, linear_forward, model_backward, model_forward,
    mse_loss, Activation, GradMode, Layer, LayerGrad, LinearLayer, Matrix, Model,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Central difference of the model loss along one parameter of one layer.
fn fd_model_param(
    model: &Model,
    x: &[f64],
    target: &[f64],
    layer_idx: usize,
    param_idx: usize,
    h: f64,
) -> f64 {
    let loss_at = |delta: f64| {
        let mut m = model.clone();
        match &mut m.layers[layer_idx] {
            Layer::Quantum(q) => q.theta[param_idx] += delta,
            Layer::Linear(l) => {
                let w_len = l.w.as_slice().len();
                if param_idx < w_len {
                    l.w.as_mut_slice()[param_idx] += delta;
                } else {
                    l.b[param_idx - w_len] += delta;
                }
            }
        }
        let y = model_forward(&m, x).unwrap();
        mse_loss(&y, target).unwrap()
    };
    (loss_at(h) - loss_at(-h)) / (2.0 * h)
}

fn grad_component(grad: &LayerGrad, param_idx: usize) -> f64 {
    match grad {
        LayerGrad::Quantum { theta } => theta[param_idx],
        LayerGrad::Linear { w, b } => {
            let w_len = w.as_slice().len();
            if param_idx < w_len {
                w.as_slice()[param_idx]
            } else {
                b[param_idx - w_len]
            }
        }
    }
}

#[test]
fn model1_psr_gradient_matches_end_to_end_finite_differences() {
    let model = build_model1(0x77aa);
    let x: Vec<f64> = (0..15).map(|i| 0.21 * i as f64).collect();
    let target = [0.0, 1.0];
    let grads = model_backward(&model, &x, &target, GradMode::Psr).unwrap();

    for (layer_idx, (layer, grad)) in model.layers.iter().zip(&grads).enumerate() {
        for param_idx in 0..layer.param_count() {
            let fd = fd_model_param(&model, &x, &target, layer_idx, param_idx, 1e-4);
            let analytic = grad_component(grad, param_idx);
            assert!(
                (fd - analytic).abs() <= 1e-6,
                "layer {layer_idx} param {param_idx}: psr {analytic} vs fd {fd}"
            );
        }
    }
}

#[test]
fn model2_psr_gradient_matches_finite_differences() {
    let model = build_model2(0x2b);
    let mut rng = ChaCha12Rng::seed_from_u64(0xd00d);
    let x: Vec<f64> = (0..784).map(|_| rng.gen_range(0.0..1.0)).collect();
    let target = [1.0, 0.0];
    let grads = model_backward(&model, &x, &target, GradMode::Psr).unwrap();

    // Every middle/back parameter, plus a sample of the 3140 front ones.
    let mut picks: Vec<(usize, usize)> = Vec::new();
    for p in 0..model.layers[1].param_count() {
        picks.push((1, p));
    }
    for p in 0..model.layers[2].param_count() {
        picks.push((2, p));
    }
    for _ in 0..25 {
        picks.push((0, rng.gen_range(0..model.layers[0].param_count())));
    }

    for (layer_idx, param_idx) in picks {
        let fd = fd_model_param(&model, &x, &target, layer_idx, param_idx, 1e-4);
        let analytic = grad_component(&grads[layer_idx], param_idx);
        assert!(
            (fd - analytic).abs() <= 1e-6,
            "layer {layer_idx} param {param_idx}: psr {analytic} vs fd {fd}"
        );
    }
}

fn approx_vec(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn linear_backward_matches_fd_on_random_layers(
        n_in in 1usize..=8,
        n_out in 1usize..=8,
        seed in any::<u64>(),
        tanh in any::<bool>(),
    ) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let w = Matrix::from_fn(n_out, n_in, |_, _| rng.gen_range(-1.0..1.0));
        let b: Vec<f64> = (0..n_out).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let activation = if tanh { Activation::Tanh } else { Activation::Identity };
        let layer = LinearLayer::new(w, b, activation).unwrap();
        let x: Vec<f64> = (0..n_in).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let upstream: Vec<f64> = (0..n_out).map(|_| rng.gen_range(-1.0..1.0)).collect();

        let grad = linear_backward(&layer, &x, &upstream).unwrap();

        let h = 1e-6;
        let probe = |layer: &LinearLayer, x: &[f64]| -> f64 {
            linear_forward(layer, x)
                .unwrap()
                .iter()
                .zip(&upstream)
                .map(|(y, u)| y * u)
                .sum()
        };

        let mut fd_x = vec![0.0; n_in];
        for i in 0..n_in {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            fd_x[i] = (probe(&layer, &xp) - probe(&layer, &xm)) / (2.0 * h);
        }
        prop_assert!(approx_vec(&grad.x, &fd_x, 1e-5));

        let mut fd_b = vec![0.0; n_out];
        for i in 0..n_out {
            let mut lp = layer.clone();
            let mut lm = layer.clone();
            lp.b[i] += h;
            lm.b[i] -= h;
            fd_b[i] = (probe(&lp, &x) - probe(&lm, &x)) / (2.0 * h);
        }
        prop_assert!(approx_vec(&grad.b, &fd_b, 1e-5));

        let mut fd_w = vec![0.0; n_out * n_in];
        for i in 0..n_out * n_in {
            let mut lp = layer.clone();
            let mut lm = layer.clone();
            lp.w.as_mut_slice()[i] += h;
            lm.w.as_mut_slice()[i] -= h;
            fd_w[i] = (probe(&lp, &x) - probe(&lm, &x)) / (2.0 * h);
        }
        prop_assert!(approx_vec(grad.w.as_slice(), &fd_w, 1e-5));
    }
}
