//! Cross-checks the in-place simulator against the dense Kronecker-product
//! oracle, from single gates up to whole models.

use esqnn_core::{
    build_model1, model_forward, quantum_forward, AnsatzSpec, CircuitOp, EncoderSpec, Layer,
    Observable, QuantumLayer, StateVector,
};
use esqnn_testkit::dense;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::f64::consts::TAU;

fn random_circuit(rng: &mut impl Rng, n_qubits: usize, max_gates: usize) -> Vec<CircuitOp> {
    let n_gates = rng.gen_range(1..=max_gates);
    (0..n_gates)
        .map(|_| {
            if n_qubits > 1 && rng.gen_bool(0.4) {
                let control = rng.gen_range(0..n_qubits);
                let mut target = rng.gen_range(0..n_qubits);
                while target == control {
                    target = rng.gen_range(0..n_qubits);
                }
                CircuitOp::Cnot { control, target }
            } else {
                CircuitOp::Ry {
                    qubit: rng.gen_range(0..n_qubits),
                    angle: rng.gen_range(0.0..TAU),
                }
            }
        })
        .collect()
}

fn max_amp_error(fast: &StateVector, slow: &[Complex64]) -> f64 {
    fast.amplitudes()
        .iter()
        .zip(slow)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

#[test]
fn random_circuits_match_dense_oracle() {
    let mut rng = ChaCha12Rng::seed_from_u64(0xc1bc);
    for trial in 0..50 {
        let n_qubits = rng.gen_range(2..=4);
        let ops = random_circuit(&mut rng, n_qubits, 16);
        let fast = esqnn_core::run_circuit(n_qubits, &ops).unwrap();
        let slow = dense::run_circuit_dense(n_qubits, &ops);
        let err = max_amp_error(&fast, &slow);
        assert!(err <= 1e-10, "trial {trial}: max amplitude error {err}");
        assert!((fast.norm_sqr() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn expectations_match_dense_oracle() {
    let mut rng = ChaCha12Rng::seed_from_u64(0xe4);
    for _ in 0..20 {
        let n_qubits = rng.gen_range(2..=4);
        let ops = random_circuit(&mut rng, n_qubits, 12);
        let fast = esqnn_core::run_circuit(n_qubits, &ops).unwrap();
        let slow = dense::run_circuit_dense(n_qubits, &ops);
        let mut observables: Vec<Observable> =
            (0..n_qubits).map(Observable::LocalZeroProjector).collect();
        observables.push(Observable::GlobalBasisProjector(
            rng.gen_range(0..1usize << n_qubits),
        ));
        for obs in &observables {
            let want =
                dense::expectation_dense(&slow, &dense::observable_matrix(n_qubits, obs));
            let got = fast.expectation(obs).unwrap();
            assert!((got - want).abs() <= 1e-10, "{obs:?}: {got} vs {want}");
        }
    }
}

#[test]
fn encoder_circuits_match_dense_oracle() {
    let mut rng = ChaCha12Rng::seed_from_u64(0x10c0de);
    for _ in 0..10 {
        let x: Vec<f64> = (0..6).map(|_| rng.gen_range(0.0..TAU)).collect();
        let ops = esqnn_core::build_input1(&x, 3, 2).unwrap();
        let prepared = EncoderSpec::Input1 {
            n_qubits: 3,
            rounds: 2,
        }
        .prepare(&x)
        .unwrap();
        let slow = dense::run_circuit_dense(3, &ops);
        assert!(max_amp_error(&prepared, &slow) <= 1e-10);

        let ops = esqnn_core::build_input2(&x[..4], 4).unwrap();
        let prepared = EncoderSpec::Input2 { n_qubits: 4 }.prepare(&x[..4]).unwrap();
        let slow = dense::run_circuit_dense(4, &ops);
        assert!(max_amp_error(&prepared, &slow) <= 1e-10);
    }
}

/// Dense-route forward pass for one quantum layer.
fn dense_layer_forward(layer: &QuantumLayer, x: &[f64]) -> Vec<f64> {
    let scaled: Vec<f64> = x.iter().map(|v| v * layer.input_scale).collect();
    let n = layer.ansatz.n_qubits;
    let encode_ops = match layer.encoder {
        EncoderSpec::Input1 { n_qubits, rounds } => {
            esqnn_core::build_input1(&scaled, n_qubits, rounds).unwrap()
        }
        EncoderSpec::Input2 { n_qubits } => esqnn_core::build_input2(&scaled, n_qubits).unwrap(),
        _ => panic!("dense route only covers circuit encoders"),
    };
    let mut state = dense::run_circuit_dense(n, &encode_ops);
    let ansatz_ops = esqnn_core::build_ansatz(&layer.theta, &layer.ansatz).unwrap();
    state = dense::apply_ops_dense(n, &ansatz_ops, &state);
    layer
        .observables
        .iter()
        .map(|obs| dense::expectation_dense(&state, &dense::observable_matrix(n, obs)))
        .collect()
}

#[test]
fn quantum_layer_forward_matches_dense_oracle() {
    // The shape of the second layer of the two-quantum-layer model: three
    // qubits, four ansatz blocks, two local measurements.
    let mut rng = ChaCha12Rng::seed_from_u64(0x51ab);
    let layer = QuantumLayer::new(
        EncoderSpec::Input2 { n_qubits: 3 },
        AnsatzSpec::new(3, 4),
        (0..12).map(|_| rng.gen_range(0.0..TAU)).collect(),
        vec![
            Observable::LocalZeroProjector(1),
            Observable::LocalZeroProjector(2),
        ],
        esqnn_core::EsConfig {
            sigma: 0.1,
            lambda: 8,
            seed: 0,
            mirrored: false,
        },
        esqnn_core::EsConfig {
            sigma: 0.1,
            lambda: 8,
            seed: 0,
            mirrored: false,
        },
    )
    .unwrap();
    for _ in 0..5 {
        let x: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..TAU)).collect();
        let fast = quantum_forward(&layer, &x).unwrap();
        let slow = dense_layer_forward(&layer, &x);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        }
    }
}

#[test]
fn model1_forward_matches_composed_dense_oracle() {
    let model = build_model1(0xfeed);
    let mut rng = ChaCha12Rng::seed_from_u64(0xf00);
    for _ in 0..3 {
        let x: Vec<f64> = (0..15).map(|_| rng.gen_range(0.0..std::f64::consts::PI)).collect();
        let fast = model_forward(&model, &x).unwrap();

        let mut v = x.clone();
        for layer in &model.layers {
            let q = match layer {
                Layer::Quantum(q) => q,
                Layer::Linear(_) => panic!("model 1 is all-quantum"),
            };
            v = dense_layer_forward(q, &v);
        }
        assert_eq!(fast.len(), v.len());
        for (a, b) in fast.iter().zip(&v) {
            assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        }
    }
}
