//! Shared fixtures for the hot-path benchmarks: deterministic angle streams
//! and a circuit-expectation objective, so the benches need no RNG crate.

use std::f64::consts::PI;

use esqnn_core::circuits::{build_ansatz, AnsatzSpec, EncoderSpec};
use esqnn_core::grad::FnObjective;
use esqnn_core::sim::{CircuitOp, Observable};

/// Low-discrepancy angle sequence in [0, 2*pi); enough for benchmark inputs,
/// where distribution quality does not matter.
pub fn angles(count: usize, phase: f64) -> Vec<f64> {
    (0..count)
        .map(|k| (phase + k as f64 * 0.754_877_666) % 1.0 * 2.0 * PI)
        .collect()
}

/// A layered Ry/CNOT circuit on `n` qubits, the shape the trainer simulates.
pub fn ansatz_ops(n: usize, layers: usize) -> Vec<CircuitOp> {
    build_ansatz(&angles(n * layers, 0.21), &AnsatzSpec::new(n, layers)).unwrap()
}

/// Objective mapping ansatz parameters to the mean single-qubit ground-state
/// population after an angle-encoded input state.
pub fn circuit_objective(n: usize, layers: usize) -> FnObjective<impl Fn(&[f64]) -> f64 + Sync> {
    let x = angles(n, 0.47);
    FnObjective::new(n * layers, move |theta: &[f64]| {
        let mut state = EncoderSpec::Input2 { n_qubits: n }.prepare(&x).unwrap();
        state
            .apply_all(&build_ansatz(theta, &AnsatzSpec::new(n, layers)).unwrap())
            .unwrap();
        (0..n)
            .map(|q| state.expectation(&Observable::LocalZeroProjector(q)).unwrap())
            .sum::<f64>()
            / n as f64
    })
}
