//! Encoders that map classical vectors to quantum states, and the layered
//! Ry/CNOT ansatz.
//!
//! Two encoder families exist: state preparations that place values directly
//! into amplitudes or product-state angles (wave function, dense angle, qubit
//! encoding), and circuit builders that emit Ry columns interleaved with CNOT
//! ladders (`input1`, `input2`). The ansatz repeats [Ry column, CNOT ladder]
//! blocks; parameters are ordered block-major, qubit-minor.

use crate::sim::{CircuitOp, StateVector};
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("input has dimension {got}, encoder expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("input dimension {dim} does not fit in {n_qubits} qubits (max {max})")]
    InputTooLarge { dim: usize, n_qubits: usize, max: usize },
    #[error("input dimension must be even and nonzero, got {0}")]
    OddDimension(usize),
    #[error("cannot encode the zero vector as amplitudes")]
    ZeroVector,
    #[error("parameter vector has length {got}, ansatz expects {expected}")]
    ParameterMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Sim(#[from] crate::sim::SimError),
}

/// How a classical vector enters the quantum register.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EncoderSpec {
    /// Amplitude placement x_i / ||x||, zero-padded to 2^n.
    WaveFunction { n_qubits: usize },
    /// Per-qubit pair (a, b) -> cos(pi a)|0> + e^{2 pi i b} sin(pi a)|1>.
    DenseAngle { n_qubits: usize },
    /// Per-qubit value a -> cos(a)|0> + sin(a)|1>.
    QubitEncoding { n_qubits: usize },
    /// `rounds` Ry columns with a CNOT ladder between consecutive columns.
    Input1 { n_qubits: usize, rounds: usize },
    /// One Ry column followed by one CNOT ladder.
    Input2 { n_qubits: usize },
}

impl EncoderSpec {
    pub fn n_qubits(&self) -> usize {
        match *self {
            EncoderSpec::WaveFunction { n_qubits }
            | EncoderSpec::DenseAngle { n_qubits }
            | EncoderSpec::QubitEncoding { n_qubits }
            | EncoderSpec::Input1 { n_qubits, .. }
            | EncoderSpec::Input2 { n_qubits } => n_qubits,
        }
    }

    /// Classical input dimension this encoder consumes.
    pub fn input_dim(&self) -> usize {
        match *self {
            EncoderSpec::WaveFunction { n_qubits } => 1 << n_qubits,
            EncoderSpec::DenseAngle { n_qubits } => 2 * n_qubits,
            EncoderSpec::QubitEncoding { n_qubits } => n_qubits,
            EncoderSpec::Input1 { n_qubits, rounds } => rounds * n_qubits,
            EncoderSpec::Input2 { n_qubits } => n_qubits,
        }
    }

    /// Radians of Ry rotation per unit of input, where the encoder is a pure
    /// Ry-angle map. `None` for encoders that are not single-Ry-per-input.
    ///
    /// Used by the parameter-shift rule to differentiate through the encoder.
    pub fn angle_factor(&self) -> Option<f64> {
        match *self {
            EncoderSpec::Input1 { .. } | EncoderSpec::Input2 { .. } => Some(1.0),
            // cos(a)|0> + sin(a)|1> = Ry(2a)|0>.
            EncoderSpec::QubitEncoding { .. } => Some(2.0),
            EncoderSpec::WaveFunction { .. } | EncoderSpec::DenseAngle { .. } => None,
        }
    }

    /// Encode `x` into a state on `self.n_qubits()` qubits.
    pub fn prepare(&self, x: &[f64]) -> Result<StateVector, CircuitError> {
        match *self {
            EncoderSpec::WaveFunction { n_qubits } => encode_wavefunction(x, n_qubits),
            EncoderSpec::DenseAngle { n_qubits } => {
                expect_dim(x, 2 * n_qubits)?;
                encode_dense_angle(x)
            }
            EncoderSpec::QubitEncoding { n_qubits } => {
                expect_dim(x, n_qubits)?;
                encode_qubit(x)
            }
            EncoderSpec::Input1 { n_qubits, rounds } => {
                let ops = build_input1(x, n_qubits, rounds)?;
                let mut state = StateVector::zero(n_qubits)?;
                state.apply_all(&ops)?;
                Ok(state)
            }
            EncoderSpec::Input2 { n_qubits } => {
                let ops = build_input2(x, n_qubits)?;
                let mut state = StateVector::zero(n_qubits)?;
                state.apply_all(&ops)?;
                Ok(state)
            }
        }
    }
}

/// Layered Ry/CNOT parameterization: `n_blocks` repetitions of
/// [Ry(theta) on every qubit, CNOT ladder 0->1, ..., n-2 -> n-1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnsatzSpec {
    pub n_qubits: usize,
    pub n_blocks: usize,
}

impl AnsatzSpec {
    pub fn new(n_qubits: usize, n_blocks: usize) -> Self {
        AnsatzSpec { n_qubits, n_blocks }
    }

    pub fn param_count(&self) -> usize {
        self.n_qubits * self.n_blocks
    }
}

fn expect_dim(x: &[f64], expected: usize) -> Result<(), CircuitError> {
    if x.len() != expected {
        return Err(CircuitError::DimensionMismatch {
            expected,
            got: x.len(),
        });
    }
    Ok(())
}

/// Amplitudes proportional to x, zero-padded to 2^n and normalized to unit
/// two-norm.
pub fn encode_wavefunction(x: &[f64], n_qubits: usize) -> Result<StateVector, CircuitError> {
    let max = 1usize << n_qubits;
    if x.is_empty() || x.len() > max {
        return Err(CircuitError::InputTooLarge {
            dim: x.len(),
            n_qubits,
            max,
        });
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(CircuitError::ZeroVector);
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); max];
    for (a, v) in amps.iter_mut().zip(x) {
        *a = Complex64::new(v / norm, 0.0);
    }
    StateVector::from_amplitudes(amps).map_err(Into::into)
}

/// Dense angle coding: consecutive pairs (x_{2i-1}, x_{2i}) map to one qubit
/// cos(pi x_{2i-1})|0> + e^{2 pi i x_{2i}} sin(pi x_{2i-1})|1>. The result
/// has x.len()/2 qubits.
pub fn encode_dense_angle(x: &[f64]) -> Result<StateVector, CircuitError> {
    if x.is_empty() || x.len() % 2 != 0 {
        return Err(CircuitError::OddDimension(x.len()));
    }
    let qubit_states: Vec<[Complex64; 2]> = x
        .chunks_exact(2)
        .map(|pair| {
            let (a, b) = (pair[0], pair[1]);
            let phase = Complex64::from_polar(1.0, 2.0 * PI * b);
            [
                Complex64::new((PI * a).cos(), 0.0),
                phase * (PI * a).sin(),
            ]
        })
        .collect();
    product_state(&qubit_states)
}

/// Qubit encoding: one value per qubit, cos(x_i)|0> + sin(x_i)|1>.
pub fn encode_qubit(x: &[f64]) -> Result<StateVector, CircuitError> {
    if x.is_empty() {
        return Err(CircuitError::DimensionMismatch { expected: 1, got: 0 });
    }
    let qubit_states: Vec<[Complex64; 2]> = x
        .iter()
        .map(|&v| {
            [
                Complex64::new(v.cos(), 0.0),
                Complex64::new(v.sin(), 0.0),
            ]
        })
        .collect();
    product_state(&qubit_states)
}

/// Tensor product of per-qubit states, qubit 0 first (most significant).
fn product_state(qubit_states: &[[Complex64; 2]]) -> Result<StateVector, CircuitError> {
    let n = qubit_states.len();
    let mut amps = vec![Complex64::new(1.0, 0.0)];
    for qs in qubit_states {
        let mut next = Vec::with_capacity(amps.len() * 2);
        for a in &amps {
            next.push(a * qs[0]);
            next.push(a * qs[1]);
        }
        amps = next;
    }
    debug_assert_eq!(amps.len(), 1 << n);
    StateVector::from_amplitudes(amps).map_err(Into::into)
}

fn ry_column(x: &[f64]) -> impl Iterator<Item = CircuitOp> + '_ {
    x.iter()
        .enumerate()
        .map(|(q, &angle)| CircuitOp::Ry { qubit: q, angle })
}

fn cnot_ladder(n_qubits: usize) -> impl Iterator<Item = CircuitOp> {
    (0..n_qubits.saturating_sub(1)).map(|q| CircuitOp::Cnot {
        control: q,
        target: q + 1,
    })
}

/// Multi-round angle encoder: `rounds` Ry columns with a CNOT ladder between
/// consecutive columns and none after the last. Consumes rounds * n values.
pub fn build_input1(
    x: &[f64],
    n_qubits: usize,
    rounds: usize,
) -> Result<Vec<CircuitOp>, CircuitError> {
    if rounds == 0 {
        return Err(CircuitError::DimensionMismatch {
            expected: n_qubits,
            got: 0,
        });
    }
    expect_dim(x, rounds * n_qubits)?;
    let mut ops = Vec::with_capacity(rounds * n_qubits + (rounds - 1) * (n_qubits - 1));
    for (r, column) in x.chunks_exact(n_qubits).enumerate() {
        if r > 0 {
            ops.extend(cnot_ladder(n_qubits));
        }
        ops.extend(ry_column(column));
    }
    Ok(ops)
}

/// Single-round angle encoder: one Ry column then one CNOT ladder.
pub fn build_input2(x: &[f64], n_qubits: usize) -> Result<Vec<CircuitOp>, CircuitError> {
    expect_dim(x, n_qubits)?;
    let mut ops: Vec<CircuitOp> = ry_column(x).collect();
    ops.extend(cnot_ladder(n_qubits));
    Ok(ops)
}

/// Parameterized ansatz: `spec.n_blocks` repetitions of [Ry column, ladder].
/// Block i uses theta[i*n .. (i+1)*n], qubit j within a block gets
/// theta[i*n + j].
pub fn build_ansatz(theta: &[f64], spec: &AnsatzSpec) -> Result<Vec<CircuitOp>, CircuitError> {
    if theta.len() != spec.param_count() {
        return Err(CircuitError::ParameterMismatch {
            expected: spec.param_count(),
            got: theta.len(),
        });
    }
    let n = spec.n_qubits;
    let mut ops = Vec::with_capacity(spec.n_blocks * (2 * n - 1));
    for block in theta.chunks_exact(n) {
        ops.extend(ry_column(block));
        ops.extend(cnot_ladder(n));
    }
    Ok(ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::run_circuit;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn count_ops(ops: &[CircuitOp]) -> (usize, usize) {
        let ry = ops.iter().filter(|o| matches!(o, CircuitOp::Ry { .. })).count();
        (ry, ops.len() - ry)
    }

    #[test]
    fn wavefunction_examples() {
        let s = encode_wavefunction(&[1.0, 0.0, 0.0, 0.0], 2).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].re, 1.0);

        let s = encode_wavefunction(&[1.0, 1.0, 1.0, 1.0], 2).unwrap();
        for a in s.amplitudes() {
            assert_abs_diff_eq!(a.re, 0.5, epsilon = 1e-12);
        }

        let s = encode_wavefunction(&[3.0, 4.0], 1).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].re, 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(s.amplitudes()[1].re, 0.8, epsilon = 1e-12);
    }

    #[test]
    fn wavefunction_pads_and_rejects() {
        let s = encode_wavefunction(&[1.0], 2).unwrap();
        assert_eq!(s.n_qubits(), 2);
        assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = 1e-12);
        assert!(matches!(
            encode_wavefunction(&[0.0, 0.0], 1),
            Err(CircuitError::ZeroVector)
        ));
        assert!(matches!(
            encode_wavefunction(&[1.0; 5], 2),
            Err(CircuitError::InputTooLarge { .. })
        ));
    }

    #[test]
    fn dense_angle_examples() {
        let s = encode_dense_angle(&[0.0, 0.25]).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.amplitudes()[1].norm(), 0.0, epsilon = 1e-12);

        let s = encode_dense_angle(&[0.5, 0.0]).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].re, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.amplitudes()[1].re, 1.0, epsilon = 1e-12);

        // Frozen from direct evaluation of the per-pair formula:
        // (cos(pi/4), e^{i pi/2} sin(pi/4)).
        let s = encode_dense_angle(&[0.25, 0.25]).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].re, 0.7071067811865476, epsilon = 1e-12);
        assert_abs_diff_eq!(s.amplitudes()[1].im, 0.7071067811865476, epsilon = 1e-12);
        assert_abs_diff_eq!(s.amplitudes()[1].re, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn dense_angle_rejects_odd_dims() {
        assert!(matches!(encode_dense_angle(&[0.1]), Err(CircuitError::OddDimension(1))));
        assert!(matches!(encode_dense_angle(&[]), Err(CircuitError::OddDimension(0))));
    }

    #[test]
    fn qubit_encoding_examples() {
        let s = encode_qubit(&[0.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].re, 1.0);

        let s = encode_qubit(&[FRAC_PI_2, FRAC_PI_2]).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[3].re, 1.0, epsilon = 1e-12);

        let s = encode_qubit(&[std::f64::consts::FRAC_PI_4]).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].re, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(s.amplitudes()[1].re, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn input1_gate_counts_match_figure() {
        let x = [0.0; 9];
        let ops = build_input1(&x, 3, 3).unwrap();
        assert_eq!(count_ops(&ops), (9, 4));

        // rounds=1 emits a bare Ry column, no ladder.
        let ops = build_input1(&[0.0, 0.0], 2, 1).unwrap();
        assert_eq!(count_ops(&ops), (2, 0));
    }

    #[test]
    fn input1_round_structure() {
        // Frozen from the dense-matrix oracle (tests/sim_oracle.rs): a pi
        // rotation on qubit 0 propagates through both ladder rungs.
        let x = [std::f64::consts::PI, 0.0, 0.0, 0.0, 0.0, 0.0];
        let ops = build_input1(&x, 3, 2).unwrap();
        let s = run_circuit(3, &ops).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[7].re.abs(), 1.0, epsilon = 1e-10);

        let ops = build_input1(&[0.0, 0.0], 2, 1).unwrap();
        let s = run_circuit(2, &ops).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn input1_rejects_bad_dims() {
        assert!(matches!(
            build_input1(&[0.0; 5], 3, 2),
            Err(CircuitError::DimensionMismatch { expected: 6, got: 5 })
        ));
        assert!(build_input1(&[], 3, 0).is_err());
    }

    #[test]
    fn input2_examples() {
        let ops = build_input2(&[0.0, 0.0, 0.0], 3).unwrap();
        assert_eq!(count_ops(&ops), (3, 2));
        let s = run_circuit(3, &ops).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].re, 1.0, epsilon = 1e-12);

        let ops = build_input2(&[FRAC_PI_2], 1).unwrap();
        assert_eq!(count_ops(&ops), (1, 0));
        let s = run_circuit(1, &ops).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].re, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(s.amplitudes()[1].re, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn ansatz_examples() {
        let spec = AnsatzSpec::new(2, 1);
        let s = run_circuit(2, &build_ansatz(&[0.0, 0.0], &spec).unwrap()).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].re, 1.0, epsilon = 1e-12);

        // Model 1 layer 1 shape: five qubits, four blocks.
        let spec = AnsatzSpec::new(5, 4);
        assert_eq!(spec.param_count(), 20);
        let ops = build_ansatz(&vec![0.1; 20], &spec).unwrap();
        assert_eq!(count_ops(&ops), (20, 16));

        // Single-qubit blocks compose rotations; no ladder exists.
        let spec = AnsatzSpec::new(1, 2);
        let s = run_circuit(1, &build_ansatz(&[FRAC_PI_2, FRAC_PI_2], &spec).unwrap()).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[1].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ansatz_rejects_wrong_parameter_count() {
        let spec = AnsatzSpec::new(3, 2);
        assert!(matches!(
            build_ansatz(&[0.0; 5], &spec),
            Err(CircuitError::ParameterMismatch { expected: 6, got: 5 })
        ));
    }

    #[test]
    fn gate_count_formulas() {
        for n in 2..=6 {
            for l in 1..=4 {
                let ops = build_input1(&vec![0.1; l * n], n, l).unwrap();
                assert_eq!(count_ops(&ops), (l * n, (l - 1) * (n - 1)));

                let spec = AnsatzSpec::new(n, l);
                let ops = build_ansatz(&vec![0.2; l * n], &spec).unwrap();
                assert_eq!(count_ops(&ops), (l * n, l * (n - 1)));
            }
            let ops = build_input2(&vec![0.3; n], n).unwrap();
            assert_eq!(count_ops(&ops), (n, n - 1));
        }
    }

    #[test]
    fn qubit_encoding_equals_double_angle_ry() {
        let x = [0.3, -0.7, 1.2];
        let direct = encode_qubit(&x).unwrap();
        let ops: Vec<CircuitOp> = x
            .iter()
            .enumerate()
            .map(|(q, &v)| CircuitOp::Ry { qubit: q, angle: 2.0 * v })
            .collect();
        let via_circuit = run_circuit(3, &ops).unwrap();
        for (a, b) in direct.amplitudes().iter().zip(via_circuit.amplitudes()) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn encoder_spec_dims() {
        assert_eq!(EncoderSpec::WaveFunction { n_qubits: 3 }.input_dim(), 8);
        assert_eq!(EncoderSpec::DenseAngle { n_qubits: 3 }.input_dim(), 6);
        assert_eq!(EncoderSpec::QubitEncoding { n_qubits: 3 }.input_dim(), 3);
        assert_eq!(EncoderSpec::Input1 { n_qubits: 5, rounds: 3 }.input_dim(), 15);
        assert_eq!(EncoderSpec::Input2 { n_qubits: 4 }.input_dim(), 4);
    }

    #[test]
    fn encoder_outputs_are_normalized() {
        let specs: Vec<(EncoderSpec, Vec<f64>)> = vec![
            (EncoderSpec::WaveFunction { n_qubits: 2 }, vec![1.0, -2.0, 0.5]),
            (EncoderSpec::DenseAngle { n_qubits: 2 }, vec![0.1, 0.2, 0.3, 0.4]),
            (EncoderSpec::QubitEncoding { n_qubits: 3 }, vec![0.5, 1.5, -0.2]),
            (EncoderSpec::Input1 { n_qubits: 3, rounds: 2 }, vec![0.1; 6]),
            (EncoderSpec::Input2 { n_qubits: 4 }, vec![0.7, 0.1, 0.9, 2.0]),
        ];
        for (spec, x) in specs {
            let s = spec.prepare(&x).unwrap();
            assert_eq!(s.n_qubits(), spec.n_qubits());
            assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = 1e-10);
        }
    }
}
