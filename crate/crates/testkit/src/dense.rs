//! Dense-matrix circuit evaluation. Gates become full 2^n x 2^n matrices via
//! Kronecker products and states are multiplied through them, with qubit 0 as
//! the leftmost (most significant) tensor factor.

use esqnn_core::sim::{CircuitOp, Observable};
use num_complex::Complex64;

pub type DMat = Vec<Vec<Complex64>>;

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn cone() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

pub fn identity(dim: usize) -> DMat {
    let mut m = vec![vec![czero(); dim]; dim];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = cone();
    }
    m
}

pub fn kron(a: &DMat, b: &DMat) -> DMat {
    let (ra, ca) = (a.len(), a[0].len());
    let (rb, cb) = (b.len(), b[0].len());
    let mut m = vec![vec![czero(); ca * cb]; ra * rb];
    for i in 0..ra {
        for j in 0..ca {
            for k in 0..rb {
                for l in 0..cb {
                    m[i * rb + k][j * cb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    m
}

pub fn matvec(m: &DMat, v: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn ry_matrix(theta: f64) -> DMat {
    let (s, c) = (theta / 2.0).sin_cos();
    vec![
        vec![Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
        vec![Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    ]
}

fn pauli_x() -> DMat {
    vec![vec![czero(), cone()], vec![cone(), czero()]]
}

fn proj(bit: usize) -> DMat {
    let mut m = vec![vec![czero(); 2]; 2];
    m[bit][bit] = cone();
    m
}

/// Kronecker chain with `factors[q]` at qubit position q, qubit 0 leftmost.
fn chain(factors: &[DMat]) -> DMat {
    let mut m = vec![vec![cone()]];
    for f in factors {
        m = kron(&m, f);
    }
    m
}

/// `gate` acting on one qubit, identity elsewhere.
pub fn single_qubit_full(n_qubits: usize, qubit: usize, gate: &DMat) -> DMat {
    let factors: Vec<DMat> = (0..n_qubits)
        .map(|q| if q == qubit { gate.clone() } else { identity(2) })
        .collect();
    chain(&factors)
}

/// CNOT as |0><0|_c (x) I + |1><1|_c (x) X_t, each term a Kronecker chain.
pub fn cnot_full(n_qubits: usize, control: usize, target: usize) -> DMat {
    let term = |ctrl_proj: DMat, tgt: DMat| -> DMat {
        let factors: Vec<DMat> = (0..n_qubits)
            .map(|q| {
                if q == control {
                    ctrl_proj.clone()
                } else if q == target {
                    tgt.clone()
                } else {
                    identity(2)
                }
            })
            .collect();
        chain(&factors)
    };
    let a = term(proj(0), identity(2));
    let b = term(proj(1), pauli_x());
    a.iter()
        .zip(&b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
        .collect()
}

pub fn op_matrix(n_qubits: usize, op: &CircuitOp) -> DMat {
    match *op {
        CircuitOp::Ry { qubit, angle } => single_qubit_full(n_qubits, qubit, &ry_matrix(angle)),
        CircuitOp::Cnot { control, target } => cnot_full(n_qubits, control, target),
    }
}

pub fn observable_matrix(n_qubits: usize, obs: &Observable) -> DMat {
    match *obs {
        Observable::GlobalBasisProjector(i) => {
            let dim = 1 << n_qubits;
            let mut m = vec![vec![czero(); dim]; dim];
            m[i][i] = cone();
            m
        }
        Observable::LocalZeroProjector(q) => single_qubit_full(n_qubits, q, &proj(0)),
    }
}

pub fn apply_ops_dense(n_qubits: usize, ops: &[CircuitOp], state: &[Complex64]) -> Vec<Complex64> {
    let mut v = state.to_vec();
    for op in ops {
        v = matvec(&op_matrix(n_qubits, op), &v);
    }
    v
}

pub fn run_circuit_dense(n_qubits: usize, ops: &[CircuitOp]) -> Vec<Complex64> {
    let mut state = vec![czero(); 1 << n_qubits];
    state[0] = cone();
    apply_ops_dense(n_qubits, ops, &state)
}

/// <v| M |v>, returned as the real part.
pub fn expectation_dense(state: &[Complex64], m: &DMat) -> f64 {
    let mv = matvec(m, state);
    state
        .iter()
        .zip(&mv)
        .map(|(a, b)| a.conj() * b)
        .sum::<Complex64>()
        .re
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn assert_close(a: f64, b: f64) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn kron_of_identities() {
        let m = kron(&identity(2), &identity(2));
        assert_eq!(m, identity(4));
    }

    #[test]
    fn ry_pi_flips() {
        let v = run_circuit_dense(1, &[CircuitOp::Ry { qubit: 0, angle: PI }]);
        assert_close(v[0].re, 0.0);
        assert_close(v[1].re, 1.0);
    }

    #[test]
    fn bell_state() {
        let ops = [
            CircuitOp::Ry { qubit: 0, angle: FRAC_PI_2 },
            CircuitOp::Cnot { control: 0, target: 1 },
        ];
        let v = run_circuit_dense(2, &ops);
        assert_close(v[0].re, FRAC_1_SQRT_2);
        assert_close(v[3].re, FRAC_1_SQRT_2);
        assert_close(v[1].norm(), 0.0);
        assert_close(v[2].norm(), 0.0);
    }

    #[test]
    fn qubit_zero_is_most_significant() {
        // Flipping qubit 0 of three must land on index 4 = 0b100.
        let v = run_circuit_dense(3, &[CircuitOp::Ry { qubit: 0, angle: PI }]);
        assert_close(v[4].re.abs(), 1.0);
    }

    #[test]
    fn projector_expectations() {
        let ops = [CircuitOp::Ry { qubit: 0, angle: FRAC_PI_2 }];
        let v = run_circuit_dense(2, &ops);
        let local = observable_matrix(2, &Observable::LocalZeroProjector(0));
        assert_close(expectation_dense(&v, &local), 0.5);
        let global = observable_matrix(2, &Observable::GlobalBasisProjector(2));
        assert_close(expectation_dense(&v, &global), 0.5);
        let untouched = observable_matrix(2, &Observable::LocalZeroProjector(1));
        assert_close(expectation_dense(&v, &untouched), 1.0);
    }

    #[test]
    fn cnot_reversed_control() {
        let ops = [
            CircuitOp::Ry { qubit: 1, angle: PI },
            CircuitOp::Cnot { control: 1, target: 0 },
        ];
        let v = run_circuit_dense(2, &ops);
        assert_close(v[3].re.abs(), 1.0);
    }
}
