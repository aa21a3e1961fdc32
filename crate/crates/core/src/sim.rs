//! Dense statevector simulation of few-qubit circuits.
//!
//! States are full complex amplitude vectors of length 2^n. Qubit 0 is the
//! most significant bit of the basis index, i.e. the top wire of a circuit
//! diagram: for n = 2, basis order is |00>, |01>, |10>, |11> and qubit 0
//! selects between the first and second half of the vector.
//!
//! Expectation values are exact (infinite-shot limit); there is no
//! measurement sampling and no noise model.

use num_complex::Complex64;
use thiserror::Error;

/// Hard cap on qubit count; 2^20 amplitudes is already 16 MiB.
pub const MAX_QUBITS: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("qubit count {0} outside supported range 1..={MAX_QUBITS}")]
    BadQubitCount(usize),
    #[error("qubit index {qubit} out of range for {n_qubits} qubits")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("cnot control and target are both qubit {0}")]
    ControlEqualsTarget(usize),
    #[error("basis index {index} out of range for {n_qubits} qubits")]
    BasisOutOfRange { index: usize, n_qubits: usize },
}

/// One gate in a circuit. Only the gates the models need are first-class;
/// arbitrary single-qubit unitaries go through [`StateVector::apply_one_qubit`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CircuitOp {
    /// Rotation about Y on one qubit: [[cos(a/2), -sin(a/2)], [sin(a/2), cos(a/2)]].
    Ry { qubit: usize, angle: f64 },
    /// Controlled NOT.
    Cnot { control: usize, target: usize },
}

impl CircuitOp {
    pub fn validate(&self, n_qubits: usize) -> Result<(), SimError> {
        let check = |q: usize| {
            if q < n_qubits {
                Ok(())
            } else {
                Err(SimError::QubitOutOfRange { qubit: q, n_qubits })
            }
        };
        match *self {
            CircuitOp::Ry { qubit, .. } => check(qubit),
            CircuitOp::Cnot { control, target } => {
                check(control)?;
                check(target)?;
                if control == target {
                    return Err(SimError::ControlEqualsTarget(control));
                }
                Ok(())
            }
        }
    }
}

/// Projector observable whose expectation value lies in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observable {
    /// |i><i| on the full register: the probability of one basis state.
    GlobalBasisProjector(usize),
    /// |0><0| on a single qubit, identity elsewhere: the probability of
    /// that qubit reading 0.
    LocalZeroProjector(usize),
}

/// Full complex amplitude vector over `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |0...0>: amplitude 1 at basis index 0.
    pub fn zero(n_qubits: usize) -> Result<Self, SimError> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(SimError::BadQubitCount(n_qubits));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    /// Build a state from raw amplitudes. The length must be a power of two;
    /// the caller is responsible for normalization.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, SimError> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(SimError::BadQubitCount(len.trailing_zeros() as usize));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(SimError::BadQubitCount(n_qubits));
        }
        Ok(StateVector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Bit mask selecting `qubit` inside a basis index (qubit 0 = MSB).
    fn mask(&self, qubit: usize) -> u64 {
        1u64 << (self.n_qubits - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<(), SimError> {
        if qubit < self.n_qubits {
            Ok(())
        } else {
            Err(SimError::QubitOutOfRange {
                qubit,
                n_qubits: self.n_qubits,
            })
        }
    }

    /// Apply an arbitrary single-qubit unitary `u` (row-major 2x2) to `qubit`.
    ///
    /// Escape hatch for gates outside the Ry/CNOT set, e.g. rotations about
    /// X or Z. Nothing in the bundled models uses it.
    pub fn apply_one_qubit(&mut self, qubit: usize, u: [[Complex64; 2]; 2]) -> Result<(), SimError> {
        self.check_qubit(qubit)?;
        let mask = self.mask(qubit) as usize;
        for base in 0..self.amps.len() {
            if base & mask != 0 {
                continue;
            }
            let partner = base | mask;
            let a0 = self.amps[base];
            let a1 = self.amps[partner];
            self.amps[base] = u[0][0] * a0 + u[0][1] * a1;
            self.amps[partner] = u[1][0] * a0 + u[1][1] * a1;
        }
        Ok(())
    }

    /// Ry rotation, kept purely real to dodge complex multiplies on the hot path.
    pub fn apply_ry(&mut self, qubit: usize, angle: f64) -> Result<(), SimError> {
        self.check_qubit(qubit)?;
        let (s, c) = (angle / 2.0).sin_cos();
        let mask = self.mask(qubit) as usize;
        for base in 0..self.amps.len() {
            if base & mask != 0 {
                continue;
            }
            let partner = base | mask;
            let a0 = self.amps[base];
            let a1 = self.amps[partner];
            self.amps[base] = c * a0 - s * a1;
            self.amps[partner] = s * a0 + c * a1;
        }
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<(), SimError> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(SimError::ControlEqualsTarget(control));
        }
        let cmask = self.mask(control) as usize;
        let tmask = self.mask(target) as usize;
        for base in 0..self.amps.len() {
            // Visit each affected pair once, from its target-0 member.
            if base & cmask != 0 && base & tmask == 0 {
                self.amps.swap(base, base | tmask);
            }
        }
        Ok(())
    }

    pub fn apply_op(&mut self, op: &CircuitOp) -> Result<(), SimError> {
        match *op {
            CircuitOp::Ry { qubit, angle } => self.apply_ry(qubit, angle),
            CircuitOp::Cnot { control, target } => self.apply_cnot(control, target),
        }
    }

    pub fn apply_all(&mut self, ops: &[CircuitOp]) -> Result<(), SimError> {
        for op in ops {
            self.apply_op(op)?;
        }
        Ok(())
    }

    /// Exact expectation value of a projector observable, in [0, 1].
    pub fn expectation(&self, obs: &Observable) -> Result<f64, SimError> {
        match *obs {
            Observable::GlobalBasisProjector(index) => {
                if index >= self.amps.len() {
                    return Err(SimError::BasisOutOfRange {
                        index,
                        n_qubits: self.n_qubits,
                    });
                }
                Ok(self.amps[index].norm_sqr())
            }
            Observable::LocalZeroProjector(qubit) => {
                self.check_qubit(qubit)?;
                let mask = self.mask(qubit) as usize;
                let mut p = 0.0;
                for (i, a) in self.amps.iter().enumerate() {
                    if i & mask == 0 {
                        p += a.norm_sqr();
                    }
                }
                Ok(p)
            }
        }
    }
}

/// Run `ops` on |0...0> over `n_qubits` qubits.
pub fn run_circuit(n_qubits: usize, ops: &[CircuitOp]) -> Result<StateVector, SimError> {
    let mut state = StateVector::zero(n_qubits)?;
    state.apply_all(ops)?;
    Ok(state)
}
