//! Verification oracles used by the test suites.
//!
//! Everything here recomputes results through a different route than the
//! main crate: circuits as explicit dense matrices built from Kronecker
//! products, Gaussian expectations by Gauss-Hermite quadrature instead of
//! Monte Carlo, and plain two-pass statistics. Slow and simple on purpose.

pub mod dense;
pub mod quad;
pub mod stats;
