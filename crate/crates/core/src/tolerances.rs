//! Numerical tolerances shared by the solvers, the oracles and the test suites.
//!
//! Every threshold used to decide pass/fail lives here so that the library,
//! the CLI and the acceptance tests agree on a single set of numbers.

/// Diagonal blocks must satisfy `max|b - b^T| <= SYMMETRY * max|b|`.
pub const SYMMETRY: f64 = 1e-12;

/// Residual slack: `||A e - r|| <= RESIDUAL * kappa * ||r||`.
pub const RESIDUAL: f64 = 1e-8;

/// Relative slack on eigenvalue containment, scaled by `max(1, lambda_max(A))`.
pub const EIG_CONTAINMENT: f64 = 1e-8;

/// Relative agreement between solvers/oracles, scaled by `kappa(A)`.
pub const AGREEMENT: f64 = 1e-8;

/// Trace identities (pivot blocks vs. filter quantities).
pub const IDENTITY: f64 = 1e-8;

/// Exact-in-theory block equalities (combined block vs. d^f / d^b at the ends).
pub const END_BLOCK: f64 = 1e-10;

/// Absolute PSD slack for `d_k^b - Q_k^{-1}`.
pub const PSD: f64 = 1e-10;

/// PQ identity relative tolerance.
pub const PQ_IDENTITY: f64 = 1e-9;

/// Stationarity: `||grad f|| <= STATIONARITY * ||rhs||`.
pub const STATIONARITY: f64 = 1e-6;

/// Finite-difference gradient check.
pub const FINITE_DIFFERENCE: f64 = 1e-5;

/// Largest dense matrix the eigensolver and `assemble_dense` will materialize.
pub const DENSE_CAP: usize = 4096;

/// Largest assembled size for which condition numbers are measured with the
/// dense eigensolver; above this a Gershgorin estimate is used.
pub const DENSE_KAPPA_CAP: usize = 512;

/// Slack applied to eigenvalue containment checks.
pub fn eig_slack(lambda_max: f64) -> f64 {
    EIG_CONTAINMENT * lambda_max.max(1.0)
}
