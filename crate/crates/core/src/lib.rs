//! Solvers for symmetric positive-definite block tridiagonal systems and the
//! Kalman smoothing problems that produce them.
//!
//! Four elimination orders are provided ([`fbt_solve`], [`bbt_solve`],
//! [`twofilter_solve`], [`hybrid_solve`]), each returning the solution together
//! with a [`SolveTrace`] of its pivot blocks. The [`kalman`] module assembles
//! systems from linear-Gaussian state-space models and carries independent
//! classical smoother recursions; [`spectral`] checks eigenvalue bounds.

pub mod error;
pub mod kalman;
pub mod linalg;
pub mod report;
pub mod sim;
pub mod solve;
pub mod spectral;
pub mod system;
pub mod tolerances;
pub mod trace;

pub use error::{Error, Result, Stage};
pub use solve::{
    bbt_solve, fbt_solve, hybrid_solve, post_exchange_dense, twofilter_solve, Algorithm,
    BlockSolution,
};
pub use system::BlockTriSystem;
pub use trace::{Direction, SolveTrace};
