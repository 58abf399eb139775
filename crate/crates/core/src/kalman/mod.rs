//! Kalman smoothing as a block tridiagonal least-squares problem.
//!
//! [`assemble_system`] builds the normal equations of the MAP objective. The
//! classical recursions in [`rts`], [`mayne`] and [`woodbury`] never touch the
//! block solvers and serve as independent references for them.

mod checks;
mod mayne;
mod model;
mod rts;
mod woodbury;

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

pub use checks::{
    mayne_block_identities, measure_mayne_identities, measure_rts_identities,
    rts_block_identities, theorem8_check, IdentityCheck, IdentityReport, Theorem8Report,
};
pub use mayne::{
    mayne_a_smoother, mf_smoother, pq_identity_check, pq_identity_residual, MayneState,
};
pub use model::{LinearGaussianModel, ModelDoc};
pub use rts::{rts_smoother, FilterState};
pub use woodbury::{woodbury_solve, woodbury_system, WoodburyResult};

use crate::error::{Error, Result};
use crate::linalg::{self, Block};
use crate::system::BlockTriSystem;

/// Normal equations of the smoothing problem:
///
/// ```text
/// D_k = Q_k^{-1} + G_{k+1}^T Q_{k+1}^{-1} G_{k+1} + H_k^T R_k^{-1} H_k   (no G_{N+1} term)
/// A_k = -Q_k^{-1} G_k                                                  (k >= 2)
/// r_k = H_k^T R_k^{-1} z_k  (+ Q_1^{-1} x_0 at k = 1)
/// ```
pub fn assemble_system(model: &LinearGaussianModel) -> Result<BlockTriSystem> {
    let big_n = model.num_steps();
    let mut diag = Vec::with_capacity(big_n);
    let mut sub = Vec::with_capacity(big_n.saturating_sub(1));
    let mut rhs = Vec::with_capacity(big_n);
    for k in 0..big_n {
        let mut d = model.q_inv(k) + model.meas_info(k);
        if k + 1 < big_n {
            let g = model.g(k + 1);
            d += g.tr_mul(&model.q_solve(k + 1, g));
        }
        diag.push(linalg::symmetrized(d));
        if k > 0 {
            sub.push(-model.q_solve(k, model.g(k)));
        }
        let mut r = model.meas_vector(k);
        if k == 0 {
            r += model.q_solve(0, model.x0());
        }
        rhs.push(r);
    }
    BlockTriSystem::new(diag, sub, rhs)
}

fn check_states(model: &LinearGaussianModel, x: &[Block]) -> Result<()> {
    if x.len() != model.num_steps() || x.iter().any(|b| b.shape() != (model.state_dim(), 1)) {
        return Err(Error::DimensionMismatch(format!(
            "expected {} state vectors of length {}",
            model.num_steps(),
            model.state_dim()
        )));
    }
    Ok(())
}

/// Process residual `x_k - G_k x_{k-1}` with `x_0` for the first step.
fn process_residual(model: &LinearGaussianModel, x: &[Block], k: usize) -> Block {
    let prev = if k == 0 { model.x0() } else { &x[k - 1] };
    &x[k] - model.g(k) * prev
}

/// MAP objective
/// `f(x) = sum_k 1/2 |z_k - H_k x_k|^2_{R_k^{-1}} + 1/2 |x_k - G_k x_{k-1}|^2_{Q_k^{-1}}`.
pub fn objective(model: &LinearGaussianModel, x: &[Block]) -> Result<f64> {
    check_states(model, x)?;
    let mut f = 0.0;
    for k in 0..model.num_steps() {
        if model.meas_dim(k) > 0 {
            let v = model.z(k) - model.h(k) * &x[k];
            f += 0.5 * v.dot(&model.r_solve(k, &v));
        }
        let w = process_residual(model, x, k);
        f += 0.5 * w.dot(&model.q_solve(k, &w));
    }
    Ok(f)
}

/// Gradient of [`objective`], built term by term from the residuals rather
/// than from the assembled matrix.
pub fn objective_gradient(model: &LinearGaussianModel, x: &[Block]) -> Result<Vec<Block>> {
    check_states(model, x)?;
    let big_n = model.num_steps();
    let weighted: Vec<Block> = (0..big_n)
        .map(|k| model.q_solve(k, &process_residual(model, x, k)))
        .collect();
    Ok((0..big_n)
        .map(|k| {
            let mut grad = weighted[k].clone();
            if k + 1 < big_n {
                grad -= model.g(k + 1).tr_mul(&weighted[k + 1]);
            }
            if model.meas_dim(k) > 0 {
                let v = model.z(k) - model.h(k) * &x[k];
                grad -= model.h(k).tr_mul(&model.r_solve(k, &v));
            }
            grad
        })
        .collect())
}

/// Stack state estimates (each `n x 1`) into an `N x n` matrix, one row per step.
pub fn estimates_matrix(x: &[Block]) -> DMatrix<f64> {
    let n = x.first().map_or(0, |b| b.nrows());
    DMatrix::from_fn(x.len(), n, |k, i| x[k][(i, 0)])
}

/// CSV with columns `k,x1,...,xn`.
pub fn write_estimates_csv<W: Write>(x: &[Block], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let n = x.first().map_or(0, |b| b.nrows());
    let mut header = vec!["k".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    w.write_record(&header)?;
    for (k, xk) in x.iter().enumerate() {
        let mut row = vec![(k + 1).to_string()];
        row.extend(xk.iter().map(|&v| linalg::fmt_shortest(v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_estimates_csv(x: &[Block], path: impl AsRef<Path>) -> Result<()> {
    write_estimates_csv(x, std::fs::File::create(path)?)
}
