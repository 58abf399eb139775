use crate::error::{Error, Result};
use crate::linalg::{self, Block};
use crate::solve::fbt_solve;
use crate::spectral::eig;
use crate::system::BlockTriSystem;

use super::{assemble_system, LinearGaussianModel};

#[derive(Debug, Clone)]
pub struct WoodburyResult {
    pub estimates: Vec<Block>,
    /// `Q + G Lambda^{-1} G^T` with its right-hand side `G Lambda^{-1} r`.
    pub intermediate: BlockTriSystem,
}

/// `Lambda_k^{-1}` for every step, failing when some `H_k^T R_k^{-1} H_k` is
/// singular.
fn meas_info_inverses(model: &LinearGaussianModel) -> Result<Vec<Block>> {
    let n = model.state_dim();
    (0..model.num_steps())
        .map(|k| {
            let singular = Error::MeasurementInfoSingular { k: k + 1 };
            if model.meas_dim(k) < n {
                return Err(singular);
            }
            let lam = model.meas_info(k);
            let (lo, hi) = eig::extreme_eigenvalues(&lam)?;
            if lo <= f64::EPSILON * n as f64 * hi {
                return Err(singular);
            }
            linalg::spd_inverse(&lam).ok_or(singular)
        })
        .collect()
}

/// The intermediate system in the unknown `w`:
///
/// ```text
/// diag_k = Q_k + Lambda_k^{-1} + G_k Lambda_{k-1}^{-1} G_k^T   (last term from k = 2)
/// sub_k  = -G_k Lambda_{k-1}^{-1}
/// rhs_k  = Lambda_k^{-1} r_k - G_k Lambda_{k-1}^{-1} r_{k-1}
/// ```
pub fn woodbury_system(
    model: &LinearGaussianModel,
    lam_inv: &[Block],
    r: &[Block],
) -> Result<BlockTriSystem> {
    let big_n = model.num_steps();
    let mut diag = Vec::with_capacity(big_n);
    let mut sub = Vec::with_capacity(big_n.saturating_sub(1));
    let mut rhs = Vec::with_capacity(big_n);
    for k in 0..big_n {
        let mut d = model.q(k) + &lam_inv[k];
        let mut rk = &lam_inv[k] * &r[k];
        if k > 0 {
            let gl = model.g(k) * &lam_inv[k - 1];
            d += &gl * model.g(k).transpose();
            rk -= &gl * &r[k - 1];
            sub.push(-gl);
        }
        diag.push(linalg::symmetrized(d));
        rhs.push(rk);
    }
    BlockTriSystem::new(diag, sub, rhs)
}

/// Solve the smoothing problem through the matrix inversion lemma
/// `(Lambda + G^T Q^{-1} G)^{-1} = Lambda^{-1} - Lambda^{-1} G^T (Q + G Lambda^{-1} G^T)^{-1} G Lambda^{-1}`,
/// which needs every `Lambda_k = H_k^T R_k^{-1} H_k` invertible. The
/// intermediate system is solved by forward elimination; then
/// `x_k = Lambda_k^{-1} (r_k - w_k + G_{k+1}^T w_{k+1})`.
pub fn woodbury_solve(model: &LinearGaussianModel) -> Result<WoodburyResult> {
    let lam_inv = meas_info_inverses(model)?;
    let r = assemble_system(model)?.rhs().to_vec();
    let intermediate = woodbury_system(model, &lam_inv, &r)?;
    let w = fbt_solve(&intermediate)?.e;
    let big_n = model.num_steps();
    let estimates = (0..big_n)
        .map(|k| {
            let mut v = &r[k] - &w[k];
            if k + 1 < big_n {
                v += model.g(k + 1).tr_mul(&w[k + 1]);
            }
            &lam_inv[k] * v
        })
        .collect();
    Ok(WoodburyResult {
        estimates,
        intermediate,
    })
}
