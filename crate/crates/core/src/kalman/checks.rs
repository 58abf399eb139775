use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Block};
use crate::solve::{bbt_solve, fbt_solve};
use crate::spectral::eig;
use crate::tolerances;

use super::{assemble_system, mayne_a_smoother, rts_smoother, LinearGaussianModel};

/// Largest relative mismatch of one identity over all steps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub which: String,
    pub max_rel: f64,
    /// 1-based step where `max_rel` occurs.
    pub worst_k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.checks.iter().all(|c| c.max_rel <= tol)
    }

    pub fn max_rel(&self) -> f64 {
        self.checks.iter().map(|c| c.max_rel).fold(0.0, f64::max)
    }

    /// First violated identity as an error.
    pub fn ensure(self, tol: f64) -> Result<Self> {
        if let Some(c) = self.checks.iter().find(|c| c.max_rel.is_nan() || c.max_rel > tol) {
            return Err(Error::IdentityViolation {
                k: c.worst_k,
                which: c.which.clone(),
                magnitude: c.max_rel,
            });
        }
        Ok(self)
    }
}

fn blockwise(which: &str, pairs: impl Iterator<Item = (Block, Block)>) -> IdentityCheck {
    let mut worst = IdentityCheck {
        which: which.to_string(),
        max_rel: 0.0,
        worst_k: 1,
    };
    for (k, (a, b)) in pairs.enumerate() {
        let rel = linalg::relative_block_diff(&a, &b);
        if rel.is_nan() || rel > worst.max_rel {
            worst.max_rel = rel;
            worst.worst_k = k + 1;
        }
    }
    worst
}

/// Compare the forward elimination of the assembled system with the filter:
/// `d_k^f = P_{k|k}^{-1} + G_{k+1}^T Q_{k+1}^{-1} G_{k+1}`, `s_k^f = y_{k|k}`,
/// `e_N = x_{N|N}`.
pub fn measure_rts_identities(model: &LinearGaussianModel) -> Result<IdentityReport> {
    let sys = assemble_system(model)?;
    let sol = fbt_solve(&sys)?;
    let fwd = sol.trace.forward.as_ref().expect("forward trace");
    let (_, filter) = rts_smoother(model)?;
    let big_n = model.num_steps();
    let d = blockwise(
        "d_forward",
        (0..big_n).map(|k| {
            let mut expected = filter[k].info_filt.clone();
            if k + 1 < big_n {
                let g = model.g(k + 1);
                expected += g.tr_mul(&model.q_solve(k + 1, g));
            }
            (fwd.d[k].clone(), expected)
        }),
    );
    let s = blockwise(
        "s_forward",
        (0..big_n).map(|k| (fwd.s[k].clone(), filter[k].y_filt.clone())),
    );
    let mut e_last = blockwise(
        "e_last",
        std::iter::once((sol.e[big_n - 1].clone(), filter[big_n - 1].x_filt.clone())),
    );
    e_last.worst_k = big_n;
    Ok(IdentityReport {
        checks: vec![d, s, e_last],
    })
}

/// [`measure_rts_identities`], failing on the first identity above tolerance.
pub fn rts_block_identities(model: &LinearGaussianModel) -> Result<IdentityReport> {
    measure_rts_identities(model)?.ensure(tolerances::IDENTITY)
}

/// Compare the backward elimination with Mayne's recursion:
/// `d_k^b = P_k + Q_k^{-1}`, `s_k^b = -phi_k` (plus `Q_1^{-1} x_0` at the first step).
pub fn measure_mayne_identities(model: &LinearGaussianModel) -> Result<IdentityReport> {
    let sys = assemble_system(model)?;
    let sol = bbt_solve(&sys)?;
    let bwd = sol.trace.backward.as_ref().expect("backward trace");
    let (_, mayne) = mayne_a_smoother(model)?;
    let big_n = model.num_steps();
    let d = blockwise(
        "d_backward",
        (0..big_n).map(|k| (bwd.d[k].clone(), &mayne[k].p + model.q_inv(k))),
    );
    let s = blockwise(
        "s_backward",
        (0..big_n).map(|k| {
            let mut expected = -&mayne[k].phi;
            if k == 0 {
                expected += model.q_solve(0, model.x0());
            }
            (bwd.s[k].clone(), expected)
        }),
    );
    Ok(IdentityReport { checks: vec![d, s] })
}

pub fn mayne_block_identities(model: &LinearGaussianModel) -> Result<IdentityReport> {
    measure_mayne_identities(model)?.ensure(tolerances::IDENTITY)
}

/// Conditioning of backward pivots on a Kalman-structured system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem8Report {
    /// Largest operator norm among all `Q_k`, `Q_k^{-1}`, `H_k^T R_k^{-1} H_k`, `G_k`.
    pub alpha: f64,
    /// `alpha^2 + alpha^6`.
    pub cond_bound: f64,
    pub max_backward_cond: f64,
    /// `min_k lambda_min(d_k^b - Q_k^{-1})`.
    pub min_psd_abs: f64,
    /// `min_k lambda_min(d_k^b - Q_k^{-1}) / ||d_k^b||`. Rounding in the
    /// elimination is proportional to `||b_k||`, so this can dip below zero by
    /// more than the absolute margin when `d_k^b` is much smaller than `b_k`.
    pub min_psd_rel: f64,
    pub psd_holds: bool,
    pub cond_holds: bool,
    /// Largest forward-pivot condition number, if forward elimination succeeds.
    pub max_forward_cond: Option<f64>,
}

pub fn theorem8_check(model: &LinearGaussianModel) -> Result<Theorem8Report> {
    let big_n = model.num_steps();
    let mut alpha: f64 = 0.0;
    for k in 0..big_n {
        alpha = alpha
            .max(eig::operator_norm(model.q(k))?)
            .max(eig::operator_norm(&model.q_inv(k))?)
            .max(eig::operator_norm(&model.meas_info(k))?)
            .max(eig::operator_norm(model.g(k))?);
    }
    let cond_bound = alpha.powi(2) + alpha.powi(6);

    let sys = assemble_system(model)?;
    let bwd = bbt_solve(&sys)?;
    let mut max_backward_cond: f64 = 1.0;
    let mut min_psd_abs = f64::INFINITY;
    let mut min_psd_rel = f64::INFINITY;
    for (k, d) in bwd.trace.backward.as_ref().expect("backward trace").d.iter().enumerate() {
        let (lo, hi) = eig::extreme_eigenvalues(d)?;
        max_backward_cond = max_backward_cond.max(eig::cond_from(lo, hi));
        let (gap_lo, _) = eig::extreme_eigenvalues(&linalg::symmetrized(d - model.q_inv(k)))?;
        min_psd_abs = min_psd_abs.min(gap_lo);
        min_psd_rel = min_psd_rel.min(gap_lo / hi);
    }
    let max_forward_cond = match fbt_solve(&sys) {
        Ok(sol) => Some(
            sol.trace
                .block_spectra()?
                .iter()
                .map(|s| s.cond)
                .fold(1.0, f64::max),
        ),
        Err(_) => None,
    };
    Ok(Theorem8Report {
        alpha,
        cond_bound,
        max_backward_cond,
        min_psd_abs,
        min_psd_rel,
        psd_holds: min_psd_abs >= -tolerances::PSD,
        cond_holds: max_backward_cond <= cond_bound,
        max_forward_cond,
    })
}
