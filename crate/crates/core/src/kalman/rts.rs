use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{self, Block};

use super::LinearGaussianModel;

/// Per-step quantities of the forward information filter.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    pub p_pred: Block,
    pub x_pred: Block,
    pub y_pred: Block,
    /// `P_{k|k-1}^{-1}`.
    pub info_pred: Block,
    pub p_filt: Block,
    pub x_filt: Block,
    pub y_filt: Block,
    /// `P_{k|k}^{-1}`.
    pub info_filt: Block,
    /// Smoother gain `P_{k|k} G_{k+1}^T P_{k+1|k}^{-1}`; `None` at the last step.
    pub gain: Option<Block>,
}

fn spd_inv(m: &Block, k: usize, which: &'static str) -> Result<Block> {
    linalg::spd_inverse(&linalg::symmetrized(m.clone())).ok_or(Error::CovarianceNotPD { k: k + 1, which })
}

/// Rauch-Tung-Striebel smoother with an information-form measurement update.
///
/// Prediction is in covariance form (`P_{k|k-1} = G_k P_{k-1|k-1} G_k^T + Q_k`,
/// starting from the exactly known `x_0`), the update adds `H^T R^{-1} H` and
/// `H^T R^{-1} z` to the predicted information, and the backward pass applies
/// `x_{k|N} = x_{k|k} + C_k (x_{k+1|N} - x_{k+1|k})`.
pub fn rts_smoother(model: &LinearGaussianModel) -> Result<(Vec<Block>, Vec<FilterState>)> {
    let big_n = model.num_steps();
    let mut states: Vec<FilterState> = Vec::with_capacity(big_n);
    for k in 0..big_n {
        let (p_pred, x_pred) = match states.last() {
            None => (model.q(0).clone(), model.x0().clone()),
            Some(prev) => {
                let g = model.g(k);
                (
                    linalg::symmetrized(g * &prev.p_filt * g.transpose() + model.q(k)),
                    g * &prev.x_filt,
                )
            }
        };
        let info_pred = spd_inv(&p_pred, k, "predicted")?;
        let y_pred = &info_pred * &x_pred;
        let info_filt = linalg::symmetrized(&info_pred + model.meas_info(k));
        let y_filt = &y_pred + model.meas_vector(k);
        let p_filt = spd_inv(&info_filt, k, "filtered")?;
        let x_filt = &p_filt * &y_filt;
        states.push(FilterState {
            p_pred,
            x_pred,
            y_pred,
            info_pred,
            p_filt,
            x_filt,
            y_filt,
            info_filt,
            gain: None,
        });
    }

    let mut smoothed = vec![DMatrix::zeros(0, 0); big_n];
    smoothed[big_n - 1] = states[big_n - 1].x_filt.clone();
    for k in (0..big_n - 1).rev() {
        let gain = &states[k].p_filt * model.g(k + 1).transpose() * &states[k + 1].info_pred;
        smoothed[k] = &states[k].x_filt + &gain * (&smoothed[k + 1] - &states[k + 1].x_pred);
        states[k].gain = Some(gain);
    }
    Ok((smoothed, states))
}
