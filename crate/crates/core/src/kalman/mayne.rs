use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{self, Block};

use super::{rts_smoother, LinearGaussianModel};

/// Per-step quantities of Mayne's backward information recursion.
#[derive(Debug, Clone, PartialEq)]
pub struct MayneState {
    /// Backward information matrix `P_k` (data from steps `k..N`).
    pub p: Block,
    /// `(I + C_k^T P_k C_k)^{-1}`.
    pub delta: Block,
    /// Backward information vector `phi_k`.
    pub phi: Block,
    /// Lower Cholesky factor `C_k` of `Q_k`.
    pub q_chol: Block,
}

/// Mayne's Algorithm A.
///
/// Backward pass, starting from `P_N = H_N^T R_N^{-1} H_N`, `phi_N = -H_N^T R_N^{-1} z_N`:
///
/// ```text
/// Delta_k = (I + C_k^T P_k C_k)^{-1}
/// P_k     = G_{k+1}^T (P_{k+1} - P_{k+1} C_{k+1} Delta_{k+1} C_{k+1}^T P_{k+1}) G_{k+1} + H_k^T R_k^{-1} H_k
/// phi_k   = -H_k^T R_k^{-1} z_k + G_{k+1}^T (I - P_{k+1} C_{k+1} Delta_{k+1} C_{k+1}^T) phi_{k+1}
/// ```
///
/// Forward pass from `x_0`: `x_k = C_k Delta_k (C_k^{-1} G_k x_{k-1} - C_k^T phi_k)`.
pub fn mayne_a_smoother(model: &LinearGaussianModel) -> Result<(Vec<Block>, Vec<MayneState>)> {
    let big_n = model.num_steps();
    let n = model.state_dim();
    let eye = DMatrix::<f64>::identity(n, n);

    let mut rev: Vec<MayneState> = Vec::with_capacity(big_n);
    for k in (0..big_n).rev() {
        let q_chol = model.q_factor(k).l();
        let (p, phi) = match rev.last() {
            None => (model.meas_info(k), -model.meas_vector(k)),
            Some(next) => {
                let g = model.g(k + 1);
                // P C Delta C^T for the following step
                let pcdc = &next.p * &next.q_chol * &next.delta * next.q_chol.transpose();
                let reduced = &next.p - &pcdc * &next.p;
                let p = linalg::symmetrized(g.tr_mul(&(reduced * g)) + model.meas_info(k));
                let phi = -model.meas_vector(k) + g.tr_mul(&((&eye - pcdc) * &next.phi));
                (p, phi)
            }
        };
        let inner = linalg::symmetrized(&eye + q_chol.tr_mul(&(&p * &q_chol)));
        let delta = linalg::spd_inverse(&inner).ok_or(Error::CombinedNotPD { k: k + 1 })?;
        rev.push(MayneState {
            p,
            delta,
            phi,
            q_chol,
        });
    }
    rev.reverse();
    let states = rev;

    let mut x = Vec::with_capacity(big_n);
    for (k, st) in states.iter().enumerate() {
        let prev = if k == 0 { model.x0() } else { &x[k - 1] };
        let l = st.q_chol.clone();
        let scaled = l
            .solve_lower_triangular(&(model.g(k) * prev))
            .ok_or(Error::CovarianceNotPD { k: k + 1, which: "process" })?;
        let xk = &l * &st.delta * (scaled - l.tr_mul(&st.phi));
        x.push(xk);
    }
    Ok((x, states))
}

/// Two-filter smoother: combine the forward predicted information
/// `(P_{k|k-1}^{-1}, y_{k|k-1})` from the filter with the backward information
/// `(P_k, phi_k)` from Mayne's recursion,
/// `x_k = (P_k + P_{k|k-1}^{-1})^{-1} (y_{k|k-1} - phi_k)`.
pub fn mf_smoother(model: &LinearGaussianModel) -> Result<Vec<Block>> {
    let (_, filter) = rts_smoother(model)?;
    let (_, backward) = mayne_a_smoother(model)?;
    filter
        .iter()
        .zip(&backward)
        .enumerate()
        .map(|(k, (f, b))| {
            let combined = linalg::symmetrized(&b.p + &f.info_pred);
            let fac = linalg::try_factor(&combined).ok_or(Error::CombinedNotPD { k: k + 1 })?;
            Ok(fac.solve(&(&f.y_pred - &b.phi)))
        })
        .collect()
}

/// Relative mismatch between the two sides of
/// `P - P (Q^{-1} + P)^{-1} P = Q^{-1} - Q^{-1} (Q^{-1} + P)^{-1} Q^{-1}`.
pub fn pq_identity_residual(p: &Block, q: &Block) -> Result<f64> {
    if !p.is_square() || p.shape() != q.shape() {
        return Err(Error::DimensionMismatch(format!(
            "P is {:?}, Q is {:?}",
            p.shape(),
            q.shape()
        )));
    }
    let invert = |m: &Block| -> Result<Block> {
        let lu = m.clone().lu();
        let inv = lu.try_inverse().ok_or(Error::SingularInput)?;
        if !inv.iter().all(|v| v.is_finite()) {
            return Err(Error::SingularInput);
        }
        Ok(inv)
    };
    invert(p)?;
    let q_inv = invert(q)?;
    let s = invert(&(&q_inv + p))?;
    let lhs = p - p * &s * p;
    let rhs = &q_inv - &q_inv * &s * &q_inv;
    Ok(linalg::relative_block_diff(&lhs, &rhs))
}

pub fn pq_identity_check(p: &Block, q: &Block) -> Result<bool> {
    Ok(pq_identity_residual(p, q)? <= crate::tolerances::PQ_IDENTITY)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pq_identity_at_identity() {
        let i = DMatrix::<f64>::identity(3, 3);
        assert!(pq_identity_check(&i, &i).unwrap());
    }

    #[test]
    fn pq_identity_scalar_closed_form() {
        let (p, q): (f64, f64) = (2.0, 0.25);
        let lhs = p - p * p / (1.0 / q + p);
        let rhs = 1.0 / q - (1.0 / (q * q)) / (1.0 / q + p);
        assert!((lhs - rhs).abs() < 1e-12);
        let p = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 3.0]));
        let q = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.25, 4.0]));
        assert!(pq_identity_check(&p, &q).unwrap());
    }

    #[test]
    fn singular_input_is_rejected() {
        let p = DMatrix::<f64>::zeros(2, 2);
        let q = DMatrix::<f64>::identity(2, 2);
        assert!(matches!(pq_identity_residual(&p, &q), Err(Error::SingularInput)));
    }
}
