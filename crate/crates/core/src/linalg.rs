//! Small dense block helpers shared across the crate.

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{Error, Result, Stage};
use crate::spectral::eig;

pub type Block = DMatrix<f64>;
pub type Factor = Cholesky<f64, Dyn>;

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// `max |m - m^T|`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows().min(m.ncols());
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Replace `m` with `(m + m^T) / 2`.
pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

pub fn symmetrized(mut m: DMatrix<f64>) -> DMatrix<f64> {
    symmetrize(&mut m);
    m
}

pub fn is_exact_zero(m: &DMatrix<f64>) -> bool {
    m.iter().all(|&x| x == 0.0)
}

/// Smallest eigenvalue, used only to annotate failures.
pub fn lambda_min_diagnostic(m: &DMatrix<f64>) -> f64 {
    eig::sym_eigenvalues(&symmetrized(m.clone()))
        .map(|v| v[0])
        .unwrap_or(f64::NAN)
}

/// Cholesky factor of a pivot block; failure becomes `PivotNotPositiveDefinite`.
pub fn factor_pivot(d: &DMatrix<f64>, k: usize, stage: Stage) -> Result<Factor> {
    match Cholesky::new(d.clone()) {
        Some(f) if f.l_dirty().diagonal().iter().all(|x| x.is_finite() && *x > 0.0) => Ok(f),
        _ => Err(Error::PivotNotPositiveDefinite {
            k,
            stage,
            lambda_min: lambda_min_diagnostic(d),
        }),
    }
}

/// Cholesky factor of an SPD matrix, `None` if it is not numerically PD.
pub fn try_factor(m: &DMatrix<f64>) -> Option<Factor> {
    Cholesky::new(m.clone())
        .filter(|f| f.l_dirty().diagonal().iter().all(|x| x.is_finite() && *x > 0.0))
}

/// Explicit inverse of an SPD matrix through its Cholesky factor. Only the
/// classical smoother recursions use this; the block solvers never do.
pub fn spd_inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    try_factor(m).map(|f| symmetrized(f.inverse()))
}

/// Shortest of the plain and exponent round-trip renderings of `x`.
pub fn fmt_shortest(x: f64) -> String {
    let plain = x.to_string();
    let exp = format!("{x:e}");
    if exp.len() < plain.len() {
        exp
    } else {
        plain
    }
}

/// Frobenius norm of a stacked block sequence.
pub fn stacked_norm(blocks: &[DMatrix<f64>]) -> f64 {
    blocks.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt()
}

/// `||a - b|| / max(||a||, ||b||)` over stacked sequences; zero when both vanish.
pub fn relative_diff(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    assert_eq!(a.len(), b.len(), "sequence length mismatch");
    let diff = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_squared())
        .sum::<f64>()
        .sqrt();
    let scale = stacked_norm(a).max(stacked_norm(b));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Relative difference of two single blocks.
pub fn relative_block_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let scale = a.norm().max(b.norm());
    let diff = (a - b).norm();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Split a stacked column vector into `n`-row blocks.
pub fn split_blocks(v: &DMatrix<f64>, n: usize) -> Vec<DMatrix<f64>> {
    (0..v.nrows() / n)
        .map(|k| v.rows(k * n, n).into_owned())
        .collect()
}

/// Stack `n x l` blocks into one `(N n) x l` matrix.
pub fn stack_blocks(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.first().map_or(0, |b| b.ncols());
    let mut out = DMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((at, 0), (b.nrows(), cols)).copy_from(b);
        at += b.nrows();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shortest_formatting_round_trips() {
        for x in [14401.0, 4.822195975862087e-9, 0.1, -2.5e300, 1.0 / 3.0] {
            assert_eq!(fmt_shortest(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_shortest(14401.0), "14401");
        assert_eq!(fmt_shortest(4.8e-9), "4.8e-9");
    }

    #[test]
    fn symmetrize_is_exact() {
        let mut m = DMatrix::from_row_slice(2, 2, &[1.0, 0.1 + 0.2, 0.3, 2.0]);
        symmetrize(&mut m);
        assert_eq!(asymmetry(&m), 0.0);
    }

    #[test]
    fn factor_failure_reports_negative_eigenvalue() {
        let d = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        match factor_pivot(&d, 3, Stage::Forward) {
            Err(Error::PivotNotPositiveDefinite { k, lambda_min, .. }) => {
                assert_eq!(k, 3);
                assert!((lambda_min + 1.0).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn relative_diff_of_zero_sequences() {
        let z = vec![DMatrix::zeros(2, 1)];
        assert_eq!(relative_diff(&z, &z), 0.0);
    }
}
