//! Cyclic Jacobi eigensolver for small dense symmetric matrices.
//!
//! Used both in the solver hot path (diagnostics on failing pivots) and as the
//! oracle behind every spectral check, so it carries no dependency on an
//! external LAPACK.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::tolerances::{DENSE_CAP, SYMMETRY};

const MAX_SWEEPS: usize = 80;

/// Eigen-decomposition `M = V diag(values) V^T` with eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Column `i` is the unit eigenvector for `values[i]`.
    pub vectors: DMatrix<f64>,
}

impl SymEigen {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }

    /// `lambda_max / lambda_min`; infinite when the smallest eigenvalue is not positive.
    pub fn cond(&self) -> f64 {
        cond_from(self.min(), self.max())
    }
}

pub(crate) fn cond_from(lo: f64, hi: f64) -> f64 {
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

fn check_input(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "eigensolver needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() > DENSE_CAP {
        return Err(Error::SizeCapExceeded {
            size: m.nrows(),
            cap: DENSE_CAP,
        });
    }
    let asym = linalg::asymmetry(m);
    if asym > SYMMETRY * linalg::max_abs(m) {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    Ok(())
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix.
pub fn sym_eig(m: &DMatrix<f64>) -> Result<SymEigen> {
    check_input(m)?;
    let (values, vectors) = jacobi(m, true);
    Ok(sort_pairs(values, vectors.expect("vectors requested")))
}

/// Eigenvalues only, ascending.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_input(m)?;
    let (mut values, _) = jacobi(m, false);
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// `(lambda_min, lambda_max)` of a symmetric matrix.
pub fn extreme_eigenvalues(m: &DMatrix<f64>) -> Result<(f64, f64)> {
    let v = sym_eigenvalues(m)?;
    Ok((v[0], v[v.len() - 1]))
}

/// Singular values of an arbitrary square or rectangular block, ascending,
/// computed as square roots of the eigenvalues of `g^T g`.
pub fn singular_values(g: &DMatrix<f64>) -> Result<Vec<f64>> {
    if g.ncols() == 0 {
        return Ok(Vec::new());
    }
    let mut gtg = g.transpose() * g;
    linalg::symmetrize(&mut gtg);
    Ok(sym_eigenvalues(&gtg)?
        .into_iter()
        .map(|l| l.max(0.0).sqrt())
        .collect())
}

/// Operator (spectral) norm.
pub fn operator_norm(g: &DMatrix<f64>) -> Result<f64> {
    Ok(singular_values(g)?.last().copied().unwrap_or(0.0))
}

fn sort_pairs(values: Vec<f64>, vectors: DMatrix<f64>) -> SymEigen {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let n = values.len();
    let mut sorted = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        sorted.set_column(dst, &vectors.column(src));
    }
    SymEigen {
        values: order.iter().map(|&i| values[i]).collect(),
        vectors: sorted,
    }
}

/// Cyclic-by-row Jacobi. A rotation is skipped when the off-diagonal entry is
/// negligible relative to the geometric mean of its diagonal pair, which keeps
/// small eigenvalues of graded matrices accurate to high relative precision.
fn jacobi(m: &DMatrix<f64>, want_vectors: bool) -> (Vec<f64>, Option<DMatrix<f64>>) {
    let n = m.nrows();
    // row-major working copy, symmetrized
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = 0.5 * (m[(i, j)] + m[(j, i)]);
        }
    }
    let mut v = if want_vectors {
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            v[i * n + i] = 1.0;
        }
        Some(v)
    } else {
        None
    };

    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let floor = f64::MIN_POSITIVE.max(scale * 1e-300);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                if apq.abs() <= floor || apq.abs() <= f64::EPSILON * 0.5 * (app * aqq).abs().sqrt()
                {
                    continue;
                }
                rotated = true;
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let values = (0..n).map(|i| a[i * n + i]).collect();
    let vectors = v.map(|v| DMatrix::from_row_slice(n, n, &v));
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_unit_spectrum() {
        let e = sym_eig(&DMatrix::identity(4, 4)).unwrap();
        assert!(e.values.iter().all(|&l| l == 1.0));
    }

    #[test]
    fn diagonal_is_axis_aligned() {
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0]);
        let e = sym_eig(&m).unwrap();
        assert_eq!(e.values, vec![1.0, 4.0]);
        assert_eq!(e.vectors[(1, 0)].abs(), 1.0);
        assert_eq!(e.vectors[(0, 1)].abs(), 1.0);
    }

    #[test]
    fn graded_toy_matrix_small_eigenvalue() {
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[14401.0, 120.0, 0.0, 120.0, 14401.0, 120.0, 0.0, 120.0, 1.0],
        );
        let e = sym_eig(&m).unwrap();
        assert!((e.min() - 4.8e-9).abs() / 4.8e-9 < 0.05, "{}", e.min());
    }

    #[test]
    fn rejects_asymmetric_input() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(sym_eig(&m), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn empty_and_scalar() {
        let e = sym_eig(&DMatrix::from_element(1, 1, -3.0)).unwrap();
        assert_eq!(e.values, vec![-3.0]);
        assert_eq!(e.cond(), f64::INFINITY);
    }

    #[test]
    fn singular_values_of_rotation_scaled() {
        let g = DMatrix::from_row_slice(2, 2, &[0.0, -2.0, 2.0, 0.0]);
        let s = singular_values(&g).unwrap();
        assert!((s[0] - 2.0).abs() < 1e-14 && (s[1] - 2.0).abs() < 1e-14);
    }
}
