//! Spectral diagnostics: the dense symmetric eigensolver, eigenvalue and
//! singular-value bounds for process-structured systems `E = g^T q^{-1} g`,
//! the weakest-link diagnosis and condition-number estimates.

pub mod eig;

use nalgebra::DMatrix;
use serde::Serialize;

pub use eig::{extreme_eigenvalues, singular_values, sym_eig, sym_eigenvalues, SymEigen};

use crate::error::{Error, Result};
use crate::linalg::{self, Block};
use crate::system::BlockTriSystem;
use crate::tolerances::{DENSE_CAP, DENSE_KAPPA_CAP};

/// `E = g^T q^{-1} g` with `g` unit lower block bidiagonal and sub-blocks
/// `g_2..g_N`. The optional `u` blocks are the measurement information added
/// on the diagonal in the Kalman setting.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessOnlySystem {
    pub q: Vec<Block>,
    /// `g[i]` is `g_{i+2}`.
    pub g: Vec<Block>,
    pub u: Option<Vec<Block>>,
}

impl ProcessOnlySystem {
    pub fn new(q: Vec<Block>, g: Vec<Block>, u: Option<Vec<Block>>) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::EmptySequence);
        }
        let n = q[0].nrows();
        if g.len() + 1 != q.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} q blocks need {} g blocks, got {}",
                q.len(),
                q.len() - 1,
                g.len()
            )));
        }
        if q.iter().chain(&g).any(|b| b.shape() != (n, n)) {
            return Err(Error::DimensionMismatch("all blocks must be n x n".into()));
        }
        for (k, qk) in q.iter().enumerate() {
            if linalg::try_factor(&linalg::symmetrized(qk.clone())).is_none() {
                return Err(Error::CovarianceNotPD {
                    k: k + 1,
                    which: "process",
                });
            }
        }
        if let Some(u) = &u {
            if u.len() != q.len() || u.iter().any(|b| b.shape() != (n, n)) {
                return Err(Error::DimensionMismatch("u blocks must match q".into()));
            }
        }
        Ok(Self { q, g, u })
    }

    /// Process structure of a Kalman model: `q_k = Q_k`, `g_k = -G_k`,
    /// `u_k = H_k^T R_k^{-1} H_k`.
    pub fn from_model(model: &crate::kalman::LinearGaussianModel) -> Result<Self> {
        let big_n = model.num_steps();
        Self::new(
            (0..big_n).map(|k| model.q(k).clone()).collect(),
            (1..big_n).map(|k| -model.g(k)).collect(),
            Some((0..big_n).map(|k| model.meas_info(k)).collect()),
        )
    }

    pub fn num_blocks(&self) -> usize {
        self.q.len()
    }

    pub fn block_dim(&self) -> usize {
        self.q[0].nrows()
    }

    /// Dense `g`.
    pub fn assemble_g(&self) -> Result<DMatrix<f64>> {
        let n = self.block_dim();
        let size = n * self.num_blocks();
        if size > DENSE_CAP {
            return Err(Error::SizeCapExceeded {
                size,
                cap: DENSE_CAP,
            });
        }
        let mut g = DMatrix::identity(size, size);
        for (i, gk) in self.g.iter().enumerate() {
            let k = i + 1;
            g.view_mut((k * n, (k - 1) * n), (n, n)).copy_from(gk);
        }
        Ok(g)
    }

    /// Dense `g^T g`.
    pub fn gram(&self) -> Result<DMatrix<f64>> {
        let g = self.assemble_g()?;
        Ok(linalg::symmetrized(g.transpose() * g))
    }

    /// Dense `E = g^T q^{-1} g`.
    pub fn assemble_e(&self) -> Result<DMatrix<f64>> {
        let g = self.assemble_g()?;
        let n = self.block_dim();
        let mut qinv = DMatrix::zeros(g.nrows(), g.ncols());
        for (k, qk) in self.q.iter().enumerate() {
            let inv = linalg::spd_inverse(&linalg::symmetrized(qk.clone())).ok_or(
                Error::CovarianceNotPD {
                    k: k + 1,
                    which: "process",
                },
            )?;
            qinv.view_mut((k * n, k * n), (n, n)).copy_from(&inv);
        }
        Ok(linalg::symmetrized(g.transpose() * qinv * g))
    }

    /// The block tridiagonal form of `E` (plus `u` on the diagonal when present),
    /// with the given right-hand side.
    pub fn to_system(&self, rhs: Vec<Block>) -> Result<BlockTriSystem> {
        let big_n = self.num_blocks();
        let qinv: Vec<Block> = self
            .q
            .iter()
            .enumerate()
            .map(|(k, q)| {
                linalg::spd_inverse(&linalg::symmetrized(q.clone())).ok_or(Error::CovarianceNotPD {
                    k: k + 1,
                    which: "process",
                })
            })
            .collect::<Result<_>>()?;
        let mut diag = Vec::with_capacity(big_n);
        for k in 0..big_n {
            let mut d = qinv[k].clone();
            if k + 1 < big_n {
                let gk = &self.g[k];
                d += gk.tr_mul(&(&qinv[k + 1] * gk));
            }
            if let Some(u) = &self.u {
                d += &u[k];
            }
            diag.push(linalg::symmetrized(d));
        }
        // E_{k,k-1} = q_k^{-1} g_k
        let sub = (1..big_n).map(|k| &qinv[k] * &self.g[k - 1]).collect();
        BlockTriSystem::new(diag, sub, rhs)
    }

    fn q_extremes(&self) -> Result<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for q in &self.q {
            let (a, b) = extreme_eigenvalues(&linalg::symmetrized(q.clone()))?;
            lo = lo.min(a);
            hi = hi.max(b);
        }
        Ok((lo, hi))
    }

    fn g_sigma_sq_extremes(&self) -> Result<(f64, f64)> {
        let (lo, hi) = extreme_eigenvalues(&self.gram()?)?;
        Ok((lo.max(0.0), hi))
    }
}

/// `sigma_min^2(g) / lambda_max(q) <= lambda(E) <= sigma_max^2(g) / lambda_min(q)`.
pub fn theorem1_bounds(pos: &ProcessOnlySystem) -> Result<(f64, f64)> {
    let (q_lo, q_hi) = pos.q_extremes()?;
    let (s_lo, s_hi) = pos.g_sigma_sq_extremes()?;
    Ok((s_lo / q_hi, s_hi / q_lo))
}

/// Bounds on the eigenvalues of `g^T g` from the individual blocks.
///
/// With `sigma_max(g_1) = 0` and `g_{N+1} = 0`:
/// `lower = max(0, min_k {1 + sigma_min^2(g_{k+1}) - sigma_max(g_k) - sigma_max(g_{k+1})})`,
/// `upper = max_k {1 + sigma_max^2(g_{k+1}) + sigma_max(g_k) + sigma_max(g_{k+1})}`.
pub fn theorem2_bounds(g_blocks: &[Block]) -> Result<(f64, f64)> {
    if g_blocks.is_empty() {
        return Err(Error::EmptySequence);
    }
    let terms = block_terms(g_blocks)?;
    let lower = terms
        .iter()
        .map(|t| t.lower)
        .fold(f64::INFINITY, f64::min)
        .max(0.0);
    let upper = terms.iter().map(|t| t.upper).fold(0.0, f64::max);
    Ok((lower, upper))
}

/// Per-block terms of the singular-value bounds, indexed by 0-based block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockTerm {
    pub lower: f64,
    pub upper: f64,
}

/// `1 +/- ...` terms for every `k = 1..N`, `N = g_blocks.len() + 1`.
pub fn block_terms(g_blocks: &[Block]) -> Result<Vec<BlockTerm>> {
    let big_n = g_blocks.len() + 1;
    // index j holds the coupling entering 0-based block j; j = 0 and j = N
    // are the absent end blocks
    let mut smin = vec![0.0; big_n + 1];
    let mut smax = vec![0.0; big_n + 1];
    for (i, g) in g_blocks.iter().enumerate() {
        let sv = singular_values(g)?;
        smin[i + 1] = sv.first().copied().unwrap_or(0.0);
        smax[i + 1] = sv.last().copied().unwrap_or(0.0);
    }
    Ok((0..big_n)
        .map(|k| {
            let g_k = smax[k];
            let (g_next_min, g_next_max) = (smin[k + 1], smax[k + 1]);
            BlockTerm {
                lower: 1.0 + g_next_min * g_next_min - g_k - g_next_max,
                upper: 1.0 + g_next_max * g_next_max + g_k + g_next_max,
            }
        })
        .collect())
}

/// Weakest-link diagnosis for the final coupling block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakestLink {
    /// `1 - sigma_max(g_N)`.
    pub bound: f64,
    /// Set when `sigma_max(g_N) >= 1`, i.e. the bound is vacuous and the last
    /// block is the suspected source of ill-conditioning.
    pub suspect_last_block: bool,
    /// 1-based block holding the largest-norm component of the eigenvector
    /// for `lambda_min(g^T g)`, when the dense path is affordable.
    pub argmax_block: Option<usize>,
    pub min_eigenvector: Option<Vec<f64>>,
}

pub fn weakest_link(g_blocks: &[Block]) -> Result<WeakestLink> {
    let Some(last) = g_blocks.last() else {
        return Err(Error::EmptySequence);
    };
    let sigma = eig::operator_norm(last)?;
    let n = last.nrows();
    let big_n = g_blocks.len() + 1;
    let (argmax_block, min_eigenvector) = if n * big_n <= DENSE_CAP {
        let pos = ProcessOnlySystem {
            q: vec![DMatrix::identity(n, n); big_n],
            g: g_blocks.to_vec(),
            u: None,
        };
        let e = sym_eig(&pos.gram()?)?;
        let v: Vec<f64> = e.vectors.column(0).iter().copied().collect();
        (Some(argmax_block(&v, n)), Some(v))
    } else {
        (None, None)
    };
    Ok(WeakestLink {
        bound: 1.0 - sigma,
        suspect_last_block: sigma >= 1.0,
        argmax_block,
        min_eigenvector,
    })
}

/// 1-based index of the block with the largest Euclidean norm; ties go to the
/// lowest index.
pub fn argmax_block(v: &[f64], n: usize) -> usize {
    let mut best = 0;
    let mut best_norm = f64::NEG_INFINITY;
    for (k, chunk) in v.chunks(n).enumerate() {
        let norm = chunk.iter().map(|x| x * x).sum::<f64>();
        if norm > best_norm {
            best = k;
            best_norm = norm;
        }
    }
    best + 1
}

/// `lambda_max(q) sigma_max^2(g) / (lambda_min(q) sigma_min^2(g))`.
pub fn condition_bound(pos: &ProcessOnlySystem) -> Result<f64> {
    let (q_lo, q_hi) = pos.q_extremes()?;
    let (s_lo, s_hi) = pos.g_sigma_sq_extremes()?;
    if s_lo <= f64::EPSILON * s_hi {
        return Err(Error::VacuousBound);
    }
    Ok(q_hi * s_hi / (q_lo * s_lo))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub kappa: f64,
    pub bound_lower: Option<f64>,
    pub bound_upper: Option<f64>,
    pub sv_bound_lower: Option<f64>,
    pub sv_bound_upper: Option<f64>,
    pub condition_bound: Option<f64>,
    pub weakest_link_bound: Option<f64>,
    pub weakest_link_suspect: Option<bool>,
    pub argmax_block: Option<usize>,
}

/// Full report for a process-structured system `E` (measurement blocks ignored).
pub fn spectral_report(pos: &ProcessOnlySystem) -> Result<SpectralReport> {
    let e = sym_eig(&pos.assemble_e()?)?;
    let (b_lo, b_hi) = theorem1_bounds(pos)?;
    let (sv_lo, sv_hi, wl) = if pos.g.is_empty() {
        (Some(1.0), Some(1.0), None)
    } else {
        let (lo, hi) = theorem2_bounds(&pos.g)?;
        (Some(lo), Some(hi), Some(weakest_link(&pos.g)?))
    };
    let argmax = Some(argmax_block(
        &e.vectors.column(0).iter().copied().collect::<Vec<_>>(),
        pos.block_dim(),
    ));
    Ok(SpectralReport {
        lambda_min: e.min(),
        lambda_max: e.max(),
        kappa: e.cond(),
        bound_lower: Some(b_lo),
        bound_upper: Some(b_hi),
        sv_bound_lower: sv_lo,
        sv_bound_upper: sv_hi,
        condition_bound: condition_bound(pos).ok(),
        weakest_link_bound: wl.as_ref().map(|w| w.bound),
        weakest_link_suspect: wl.as_ref().map(|w| w.suspect_last_block),
        argmax_block: argmax,
    })
}

/// Report for a general system: measured spectrum only.
pub fn system_report(sys: &BlockTriSystem) -> Result<SpectralReport> {
    let e = sym_eig(&sys.assemble_dense()?)?;
    let argmax = argmax_block(
        &e.vectors.column(0).iter().copied().collect::<Vec<_>>(),
        sys.block_dim(),
    );
    Ok(SpectralReport {
        lambda_min: e.min(),
        lambda_max: e.max(),
        kappa: e.cond(),
        bound_lower: None,
        bound_upper: None,
        sv_bound_lower: None,
        sv_bound_upper: None,
        condition_bound: None,
        weakest_link_bound: None,
        weakest_link_suspect: None,
        argmax_block: Some(argmax),
    })
}

/// Block Gershgorin interval: every eigenvalue lies within
/// `|c_k| + |c_{k+1}|` (spectral norms) of the spectrum of some `b_k`.
pub fn gershgorin_interval(sys: &BlockTriSystem) -> Result<(f64, f64)> {
    let big_n = sys.num_blocks();
    let norms = (1..big_n)
        .map(|j| eig::operator_norm(sys.c(j)))
        .collect::<Result<Vec<_>>>()?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for j in 0..big_n {
        let (b_lo, b_hi) = extreme_eigenvalues(sys.b(j))?;
        let mut radius = 0.0;
        if j > 0 {
            radius += norms[j - 1];
        }
        if j + 1 < big_n {
            radius += norms[j];
        }
        lo = lo.min(b_lo - radius);
        hi = hi.max(b_hi + radius);
    }
    Ok((lo, hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KappaMethod {
    Dense,
    Gershgorin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionEstimate {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub kappa: f64,
    pub method: KappaMethod,
}

/// Condition number used to scale tolerances: measured densely for small
/// systems, otherwise a Gershgorin upper bound (infinite if the Gershgorin
/// interval reaches zero).
pub fn condition_estimate(sys: &BlockTriSystem) -> Result<ConditionEstimate> {
    if sys.block_dim() * sys.num_blocks() <= DENSE_KAPPA_CAP {
        let (lo, hi) = extreme_eigenvalues(&sys.assemble_dense()?)?;
        return Ok(ConditionEstimate {
            lambda_min: lo,
            lambda_max: hi,
            kappa: eig::cond_from(lo, hi),
            method: KappaMethod::Dense,
        });
    }
    let (lo, hi) = gershgorin_interval(sys)?;
    Ok(ConditionEstimate {
        lambda_min: lo,
        lambda_max: hi,
        kappa: eig::cond_from(lo, hi),
        method: KappaMethod::Gershgorin,
    })
}
