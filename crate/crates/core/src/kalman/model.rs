use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Block, Factor};
use crate::system::{from_row_major, row_major};

/// Linear-Gaussian state-space model
///
/// ```text
/// x_k = G_k x_{k-1} + w_k,   w_k ~ N(0, Q_k)
/// z_k = H_k x_k + v_k,       v_k ~ N(0, R_k)
/// ```
///
/// for `k = 1..N` with a known initial state `x_0` and `G_1 = I`. Step `k` may
/// carry no measurement (`m(k) = 0`), in which case `H_k` is `0 x n`.
#[derive(Debug, Clone)]
pub struct LinearGaussianModel {
    x0: Block,
    g: Vec<Block>,
    q: Vec<Block>,
    h: Vec<Block>,
    r: Vec<Block>,
    z: Vec<Block>,
    q_factors: Vec<Factor>,
    r_factors: Vec<Option<Factor>>,
}

impl LinearGaussianModel {
    /// `g` holds either `G_1..G_N` (with `G_1 = I`) or `G_2..G_N`.
    /// `x0` and each `z_k` are column vectors.
    pub fn new(
        x0: Block,
        g: Vec<Block>,
        q: Vec<Block>,
        h: Vec<Block>,
        r: Vec<Block>,
        z: Vec<Block>,
    ) -> Result<Self> {
        let big_n = q.len();
        if big_n == 0 {
            return Err(Error::EmptySequence);
        }
        let n = x0.nrows();
        if n == 0 || x0.ncols() != 1 {
            return Err(Error::DimensionMismatch(format!(
                "x0 must be a nonempty column vector, got {:?}",
                x0.shape()
            )));
        }
        let g = if g.len() + 1 == big_n {
            std::iter::once(DMatrix::identity(n, n)).chain(g).collect()
        } else if g.len() == big_n {
            if g[0] != DMatrix::<f64>::identity(n, n) {
                return Err(Error::DimensionMismatch("G_1 must be the identity".into()));
            }
            g
        } else {
            return Err(Error::DimensionMismatch(format!(
                "{big_n} steps need {} or {big_n} process matrices, got {}",
                big_n - 1,
                g.len()
            )));
        };
        if h.len() != big_n || r.len() != big_n || z.len() != big_n {
            return Err(Error::DimensionMismatch(format!(
                "H, R, z must have {big_n} entries (got {}, {}, {})",
                h.len(),
                r.len(),
                z.len()
            )));
        }
        if g.iter().chain(&q).any(|b| b.shape() != (n, n)) {
            return Err(Error::DimensionMismatch("G and Q blocks must be n x n".into()));
        }
        let mut q_factors = Vec::with_capacity(big_n);
        for (k, qk) in q.iter().enumerate() {
            q_factors.push(checked_cov(qk, k, "process")?);
        }
        let mut r_factors = Vec::with_capacity(big_n);
        for k in 0..big_n {
            let m = z[k].nrows();
            if z[k].ncols() != 1 || h[k].shape() != (m, n) || r[k].shape() != (m, m) {
                return Err(Error::DimensionMismatch(format!(
                    "step {}: z is {:?}, H is {:?}, R is {:?}",
                    k + 1,
                    z[k].shape(),
                    h[k].shape(),
                    r[k].shape()
                )));
            }
            r_factors.push(if m == 0 {
                None
            } else {
                Some(checked_cov(&r[k], k, "measurement")?)
            });
        }
        Ok(Self {
            x0,
            g,
            q,
            h,
            r,
            z,
            q_factors,
            r_factors,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.x0.nrows()
    }

    pub fn num_steps(&self) -> usize {
        self.q.len()
    }

    /// Measurement dimension `m(k)` at 0-based step `k`.
    pub fn meas_dim(&self, k: usize) -> usize {
        self.z[k].nrows()
    }

    pub fn x0(&self) -> &Block {
        &self.x0
    }

    /// Process matrix for 0-based step `k` (`g(0)` is the identity).
    pub fn g(&self, k: usize) -> &Block {
        &self.g[k]
    }

    pub fn q(&self, k: usize) -> &Block {
        &self.q[k]
    }

    pub fn h(&self, k: usize) -> &Block {
        &self.h[k]
    }

    pub fn r(&self, k: usize) -> &Block {
        &self.r[k]
    }

    pub fn z(&self, k: usize) -> &Block {
        &self.z[k]
    }

    pub fn q_factor(&self, k: usize) -> &Factor {
        &self.q_factors[k]
    }

    /// `Q_k^{-1}`.
    pub fn q_inv(&self, k: usize) -> Block {
        linalg::symmetrized(self.q_factors[k].inverse())
    }

    /// `Q_k^{-1} X`.
    pub fn q_solve(&self, k: usize, x: &Block) -> Block {
        self.q_factors[k].solve(x)
    }

    /// Measurement information `H_k^T R_k^{-1} H_k` (zero without a measurement).
    pub fn meas_info(&self, k: usize) -> Block {
        let n = self.state_dim();
        match &self.r_factors[k] {
            None => DMatrix::zeros(n, n),
            Some(f) => linalg::symmetrized(self.h[k].tr_mul(&f.solve(&self.h[k]))),
        }
    }

    /// Measurement information vector `H_k^T R_k^{-1} z_k`.
    pub fn meas_vector(&self, k: usize) -> Block {
        match &self.r_factors[k] {
            None => DMatrix::zeros(self.state_dim(), 1),
            Some(f) => self.h[k].tr_mul(&f.solve(&self.z[k])),
        }
    }

    /// `R_k^{-1} v` for a measurement-sized vector.
    pub(crate) fn r_solve(&self, k: usize, v: &Block) -> Block {
        match &self.r_factors[k] {
            None => DMatrix::zeros(0, v.ncols()),
            Some(f) => f.solve(v),
        }
    }

    pub fn to_doc(&self) -> ModelDoc {
        ModelDoc {
            n: self.state_dim(),
            big_n: self.num_steps(),
            x0: self.x0.iter().copied().collect(),
            g: self.g.iter().map(row_major).collect(),
            q: self.q.iter().map(row_major).collect(),
            h: self.h.iter().map(row_major).collect(),
            r: self.r.iter().map(row_major).collect(),
            z: self.z.iter().map(|z| z.iter().copied().collect()).collect(),
        }
    }

    pub fn from_doc(doc: &ModelDoc) -> Result<Self> {
        let n = doc.n;
        if doc.x0.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "x0 has {} entries, expected {n}",
                doc.x0.len()
            )));
        }
        if doc.q.len() != doc.big_n {
            return Err(Error::DimensionMismatch(format!(
                "N = {} but {} process covariances",
                doc.big_n,
                doc.q.len()
            )));
        }
        let square = |v: &Vec<f64>| from_row_major(v, n, n);
        let x0 = DMatrix::from_column_slice(n, 1, &doc.x0);
        let g = doc.g.iter().map(square).collect::<Result<_>>()?;
        let q = doc.q.iter().map(square).collect::<Result<_>>()?;
        if doc.z.len() != doc.big_n || doc.h.len() != doc.big_n || doc.r.len() != doc.big_n {
            return Err(Error::DimensionMismatch(format!(
                "H, R, z must have N = {} entries",
                doc.big_n
            )));
        }
        let mut h = Vec::with_capacity(doc.big_n);
        let mut r = Vec::with_capacity(doc.big_n);
        let mut z = Vec::with_capacity(doc.big_n);
        for k in 0..doc.big_n {
            let m = doc.z[k].len();
            h.push(from_row_major(&doc.h[k], m, n)?);
            r.push(from_row_major(&doc.r[k], m, m)?);
            z.push(DMatrix::from_column_slice(m, 1, &doc.z[k]));
        }
        Self::new(x0, g, q, h, r, z)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_doc())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_doc(&serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

// factors are derived from the data
impl PartialEq for LinearGaussianModel {
    fn eq(&self, other: &Self) -> bool {
        self.x0 == other.x0
            && self.g == other.g
            && self.q == other.q
            && self.h == other.h
            && self.r == other.r
            && self.z == other.z
    }
}

fn checked_cov(m: &Block, k: usize, which: &'static str) -> Result<Factor> {
    let scale = linalg::max_abs(m);
    if linalg::asymmetry(m) > crate::tolerances::SYMMETRY * scale {
        return Err(Error::CovarianceNotPD { k: k + 1, which });
    }
    linalg::try_factor(&linalg::symmetrized(m.clone()))
        .ok_or(Error::CovarianceNotPD { k: k + 1, which })
}

/// JSON layout of a model. Matrices are flattened row-major; `m(k)` is the
/// length of `z[k]`. `G` may list `G_1..G_N` (with `G_1 = I`) or `G_2..G_N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDoc {
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub x0: Vec<f64>,
    #[serde(rename = "G")]
    pub g: Vec<Vec<f64>>,
    #[serde(rename = "Q")]
    pub q: Vec<Vec<f64>>,
    #[serde(rename = "H")]
    pub h: Vec<Vec<f64>>,
    #[serde(rename = "R")]
    pub r: Vec<Vec<f64>>,
    pub z: Vec<Vec<f64>>,
}
