//! Symmetric block tridiagonal systems.
//!
//! ```text
//! | b_1  c_2^T                |   | e_1 |   | r_1 |
//! | c_2  b_2   c_3^T          |   | e_2 |   | r_2 |
//! |      ...   ...    c_N^T   | * | ... | = | ... |
//! |            c_N    b_N     |   | e_N |   | r_N |
//! ```
//!
//! Blocks are stored 0-based: `diag[j]` is `b_{j+1}` and `sub[j - 1]` couples
//! block `j` to block `j - 1`.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Block};
use crate::tolerances::{DENSE_CAP, SYMMETRY};

#[derive(Debug, Clone, PartialEq)]
pub struct BlockTriSystem {
    n: usize,
    ell: usize,
    diag: Vec<Block>,
    sub: Vec<Block>,
    rhs: Vec<Block>,
}

impl BlockTriSystem {
    /// Validates shapes and diagonal-block symmetry.
    pub fn new(diag: Vec<Block>, sub: Vec<Block>, rhs: Vec<Block>) -> Result<Self> {
        let big_n = diag.len();
        if big_n == 0 {
            return Err(Error::DimensionMismatch("system has no blocks".into()));
        }
        let n = diag[0].nrows();
        if n == 0 {
            return Err(Error::DimensionMismatch("block dimension is zero".into()));
        }
        if sub.len() != big_n - 1 {
            return Err(Error::DimensionMismatch(format!(
                "expected {} sub-diagonal blocks, got {}",
                big_n - 1,
                sub.len()
            )));
        }
        if rhs.len() != big_n {
            return Err(Error::DimensionMismatch(format!(
                "expected {big_n} right-hand-side blocks, got {}",
                rhs.len()
            )));
        }
        let ell = rhs[0].ncols();
        if ell == 0 {
            return Err(Error::DimensionMismatch("right-hand side has no columns".into()));
        }
        for (j, b) in diag.iter().enumerate() {
            if b.shape() != (n, n) {
                return Err(Error::DimensionMismatch(format!(
                    "diagonal block {} is {:?}, expected ({n}, {n})",
                    j + 1,
                    b.shape()
                )));
            }
            let asym = linalg::asymmetry(b);
            if asym > SYMMETRY * linalg::max_abs(b) {
                return Err(Error::NotSymmetric { asymmetry: asym });
            }
        }
        for (j, c) in sub.iter().enumerate() {
            if c.shape() != (n, n) {
                return Err(Error::DimensionMismatch(format!(
                    "sub-diagonal block {} is {:?}, expected ({n}, {n})",
                    j + 2,
                    c.shape()
                )));
            }
        }
        for (j, r) in rhs.iter().enumerate() {
            if r.shape() != (n, ell) {
                return Err(Error::DimensionMismatch(format!(
                    "rhs block {} is {:?}, expected ({n}, {ell})",
                    j + 1,
                    r.shape()
                )));
            }
        }
        Ok(Self {
            n,
            ell,
            diag,
            sub,
            rhs,
        })
    }

    pub fn block_dim(&self) -> usize {
        self.n
    }

    pub fn num_blocks(&self) -> usize {
        self.diag.len()
    }

    pub fn rhs_cols(&self) -> usize {
        self.ell
    }

    pub fn diag(&self) -> &[Block] {
        &self.diag
    }

    pub fn sub(&self) -> &[Block] {
        &self.sub
    }

    pub fn rhs(&self) -> &[Block] {
        &self.rhs
    }

    /// Diagonal block `b_{j+1}` (0-based `j`).
    pub fn b(&self, j: usize) -> &Block {
        &self.diag[j]
    }

    /// Coupling block between `j` and `j - 1` (0-based, `j >= 1`).
    pub fn c(&self, j: usize) -> &Block {
        &self.sub[j - 1]
    }

    pub fn r(&self, j: usize) -> &Block {
        &self.rhs[j]
    }

    /// Same matrix with a different right-hand side.
    pub fn with_rhs(&self, rhs: Vec<Block>) -> Result<Self> {
        Self::new(self.diag.clone(), self.sub.clone(), rhs)
    }

    /// Dense `(N n) x (N n)` matrix, exactly symmetric by construction.
    pub fn assemble_dense(&self) -> Result<DMatrix<f64>> {
        self.assemble_dense_capped(DENSE_CAP)
    }

    pub fn assemble_dense_capped(&self, cap: usize) -> Result<DMatrix<f64>> {
        let n = self.n;
        let size = n * self.num_blocks();
        if size > cap {
            return Err(Error::SizeCapExceeded { size, cap });
        }
        let mut a = DMatrix::zeros(size, size);
        for (j, b) in self.diag.iter().enumerate() {
            let bs = linalg::symmetrized(b.clone());
            a.view_mut((j * n, j * n), (n, n)).copy_from(&bs);
        }
        for j in 1..self.num_blocks() {
            let c = self.c(j);
            a.view_mut((j * n, (j - 1) * n), (n, n)).copy_from(c);
            a.view_mut(((j - 1) * n, j * n), (n, n)).copy_from(&c.transpose());
        }
        Ok(a)
    }

    /// Stacked right-hand side as an `(N n) x ell` matrix.
    pub fn stacked_rhs(&self) -> DMatrix<f64> {
        linalg::stack_blocks(&self.rhs)
    }

    /// Blockwise product `A e`.
    pub fn apply(&self, e: &[Block]) -> Result<Vec<Block>> {
        self.check_blocks(e)?;
        let big_n = self.num_blocks();
        let mut out = Vec::with_capacity(big_n);
        for j in 0..big_n {
            let mut y = &self.diag[j] * &e[j];
            if j > 0 {
                y += self.c(j) * &e[j - 1];
            }
            if j + 1 < big_n {
                y += self.c(j + 1).tr_mul(&e[j + 1]);
            }
            out.push(y);
        }
        Ok(out)
    }

    /// `||A e - r||_F` computed blockwise.
    pub fn residual(&self, e: &[Block]) -> Result<f64> {
        let ae = self.apply(e)?;
        Ok(ae
            .iter()
            .zip(&self.rhs)
            .map(|(a, r)| (a - r).norm_squared())
            .sum::<f64>()
            .sqrt())
    }

    pub fn rhs_norm(&self) -> f64 {
        linalg::stacked_norm(&self.rhs)
    }

    fn check_blocks(&self, e: &[Block]) -> Result<()> {
        if e.len() != self.num_blocks() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} solution blocks, got {}",
                self.num_blocks(),
                e.len()
            )));
        }
        for (j, x) in e.iter().enumerate() {
            if x.nrows() != self.n || x.ncols() != self.ell {
                return Err(Error::DimensionMismatch(format!(
                    "solution block {} is {:?}, expected ({}, {})",
                    j + 1,
                    x.shape(),
                    self.n,
                    self.ell
                )));
            }
        }
        Ok(())
    }

    pub fn to_doc(&self) -> SystemDoc {
        SystemDoc {
            n: self.n,
            big_n: self.num_blocks(),
            ell: self.ell,
            diag: self.diag.iter().map(row_major).collect(),
            sub: self.sub.iter().map(row_major).collect(),
            rhs: self.rhs.iter().map(row_major).collect(),
        }
    }

    pub fn from_doc(doc: &SystemDoc) -> Result<Self> {
        if doc.diag.len() != doc.big_n {
            return Err(Error::DimensionMismatch(format!(
                "N = {} but {} diagonal blocks",
                doc.big_n,
                doc.diag.len()
            )));
        }
        let diag = doc
            .diag
            .iter()
            .map(|v| from_row_major(v, doc.n, doc.n))
            .collect::<Result<_>>()?;
        let sub = doc
            .sub
            .iter()
            .map(|v| from_row_major(v, doc.n, doc.n))
            .collect::<Result<_>>()?;
        let rhs = doc
            .rhs
            .iter()
            .map(|v| from_row_major(v, doc.n, doc.ell))
            .collect::<Result<_>>()?;
        Self::new(diag, sub, rhs)
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

/// JSON layout of a system. Blocks are flattened row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemDoc {
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub ell: usize,
    pub diag: Vec<Vec<f64>>,
    pub sub: Vec<Vec<f64>>,
    pub rhs: Vec<Vec<f64>>,
}

pub(crate) fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            v.push(m[(i, j)]);
        }
    }
    v
}

pub(crate) fn from_row_major(v: &[f64], rows: usize, cols: usize) -> Result<DMatrix<f64>> {
    if v.len() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "block has {} entries, expected {rows}x{cols}",
            v.len()
        )));
    }
    Ok(DMatrix::from_row_slice(rows, cols, v))
}
