//! Pivot blocks and reduced right-hand sides recorded by the solvers.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::linalg::{fmt_shortest, Block};
use crate::spectral::eig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
    TwoFilter,
    Hybrid,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
            Direction::TwoFilter => "twofilter",
            Direction::Hybrid => "hybrid",
        }
    }
}

/// A contiguous run of pivots `d_k` and reduced right-hand sides `s_k`.
///
/// `start` is the 0-based index of the first block covered, so `d[i]` is the
/// pivot for block `start + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotSeq {
    pub start: usize,
    pub d: Vec<Block>,
    pub s: Vec<Block>,
}

impl PivotSeq {
    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Pivot for 0-based block `j`, if covered.
    pub fn pivot(&self, j: usize) -> Option<&Block> {
        j.checked_sub(self.start).and_then(|i| self.d.get(i))
    }

    pub fn reduced_rhs(&self, j: usize) -> Option<&Block> {
        j.checked_sub(self.start).and_then(|i| self.s.get(i))
    }

    /// 0-based block indices covered.
    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.d.len()
    }
}

/// Midpoint exchange of the meet-in-the-middle solver.
#[derive(Debug, Clone, PartialEq)]
pub struct Exchange {
    /// Number of blocks in the forward half; the exchange couples blocks
    /// `m` and `m + 1` in 1-based numbering.
    pub m: usize,
    pub d_hat: Block,
    pub s_hat: Block,
    pub s_hat_next: Block,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveTrace {
    pub direction: Direction,
    pub forward: Option<PivotSeq>,
    pub backward: Option<PivotSeq>,
    /// Per-block `d_k^f + d_k^b - b_k` of the two-filter solver.
    pub combined: Option<Vec<Block>>,
    pub exchange: Option<Exchange>,
    /// 1-based `k` of coupling blocks `c_k` that were exactly zero.
    pub zero_couplings: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PivotKind {
    Forward,
    Backward,
    Combined,
    Exchange,
}

impl PivotKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PivotKind::Forward => "forward",
            PivotKind::Backward => "backward",
            PivotKind::Combined => "combined",
            PivotKind::Exchange => "exchange",
        }
    }
}

/// Spectral summary of one recorded pivot. `k` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockSpectrum {
    pub k: usize,
    pub direction: PivotKind,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub cond: f64,
}

impl SolveTrace {
    pub(crate) fn empty(direction: Direction) -> Self {
        Self {
            direction,
            forward: None,
            backward: None,
            combined: None,
            exchange: None,
            zero_couplings: Vec::new(),
        }
    }

    /// Every recorded pivot block with its 1-based index and kind.
    pub fn pivots(&self) -> Vec<(usize, PivotKind, &Block)> {
        let mut out = Vec::new();
        if let Some(f) = &self.forward {
            for (i, d) in f.d.iter().enumerate() {
                out.push((f.start + i + 1, PivotKind::Forward, d));
            }
        }
        if let Some(x) = &self.exchange {
            out.push((x.m, PivotKind::Exchange, &x.d_hat));
        }
        if let Some(b) = &self.backward {
            for (i, d) in b.d.iter().enumerate() {
                out.push((b.start + i + 1, PivotKind::Backward, d));
            }
        }
        if let Some(c) = &self.combined {
            for (i, d) in c.iter().enumerate() {
                out.push((i + 1, PivotKind::Combined, d));
            }
        }
        out
    }

    /// Extreme eigenvalues and condition number of every recorded pivot.
    /// Computed on demand so that the solve itself stays lean.
    pub fn block_spectra(&self) -> Result<Vec<BlockSpectrum>> {
        self.pivots()
            .into_iter()
            .map(|(k, direction, d)| {
                let (lambda_min, lambda_max) = eig::extreme_eigenvalues(d)?;
                Ok(BlockSpectrum {
                    k,
                    direction,
                    lambda_min,
                    lambda_max,
                    cond: eig::cond_from(lambda_min, lambda_max),
                })
            })
            .collect()
    }

    /// CSV with columns `k,direction,lambda_min,lambda_max,cond`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "direction", "lambda_min", "lambda_max", "cond"])?;
        for s in self.block_spectra()? {
            w.write_record([
                s.k.to_string(),
                s.direction.as_str().to_string(),
                fmt_shortest(s.lambda_min),
                fmt_shortest(s.lambda_max),
                fmt_shortest(s.cond),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}
