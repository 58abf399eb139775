//! The four block tridiagonal solvers.
//!
//! All of them factor pivot blocks with Cholesky and never form an explicit
//! inverse; every stored pivot is symmetrized after its update.

mod hybrid;
mod twofilter;

pub use hybrid::{hybrid_solve, post_exchange_dense};
pub use twofilter::twofilter_solve;

use crate::error::{Result, Stage};
use crate::linalg::{self, Block, Factor};
use crate::system::BlockTriSystem;
use crate::trace::{Direction, PivotSeq, SolveTrace};

/// Solution blocks `e_1..e_N` together with the trace that produced them.
#[derive(Debug, Clone)]
pub struct BlockSolution {
    pub e: Vec<Block>,
    /// `||A e - r||_F`, computed blockwise.
    pub residual_norm: f64,
    pub trace: SolveTrace,
}

impl BlockSolution {
    fn finish(sys: &BlockTriSystem, e: Vec<Block>, trace: SolveTrace) -> Result<Self> {
        let residual_norm = sys.residual(&e)?;
        Ok(Self {
            e,
            residual_norm,
            trace,
        })
    }
}

/// Which algorithm to run; used by the CLI and the comparison harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Fbt,
    Bbt,
    #[serde(rename = "mf")]
    TwoFilter,
    Hybrid,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Fbt,
        Algorithm::Bbt,
        Algorithm::TwoFilter,
        Algorithm::Hybrid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Fbt => "fbt",
            Algorithm::Bbt => "bbt",
            Algorithm::TwoFilter => "mf",
            Algorithm::Hybrid => "hybrid",
        }
    }

    pub fn solve(self, sys: &BlockTriSystem, parallel: bool) -> Result<BlockSolution> {
        match self {
            Algorithm::Fbt => fbt_solve(sys),
            Algorithm::Bbt => bbt_solve(sys),
            Algorithm::TwoFilter => twofilter_solve(sys, parallel),
            Algorithm::Hybrid => hybrid_solve(sys, parallel),
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "fbt" => Ok(Algorithm::Fbt),
            "bbt" => Ok(Algorithm::Bbt),
            "mf" | "twofilter" => Ok(Algorithm::TwoFilter),
            "hybrid" => Ok(Algorithm::Hybrid),
            other => Err(format!("unknown algorithm `{other}`")),
        }
    }
}

/// Eliminated blocks with the Cholesky factors of their pivots.
#[derive(Debug, Clone)]
pub(crate) struct Sweep {
    pub start: usize,
    pub d: Vec<Block>,
    pub s: Vec<Block>,
    pub factors: Vec<Factor>,
}

impl Sweep {
    fn into_seq(self) -> PivotSeq {
        PivotSeq {
            start: self.start,
            d: self.d,
            s: self.s,
        }
    }
}

/// `d_k = b_k - c_k d_{k-1}^{-1} c_k^T`, `s_k = r_k - c_k d_{k-1}^{-1} s_{k-1}`
/// over 0-based blocks `0..end`.
pub(crate) fn forward_sweep(sys: &BlockTriSystem, end: usize, stage: Stage) -> Result<Sweep> {
    let mut d = Vec::with_capacity(end);
    let mut s = Vec::with_capacity(end);
    let mut factors: Vec<Factor> = Vec::with_capacity(end);
    for j in 0..end {
        let (dj, sj) = if j == 0 || linalg::is_exact_zero(sys.c(j)) {
            (linalg::symmetrized(sys.b(j).clone()), sys.r(j).clone())
        } else {
            let c = sys.c(j);
            let prev = &factors[j - 1];
            let x_c = prev.solve(&c.transpose());
            let x_s = prev.solve(&s[j - 1]);
            let mut dj = sys.b(j) - c * x_c;
            linalg::symmetrize(&mut dj);
            (dj, sys.r(j) - c * x_s)
        };
        factors.push(linalg::factor_pivot(&dj, j + 1, stage)?);
        d.push(dj);
        s.push(sj);
    }
    Ok(Sweep {
        start: 0,
        d,
        s,
        factors,
    })
}

/// `d_k = b_k - c_{k+1}^T d_{k+1}^{-1} c_{k+1}`, `s_k = r_k - c_{k+1}^T d_{k+1}^{-1} s_{k+1}`
/// over 0-based blocks `start..N`, running from the last block upward.
pub(crate) fn backward_sweep(sys: &BlockTriSystem, start: usize, stage: Stage) -> Result<Sweep> {
    let big_n = sys.num_blocks();
    let count = big_n - start;
    let mut d = Vec::with_capacity(count);
    let mut s = Vec::with_capacity(count);
    let mut factors: Vec<Factor> = Vec::with_capacity(count);
    for j in (start..big_n).rev() {
        let (dj, sj) = if j + 1 == big_n || linalg::is_exact_zero(sys.c(j + 1)) {
            (linalg::symmetrized(sys.b(j).clone()), sys.r(j).clone())
        } else {
            let c = sys.c(j + 1);
            let next = factors.last().expect("previous backward factor");
            let x_c = next.solve(c);
            let x_s = next.solve(s.last().expect("previous backward rhs"));
            let mut dj = sys.b(j) - c.tr_mul(&x_c);
            linalg::symmetrize(&mut dj);
            (dj, sys.r(j) - c.tr_mul(&x_s))
        };
        factors.push(linalg::factor_pivot(&dj, j + 1, stage)?);
        d.push(dj);
        s.push(sj);
    }
    d.reverse();
    s.reverse();
    factors.reverse();
    Ok(Sweep {
        start,
        d,
        s,
        factors,
    })
}

/// Back-substitution upward from the last block of a forward sweep, given the
/// solution `last` for that block. Returns blocks `0..=sweep_end` in order.
pub(crate) fn substitute_upward(sys: &BlockTriSystem, sweep: &Sweep, last: Block) -> Vec<Block> {
    let len = sweep.d.len();
    let mut e = vec![Block::zeros(0, 0); len];
    e[len - 1] = last;
    for j in (0..len - 1).rev() {
        let rhs = &sweep.s[j] - sys.c(j + 1).tr_mul(&e[j + 1]);
        e[j] = sweep.factors[j].solve(&rhs);
    }
    e
}

/// Forward substitution downward from the first block of a backward sweep.
pub(crate) fn substitute_downward(sys: &BlockTriSystem, sweep: &Sweep, first: Block) -> Vec<Block> {
    let len = sweep.d.len();
    let mut e = Vec::with_capacity(len);
    e.push(first);
    for i in 1..len {
        let j = sweep.start + i;
        let rhs = &sweep.s[i] - sys.c(j) * &e[i - 1];
        e.push(sweep.factors[i].solve(&rhs));
    }
    e
}

pub(crate) fn zero_couplings(sys: &BlockTriSystem) -> Vec<usize> {
    sys.sub()
        .iter()
        .enumerate()
        .filter(|(_, c)| linalg::is_exact_zero(c))
        .map(|(i, _)| i + 2)
        .collect()
}

/// Forward block tridiagonal elimination (block Thomas algorithm).
pub fn fbt_solve(sys: &BlockTriSystem) -> Result<BlockSolution> {
    let big_n = sys.num_blocks();
    let sweep = forward_sweep(sys, big_n, Stage::Forward)?;
    let last = sweep.factors[big_n - 1].solve(&sweep.s[big_n - 1]);
    let e = substitute_upward(sys, &sweep, last);
    let mut trace = SolveTrace::empty(Direction::Forward);
    trace.forward = Some(sweep.into_seq());
    trace.zero_couplings = zero_couplings(sys);
    BlockSolution::finish(sys, e, trace)
}

/// Backward block tridiagonal elimination: eliminate from the last block
/// upward, then substitute from the first block downward.
pub fn bbt_solve(sys: &BlockTriSystem) -> Result<BlockSolution> {
    let sweep = backward_sweep(sys, 0, Stage::Backward)?;
    let first = sweep.factors[0].solve(&sweep.s[0]);
    let e = substitute_downward(sys, &sweep, first);
    let mut trace = SolveTrace::empty(Direction::Backward);
    trace.backward = Some(sweep.into_seq());
    trace.zero_couplings = zero_couplings(sys);
    BlockSolution::finish(sys, e, trace)
}
