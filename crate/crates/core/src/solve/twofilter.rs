use std::thread;

use crate::error::{Result, Stage};
use crate::linalg::{self, Block};
use crate::system::BlockTriSystem;
use crate::trace::{Direction, SolveTrace};

use super::{backward_sweep, forward_sweep, zero_couplings, BlockSolution, Sweep};

/// Two-filter solve: full forward and backward eliminations, then the
/// independent per-block combination
/// `e_k = (d_k^f + d_k^b - b_k)^{-1} (s_k^f + s_k^b - r_k)`.
///
/// With `parallel`, the two sweeps run on two workers and the combination
/// loop is split between them.
pub fn twofilter_solve(sys: &BlockTriSystem, parallel: bool) -> Result<BlockSolution> {
    let big_n = sys.num_blocks();
    let parallel = parallel && big_n > 1;

    let (fwd, bwd) = if parallel {
        thread::scope(|scope| {
            let bwd = scope.spawn(|| backward_sweep(sys, 0, Stage::Backward));
            let fwd = forward_sweep(sys, big_n, Stage::Forward);
            (fwd, bwd.join().expect("backward worker panicked"))
        })
    } else {
        (
            forward_sweep(sys, big_n, Stage::Forward),
            backward_sweep(sys, 0, Stage::Backward),
        )
    };
    let (fwd, bwd) = (fwd?, bwd?);

    let (combined, e) = if parallel {
        let split = big_n / 2;
        let (lo, hi) = thread::scope(|scope| {
            let lo = scope.spawn(|| combine(sys, &fwd, &bwd, 0..split));
            let hi = combine(sys, &fwd, &bwd, split..big_n);
            (lo.join().expect("combination worker panicked"), hi)
        });
        let (mut c_lo, mut e_lo) = lo?;
        let (c_hi, e_hi) = hi?;
        c_lo.extend(c_hi);
        e_lo.extend(e_hi);
        (c_lo, e_lo)
    } else {
        combine(sys, &fwd, &bwd, 0..big_n)?
    };

    let mut trace = SolveTrace::empty(Direction::TwoFilter);
    trace.forward = Some(fwd.into_seq());
    trace.backward = Some(bwd.into_seq());
    trace.combined = Some(combined);
    trace.zero_couplings = zero_couplings(sys);
    BlockSolution::finish(sys, e, trace)
}

fn combine(
    sys: &BlockTriSystem,
    fwd: &Sweep,
    bwd: &Sweep,
    range: std::ops::Range<usize>,
) -> Result<(Vec<Block>, Vec<Block>)> {
    let mut combined = Vec::with_capacity(range.len());
    let mut e = Vec::with_capacity(range.len());
    for j in range {
        let mut m = &fwd.d[j] + (&bwd.d[j] - sys.b(j));
        linalg::symmetrize(&mut m);
        let rhs = &fwd.s[j] + (&bwd.s[j] - sys.r(j));
        let f = linalg::factor_pivot(&m, j + 1, Stage::Combined)?;
        e.push(f.solve(&rhs));
        combined.push(m);
    }
    Ok((combined, e))
}
