//! Meet-in-the-middle solver.
//!
//! Forward elimination covers blocks `1..=m`, backward elimination covers
//! `m+1..=N` with `m = floor(N/2)`. The halves meet once: the backward side
//! leads the exchange
//!
//! ```text
//! d^_m = d_m^f - c_{m+1}^T (d_{m+1}^b)^{-1} c_{m+1}
//! s^_m = s_m^f - c_{m+1}^T (d_{m+1}^b)^{-1} s_{m+1}^b
//! s^_{m+1} = s_{m+1}^b - c_{m+1} (d^_m)^{-1} s^_m
//! ```
//!
//! after which the system splits into an upper-bidiagonal forward half and a
//! lower-bidiagonal backward half that are back-substituted independently.

use std::sync::{Barrier, OnceLock};
use std::thread;

use nalgebra::DMatrix;

use crate::error::{Error, Result, Stage};
use crate::linalg::{self, Block, Factor};
use crate::system::BlockTriSystem;
use crate::trace::{Direction, Exchange, SolveTrace};

use super::{
    backward_sweep, fbt_solve, forward_sweep, substitute_downward, substitute_upward,
    zero_couplings, BlockSolution, Sweep,
};

struct ExchangeOut {
    d_hat: Block,
    s_hat: Block,
    s_hat_next: Block,
    e_left: Block,
    e_right: Block,
}

/// Both workers call this with identical inputs, so they agree bit for bit.
fn exchange(
    sys: &BlockTriSystem,
    m: usize,
    d_f: &Block,
    s_f: &Block,
    s_b: &Block,
    f_b: &Factor,
) -> Result<ExchangeOut> {
    // 0-based: forward half ends at m - 1, backward half starts at m
    let c = sys.c(m);
    let x_c = f_b.solve(c);
    let x_s = f_b.solve(s_b);
    let mut d_hat = d_f - c.tr_mul(&x_c);
    linalg::symmetrize(&mut d_hat);
    let s_hat = s_f - c.tr_mul(&x_s);
    let f_hat = linalg::factor_pivot(&d_hat, m, Stage::Exchange)?;
    let e_left = f_hat.solve(&s_hat);
    let s_hat_next = s_b - c * &e_left;
    let e_right = f_b.solve(&s_hat_next);
    Ok(ExchangeOut {
        d_hat,
        s_hat,
        s_hat_next,
        e_left,
        e_right,
    })
}

/// Meet-in-the-middle solve. `N = 1` delegates to [`fbt_solve`].
///
/// With `parallel`, exactly two workers run; they publish their boundary
/// pivots and meet at a single barrier before the exchange.
pub fn hybrid_solve(sys: &BlockTriSystem, parallel: bool) -> Result<BlockSolution> {
    let big_n = sys.num_blocks();
    if big_n == 1 {
        return fbt_solve(sys);
    }
    let m = big_n / 2;
    let (fwd, bwd, x, e) = if parallel {
        run_parallel(sys, m)?
    } else {
        run_sequential(sys, m)?
    };
    let mut trace = SolveTrace::empty(Direction::Hybrid);
    trace.forward = Some(fwd.into_seq());
    trace.backward = Some(bwd.into_seq());
    trace.exchange = Some(Exchange {
        m,
        d_hat: x.d_hat,
        s_hat: x.s_hat,
        s_hat_next: x.s_hat_next,
    });
    trace.zero_couplings = zero_couplings(sys);
    BlockSolution::finish(sys, e, trace)
}

type HalfResult = (Sweep, Sweep, ExchangeOut, Vec<Block>);

fn run_sequential(sys: &BlockTriSystem, m: usize) -> Result<HalfResult> {
    let fwd = forward_sweep(sys, m, Stage::ForwardHalf)?;
    let bwd = backward_sweep(sys, m, Stage::BackwardHalf)?;
    let x = exchange(sys, m, &fwd.d[m - 1], &fwd.s[m - 1], &bwd.s[0], &bwd.factors[0])?;
    let mut e = substitute_upward(sys, &fwd, x.e_left.clone());
    e.extend(substitute_downward(sys, &bwd, x.e_right.clone()));
    Ok((fwd, bwd, x, e))
}

/// Boundary blocks a worker publishes for its partner.
struct Boundary {
    d: Block,
    s: Block,
}

enum WorkerError {
    Own(Error),
    Partner,
}

fn run_parallel(sys: &BlockTriSystem, m: usize) -> Result<HalfResult> {
    let fwd_slot: OnceLock<Option<Boundary>> = OnceLock::new();
    let bwd_slot: OnceLock<Option<Boundary>> = OnceLock::new();
    let rendezvous = Barrier::new(2);

    let (fwd_res, bwd_res) = thread::scope(|scope| {
        let backward = scope.spawn(|| -> std::result::Result<_, WorkerError> {
            let sweep = backward_sweep(sys, m, Stage::BackwardHalf);
            let boundary = sweep.as_ref().ok().map(|sw| Boundary {
                d: sw.d[0].clone(),
                s: sw.s[0].clone(),
            });
            let _ = bwd_slot.set(boundary);
            rendezvous.wait();
            let sweep = sweep.map_err(WorkerError::Own)?;
            let Some(Some(partner)) = fwd_slot.get() else {
                return Err(WorkerError::Partner);
            };
            let x = exchange(sys, m, &partner.d, &partner.s, &sweep.s[0], &sweep.factors[0])
                .map_err(WorkerError::Own)?;
            let e = substitute_downward(sys, &sweep, x.e_right.clone());
            Ok((sweep, e))
        });

        let forward = (|| -> std::result::Result<_, WorkerError> {
            let sweep = forward_sweep(sys, m, Stage::ForwardHalf);
            let boundary = sweep.as_ref().ok().map(|sw| Boundary {
                d: sw.d[m - 1].clone(),
                s: sw.s[m - 1].clone(),
            });
            let _ = fwd_slot.set(boundary);
            rendezvous.wait();
            let sweep = sweep.map_err(WorkerError::Own)?;
            let Some(Some(partner)) = bwd_slot.get() else {
                return Err(WorkerError::Partner);
            };
            // same factorization the backward worker computed for this block
            let f_b = linalg::factor_pivot(&partner.d, m + 1, Stage::BackwardHalf)
                .map_err(WorkerError::Own)?;
            let x = exchange(sys, m, &sweep.d[m - 1], &sweep.s[m - 1], &partner.s, &f_b)
                .map_err(WorkerError::Own)?;
            let e = substitute_upward(sys, &sweep, x.e_left.clone());
            Ok((sweep, x, e))
        })();

        (forward, backward.join().expect("backward worker panicked"))
    });

    match (fwd_res, bwd_res) {
        (Ok((fwd, x, mut e)), Ok((bwd, e_b))) => {
            e.extend(e_b);
            Ok((fwd, bwd, x, e))
        }
        (Err(WorkerError::Own(err)), _) | (_, Err(WorkerError::Own(err))) => Err(err),
        _ => unreachable!("a worker can only abort because its partner failed"),
    }
}

/// Dense form of the system right after the exchange: the forward half is
/// upper block bidiagonal, the backward half lower block bidiagonal, and
/// blocks `m`, `m+1` are decoupled. Returns the matrix and its right-hand side.
pub fn post_exchange_dense(
    sys: &BlockTriSystem,
    trace: &SolveTrace,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (Some(fwd), Some(bwd), Some(x)) = (&trace.forward, &trace.backward, &trace.exchange)
    else {
        return Err(Error::DimensionMismatch(
            "trace does not come from the meet-in-the-middle solver".into(),
        ));
    };
    let n = sys.block_dim();
    let ell = sys.rhs_cols();
    let big_n = sys.num_blocks();
    let size = n * big_n;
    if size > crate::tolerances::DENSE_CAP {
        return Err(Error::SizeCapExceeded {
            size,
            cap: crate::tolerances::DENSE_CAP,
        });
    }
    let m = x.m;
    let mut a = DMatrix::zeros(size, size);
    let mut rhs = DMatrix::zeros(size, ell);
    for j in 0..m {
        let (d, s) = if j + 1 == m {
            (&x.d_hat, &x.s_hat)
        } else {
            (&fwd.d[j], &fwd.s[j])
        };
        a.view_mut((j * n, j * n), (n, n)).copy_from(d);
        rhs.view_mut((j * n, 0), (n, ell)).copy_from(s);
        if j + 1 < m {
            a.view_mut((j * n, (j + 1) * n), (n, n))
                .copy_from(&sys.c(j + 1).transpose());
        }
    }
    for j in m..big_n {
        let i = j - m;
        let s = if j == m { &x.s_hat_next } else { &bwd.s[i] };
        a.view_mut((j * n, j * n), (n, n)).copy_from(&bwd.d[i]);
        rhs.view_mut((j * n, 0), (n, ell)).copy_from(s);
        if j > m {
            a.view_mut((j * n, (j - 1) * n), (n, n)).copy_from(sys.c(j));
        }
    }
    Ok((a, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoupled_pair() {
        let b1 = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 4.0]);
        let b2 = DMatrix::from_row_slice(2, 2, &[5.0, 0.0, 0.0, 10.0]);
        let r = DMatrix::from_row_slice(2, 1, &[1.0, 2.0]);
        let sys = BlockTriSystem::new(
            vec![b1, b2],
            vec![DMatrix::zeros(2, 2)],
            vec![r.clone(), r.clone()],
        )
        .unwrap();
        for parallel in [false, true] {
            let sol = hybrid_solve(&sys, parallel).unwrap();
            assert!((&sol.e[0] - DMatrix::from_row_slice(2, 1, &[0.5, 0.5])).norm() < 1e-15);
            assert!((&sol.e[1] - DMatrix::from_row_slice(2, 1, &[0.2, 0.2])).norm() < 1e-15);
        }
    }

    #[test]
    fn single_block_delegates_to_forward() {
        let sys = BlockTriSystem::new(
            vec![DMatrix::from_element(1, 1, 4.0)],
            vec![],
            vec![DMatrix::from_element(1, 1, 2.0)],
        )
        .unwrap();
        let sol = hybrid_solve(&sys, true).unwrap();
        assert_eq!(sol.e[0][(0, 0)], 0.5);
        assert_eq!(sol.trace.direction, Direction::Forward);
    }

    #[test]
    fn failure_in_one_half_surfaces_in_both_modes() {
        // block 4 of 4 is indefinite, so the backward half fails first
        let one = DMatrix::from_element(1, 1, 1.0);
        let sys = BlockTriSystem::new(
            vec![one.clone(), one.clone(), one.clone(), -one.clone()],
            vec![DMatrix::from_element(1, 1, 0.1); 3],
            vec![one.clone(); 4],
        )
        .unwrap();
        for parallel in [false, true] {
            assert!(matches!(
                hybrid_solve(&sys, parallel),
                Err(Error::PivotNotPositiveDefinite {
                    k: 4,
                    stage: Stage::BackwardHalf,
                    ..
                })
            ));
        }
    }
}
