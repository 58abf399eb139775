//! Two workers eliminate towards the middle, exchange one block, then
//! back-substitute outwards. The result does not depend on scheduling.

use std::time::Instant;

use blocktri::sim::random_system;
use blocktri::{hybrid_solve, twofilter_solve};

pub fn run_with(n: usize, big_n: usize) -> blocktri::Result<()> {
    let sys = random_system(11, n, big_n, 1, 1.0)?;

    let t = Instant::now();
    let par = hybrid_solve(&sys, true)?;
    let t_par = t.elapsed();
    let seq = hybrid_solve(&sys, false)?;
    assert_eq!(par.e, seq.e, "parallel and sequential hybrid must agree bitwise");

    let t = Instant::now();
    let two = twofilter_solve(&sys, true)?;
    let t_two = t.elapsed();

    let ex = par.trace.exchange.as_ref().expect("hybrid records its exchange");
    println!("n = {n}, N = {big_n}, exchange at block {}", ex.m);
    println!("hybrid    {:>10.3?}  residual {:.3e}", t_par, par.residual_norm);
    println!("twofilter {:>10.3?}  residual {:.3e}", t_two, two.residual_norm);
    Ok(())
}

pub fn run() -> blocktri::Result<()> {
    run_with(4, 20_000)
}

#[allow(dead_code)]
fn main() -> blocktri::Result<()> {
    run()
}
