//! Eigenvalue sandwich bounds for `E = g^T q^{-1} g` and the weakest-link
//! diagnosis on a chain whose last transition is large.

use blocktri::linalg::Block;
use blocktri::spectral::{self, ProcessOnlySystem};
use nalgebra::DMatrix;

fn chain(last: f64) -> blocktri::Result<ProcessOnlySystem> {
    let s = |x: f64| -> Block { DMatrix::from_element(1, 1, x) };
    ProcessOnlySystem::new(vec![s(1.0); 5], vec![s(0.5), s(0.5), s(0.5), s(last)], None)
}

pub fn run() -> blocktri::Result<()> {
    for last in [0.5, 0.9, 120.0] {
        let pos = chain(last)?;
        let rep = spectral::spectral_report(&pos)?;
        println!(
            "last = {last:>5}: lambda in [{:.4e}, {:.4e}], bounds {:?}..{:?}, condition bound {:?}",
            rep.lambda_min, rep.lambda_max, rep.bound_lower, rep.bound_upper, rep.condition_bound
        );
        let wl = spectral::weakest_link(&pos.g)?;
        if wl.suspect_last_block {
            println!("  last block suspected (argmax at block {:?})", wl.argmax_block);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> blocktri::Result<()> {
    run()
}
