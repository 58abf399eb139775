//! Three-block scalar system with coupling 120: the full matrix is nearly
//! singular, forward elimination inherits that, backward elimination does not.

use blocktri::sim;
use blocktri::spectral::{self, ProcessOnlySystem};
use blocktri::{bbt_solve, fbt_solve};

pub fn run() -> blocktri::Result<()> {
    let scenario = sim::toy_section6(false);
    let sys = scenario.system()?;
    let a = sys.assemble_dense()?;
    println!("A =\n{a}");

    let eig = spectral::sym_eig(&a)?;
    println!("lambda_min = {:e}, lambda_max = {:e}", eig.min(), eig.max());

    let fwd = fbt_solve(&sys)?;
    let bwd = bbt_solve(&sys)?;
    let pivots = |s: &blocktri::BlockSolution| -> Vec<f64> {
        s.trace.pivots().iter().map(|(_, _, d)| d[(0, 0)]).collect()
    };
    println!("forward pivots  {:?}", pivots(&fwd));
    println!("backward pivots {:?}", pivots(&bwd));

    let model = scenario.model.as_ref().expect("toy scenario carries its model");
    let wl = spectral::weakest_link(&ProcessOnlySystem::from_model(model)?.g)?;
    println!(
        "weakest link: bound {:.3}, suspect last block: {}, argmax block {:?}",
        wl.bound, wl.suspect_last_block, wl.argmax_block
    );

    let stab = sim::toy_section6(true).system()?;
    let lam = spectral::sym_eig(&stab.assemble_dense()?)?.min();
    println!("coupling 0.9 into the last block: lambda_min = {lam}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> blocktri::Result<()> {
    run()
}
