//! A random Kalman model solved five ways: the block solvers on its normal
//! equations and the classical filter/smoother recursions.

use blocktri::kalman::{self, LinearGaussianModel};
use blocktri::linalg::relative_diff;
use blocktri::sim::{random_model, MeasPattern, ModelParams};
use blocktri::Algorithm;

fn smoothers(model: &LinearGaussianModel) -> blocktri::Result<Vec<(&'static str, Vec<blocktri::linalg::Block>)>> {
    let sys = kalman::assemble_system(model)?;
    let mut out = Vec::new();
    for alg in Algorithm::ALL {
        out.push((alg.name(), alg.solve(&sys, false)?.e));
    }
    out.push(("rts", kalman::rts_smoother(model)?.0));
    out.push(("mayne", kalman::mayne_a_smoother(model)?.0));
    out.push(("mf-oracle", kalman::mf_smoother(model)?));
    Ok(out)
}

pub fn run() -> blocktri::Result<()> {
    let scenario = random_model(ModelParams::well(3, 3, 25, MeasPattern::Mixed))?;
    let model = scenario.model.as_ref().expect("random scenarios carry a model");
    let all = smoothers(model)?;
    let (_, reference) = &all[0];
    for (name, x) in &all {
        let grad = kalman::objective_gradient(model, x)?;
        println!(
            "{name:<10} vs fbt {:.2e}   |grad| {:.2e}",
            relative_diff(x, reference),
            blocktri::linalg::stacked_norm(&grad)
        );
    }

    kalman::rts_block_identities(model)?;
    kalman::mayne_block_identities(model)?;
    println!("forward and backward pivot identities hold");
    Ok(())
}

#[allow(dead_code)]
fn main() -> blocktri::Result<()> {
    run()
}
