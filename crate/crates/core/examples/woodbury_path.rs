//! When every step measures the full state, the problem can be rewritten as
//! a block tridiagonal system in the process noise.

use blocktri::kalman;
use blocktri::linalg::relative_diff;
use blocktri::sim::{random_model, MeasPattern, ModelParams};
use blocktri::spectral;

pub fn run() -> blocktri::Result<()> {
    let scenario = random_model(ModelParams::well(5, 2, 12, MeasPattern::Full))?;
    let model = scenario.model.as_ref().expect("random scenarios carry a model");

    let wb = kalman::woodbury_solve(model)?;
    let (rts, _) = kalman::rts_smoother(model)?;
    println!("woodbury vs rts: {:.2e}", relative_diff(&wb.estimates, &rts));

    let m = wb.intermediate.assemble_dense()?;
    let q_min = (0..model.num_steps())
        .map(|k| spectral::extreme_eigenvalues(model.q(k)).map(|(lo, _)| lo))
        .collect::<blocktri::Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    println!(
        "intermediate lambda_min {:.4}, smallest process eigenvalue {:.4}",
        spectral::sym_eig(&m)?.min(),
        q_min
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> blocktri::Result<()> {
    run()
}
