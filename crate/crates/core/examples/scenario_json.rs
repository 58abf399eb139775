//! Scenarios round-trip through JSON; solve traces and estimates export as CSV.

use blocktri::kalman;
use blocktri::sim::{random_model, Conditioning, MeasPattern, ModelParams, Scenario};
use blocktri::fbt_solve;

pub fn run() -> blocktri::Result<()> {
    let scenario = random_model(ModelParams {
        seed: 9,
        n: 2,
        big_n: 4,
        meas: MeasPattern::One,
        conditioning: Conditioning::IllLastBlock,
        singular_process: false,
    })?;
    let text = scenario.to_json()?;
    let back = Scenario::from_json(&text)?;
    assert_eq!(back.model, scenario.model);
    println!("{} ({} bytes of JSON)", back.name, text.len());

    let sol = fbt_solve(&back.system()?)?;
    let mut trace = Vec::new();
    sol.trace.write_csv(&mut trace)?;
    print!("{}", String::from_utf8_lossy(&trace));

    let mut est = Vec::new();
    kalman::write_estimates_csv(&sol.e, &mut est)?;
    print!("{}", String::from_utf8_lossy(&est));
    Ok(())
}

#[allow(dead_code)]
fn main() -> blocktri::Result<()> {
    run()
}
