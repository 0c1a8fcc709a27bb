//! Simulate the tape transport in closed loop with a data-driven gain.

use ddlmi::cli::Scenario;
use ddlmi::sim::closed_loop_response;
use ddlmi::synthesis::{Method, SynthesisOptions};
use nalgebra::DVector;

fn main() -> ddlmi::Result<()> {
    let scenario = Scenario::ct()?;
    let data = scenario.experiment(1, scenario.default_eps)?;
    let inputs = scenario.inputs(data, scenario.default_eps);
    let result = scenario.synthesize(Method::SProcInstant, &inputs, &SynthesisOptions::default())?;
    let k = result.gain()?;
    let x0 = DVector::from_element(scenario.system.n(), 1.0);
    let traj = closed_loop_response(&scenario.system, k, &x0, 20.0, 0.1)?;
    for (i, line) in traj.to_csv().lines().enumerate() {
        if i % 25 == 0 {
            println!("{line}");
        }
    }
    Ok(())
}
