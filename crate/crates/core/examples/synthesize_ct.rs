//! Place the tape transport's closed-loop eigenvalues in a wedge with every method.

use ddlmi::cli::Scenario;
use ddlmi::synthesis::{Method, SynthesisOptions};

fn main() -> ddlmi::Result<()> {
    let scenario = Scenario::ct()?;
    let data = scenario.experiment(1, scenario.default_eps)?;
    let inputs = scenario.inputs(data, scenario.default_eps);
    let opts = SynthesisOptions::default();
    for method in Method::ALL {
        let result = scenario.synthesize(method, &inputs, &opts)?;
        let report = result.report(&scenario.system.a, &scenario.system.b, &scenario.target)?;
        match &report.k {
            Some(k) => println!("{method}: {:?}, K = {k:.3?}", report.status),
            None => println!("{method}: {:?}", report.status),
        }
    }
    Ok(())
}
