//! Check a synthesized gain against systems sampled from the consistency set.

use ddlmi::cli::Scenario;
use ddlmi::synthesis::{Method, SynthesisOptions};
use ddlmi::verify::{verify_synthesis, VerifyOptions};

fn main() -> ddlmi::Result<()> {
    let scenario = Scenario::dt()?;
    let data = scenario.experiment(4, scenario.default_eps)?;
    let inputs = scenario.inputs(data, scenario.default_eps);
    let opts = VerifyOptions { n_samples: 100, seed: 7, ..Default::default() };
    for method in [Method::Petersen, Method::SProcInstant] {
        let result = scenario.synthesize(method, &inputs, &SynthesisOptions::default())?;
        let report = verify_synthesis(&result, &inputs, &scenario.target, &opts)?;
        println!(
            "{method}: {}/{} sampled systems ({} on the boundary) in target, min margin {:.3e}, set {}",
            report.n_stable, report.n_samples, report.n_boundary, report.min_margin, report.set
        );
    }
    Ok(())
}
