//! Data-driven control of the five-node Laplacian network into a disk, across noise levels.

use ddlmi::cli::{eps_max, run_sweep, sweep_table, Scenario, SweepMode};
use ddlmi::synthesis::{Method, SynthesisOptions};

fn main() -> ddlmi::Result<()> {
    let scenario = Scenario::dt()?;
    let methods = Method::DATA_DRIVEN;
    let cells = run_sweep(&scenario, &scenario.grid, &methods, &[1, 2, 3], SweepMode::Fixed, &SynthesisOptions::default())?;
    print!("{}", sweep_table(&cells, &methods));
    for m in methods {
        let best = eps_max(&scenario.grid, |e| cells.iter().any(|c| c.method == m && c.eps == e && c.seed == 1 && c.feasible()));
        println!("{m}: largest feasible bound for seed 1 = {best:?}");
    }
    Ok(())
}
