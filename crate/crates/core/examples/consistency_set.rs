//! Collect noisy data from the tape transport and describe the set of consistent systems.

use ddlmi::consistency::{center_form, pointwise_forms, quadratic_form, DisturbanceModel};
use ddlmi::linalg;
use ddlmi::sim::{run_experiment, tape_transport};

fn main() -> ddlmi::Result<()> {
    let sys = tape_transport();
    let eps = 1e-5;
    let data = run_experiment(&sys, 200, 0.1, 1, 2, eps)?;
    println!("{} samples, n = {}, m = {}", data.t(), data.n(), data.m());

    let energy = DisturbanceModel::energy_from_eps(eps, data.n(), data.t())?;
    let q = quadratic_form(&data, &energy)?;
    println!("true system inside the energy set: {}", q.contains(&sys.a, &sys.b)?.inside);

    let cf = center_form(&q)?;
    let (a_c, b_c) = cf.center();
    println!("center error |A_c - A| = {:.2e}, |B_c - B| = {:.2e}", (a_c - &sys.a).norm(), (b_c - &sys.b).norm());
    println!("shape cond(A_c) = {:.2e}, radius |Q_c| = {:.2e}",
        linalg::max_eig(&cf.ac) / linalg::min_eig(&cf.ac), linalg::spectral_norm(&cf.qc));

    let pw = pointwise_forms(&data, &DisturbanceModel::Instantaneous { eps })?;
    println!("true system inside the pointwise set: {}", pw.contains(&sys.a, &sys.b)?);
    Ok(())
}
