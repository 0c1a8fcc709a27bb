//! Build LMI regions, test membership, factor rank-one regions and approximate a wedge.

use std::f64::consts::PI;

use ddlmi::linalg::C64;
use ddlmi::regions::{classify_rank_one, inner_approx_wedge, make_region, rank_one_factor, wedge_regions};

fn main() -> ddlmi::Result<()> {
    let disk = make_region("disk", &[-1.0, 1.0])?;
    for z in [C64::new(-0.5, 0.5), C64::new(0.5, 0.0)] {
        println!("{z} in {}: {} (margin {:.3})", disk.label(), disk.contains(z), disk.margin(z));
    }

    let factor = rank_one_factor(&disk).expect("disk beta has rank one");
    println!("beta = eta gamma^T with eta {:?}, gamma {:?}", factor.eta, factor.gamma);
    println!("class: {:?}", classify_rank_one(&disk, &factor)?);

    let cone = make_region("cone_left", &[0.0, PI / 4.0])?;
    println!("{} rank-one: {}", cone.label(), rank_one_factor(&cone).is_some());

    let (ell, rho, theta) = (0.3, 2.0, PI / 5.7);
    let wedge = wedge_regions(ell, rho, theta)?;
    let approx = inner_approx_wedge(ell, rho, theta)?;
    println!("wedge {} approximated by {}", wedge.label(), approx.disks.label());
    println!("tangent disk center {:.4}, lens area {:.4}, right end {:.4}", approx.x_t, approx.area, approx.right_end);
    Ok(())
}
