use ddlmi::linalg::Mat;
use ddlmi::sim::{integrate_segment, laplacian_system, run_experiment, tape_transport, RK4_SUBSTEPS};
use nalgebra::DVector;
use proptest::prelude::*;

/// `x(ts)` for `ẋ = A x + g0 + (g1 − g0) τ / ts` through the exponential of an augmented
/// generator with states `(x, g, ġ)`.
fn exact_segment(a: &Mat, x: &DVector<f64>, g0: &DVector<f64>, g1: &DVector<f64>, ts: f64) -> DVector<f64> {
    let n = a.nrows();
    let mut m = Mat::zeros(3 * n, 3 * n);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((0, n), (n, n)).fill_with_identity();
    m.view_mut((n, 2 * n), (n, n)).fill_with_identity();
    let mut xi = DVector::zeros(3 * n);
    xi.rows_mut(0, n).copy_from(x);
    xi.rows_mut(n, n).copy_from(g0);
    xi.rows_mut(2 * n, n).copy_from(&((g1 - g0) / ts));
    ((m * ts).exp() * xi).rows(0, n).into_owned()
}

proptest! {
    #[test]
    fn tape_transport_segments_match_the_exponential(
        x in prop::collection::vec(-2.0..2.0f64, 5),
        u0 in -2.0..2.0f64,
        u1 in -2.0..2.0f64,
        d in prop::collection::vec(-0.1..0.1f64, 10),
    ) {
        let sys = tape_transport();
        let x = DVector::from_vec(x);
        let g0 = &sys.b * DVector::from_element(1, u0) + DVector::from_row_slice(&d[..5]);
        let g1 = &sys.b * DVector::from_element(1, u1) + DVector::from_row_slice(&d[5..]);
        let rk = integrate_segment(&sys.a, &x, &g0, &g1, 0.1, RK4_SUBSTEPS);
        let exact = exact_segment(&sys.a, &x, &g0, &g1, 0.1);
        prop_assert!((&rk - &exact).norm() <= 1e-8 * exact.norm().max(1e-3));
    }
}

#[test]
fn experiments_are_deterministic_and_respect_the_bound() {
    let sys = tape_transport();
    let d1 = run_experiment(&sys, 30, 0.1, 1, 2, 1e-4).unwrap();
    let d2 = run_experiment(&sys, 30, 0.1, 1, 2, 1e-4).unwrap();
    assert_eq!(d1, d2);
    let noise = &d1.x1 - &sys.a * &d1.x0 - &sys.b * &d1.u0;
    for c in noise.column_iter() {
        assert!(c.norm_squared() <= 1e-4 * (1.0 + 1e-12));
    }

    let lap = laplacian_system();
    let d = run_experiment(&lap, 25, 1.0, 3, 4, 1e-5).unwrap();
    for i in 0..24 {
        assert_eq!(d.x0.column(i + 1), d.x1.column(i));
    }
    let noise = &d.x1 - &lap.a * &d.x0 - &lap.b * &d.u0;
    assert!(noise.column_iter().all(|c| c.norm_squared() <= 1e-5 * (1.0 + 1e-12)));
}
