//! Benchmark systems, experiment generation and closed-loop simulation.

use std::fmt::Write as _;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::consistency::{Domain, ExperimentData};
use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Number of RK4 substeps per sampling period.
pub const RK4_SUBSTEPS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub a: Mat,
    pub b: Mat,
    pub domain: Domain,
    pub label: String,
}

impl LinearSystem {
    pub fn new(a: Mat, b: Mat, domain: Domain, label: impl Into<String>) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || a.ncols() != n || b.nrows() != n || b.ncols() == 0 {
            return Err(Error::Dimension(format!(
                "A is {:?} and B is {:?}",
                a.shape(),
                b.shape()
            )));
        }
        Ok(Self { a, b, domain, label: label.into() })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    /// `A + B K`
    pub fn closed_loop(&self, k: &Mat) -> Result<Mat> {
        if k.shape() != (self.m(), self.n()) {
            return Err(Error::Dimension(format!(
                "K must be {}x{}, got {:?}",
                self.m(),
                self.n(),
                k.shape()
            )));
        }
        Ok(&self.a + &self.b * k)
    }
}

/// Continuous-time digital tape transport, five states and one input.
pub fn tape_transport() -> LinearSystem {
    #[rustfmt::skip]
    let a = Mat::from_row_slice(5, 5, &[
        0.0, 2.0, 0.0, 0.0, 0.0,
        -0.1, -0.35, 0.1, 0.1, 0.75,
        0.0, 0.0, 0.0, 2.0, 0.0,
        0.4, 0.4, -0.4, -1.4, 0.0,
        0.0, -0.03, 0.0, 0.0, -1.0,
    ]);
    let mut b = Mat::zeros(5, 1);
    b[(4, 0)] = 1.0;
    LinearSystem::new(a, b, Domain::ContinuousTime, "tape transport").expect("valid dimensions")
}

/// Laplacian of the five-node digraph used by [`laplacian_system`].
pub fn laplacian() -> Mat {
    #[rustfmt::skip]
    let l = Mat::from_row_slice(5, 5, &[
        1.0, 0.0, -1.0, 0.0, 0.0,
        -1.0, 1.0, 0.0, 0.0, 0.0,
        0.0, -1.0, 1.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 1.0, -1.0,
        -1.0, 0.0, 0.0, -1.0, 2.0,
    ]);
    l
}

/// Discrete-time consensus dynamics `A = I − L/2` driven at node 3.
pub fn laplacian_system() -> LinearSystem {
    let a = Mat::identity(5, 5) - laplacian() * 0.5;
    let mut b = Mat::zeros(5, 1);
    b[(2, 0)] = 1.0;
    LinearSystem::new(a, b, Domain::DiscreteTime, "laplacian").expect("valid dimensions")
}

fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_iterator(n, (0..n).map(|_| StandardNormal.sample(rng)))
}

/// Uniform sample of the closed ball of the given radius in `R^n`.
pub fn uniform_ball(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> DVector<f64> {
    if radius == 0.0 {
        return DVector::zeros(n);
    }
    let g = loop {
        let g = gaussian_vec(rng, n);
        if g.norm() > 0.0 {
            break g;
        }
    };
    let u: f64 = rng.random();
    &g / g.norm() * (radius * u.powf(1.0 / n as f64))
}

fn rk4_step(a: &Mat, x: &DVector<f64>, h: f64, f: impl Fn(f64) -> DVector<f64>) -> DVector<f64> {
    let k1 = a * x + f(0.0);
    let k2 = a * (x + &k1 * (0.5 * h)) + f(0.5 * h);
    let k3 = a * (x + &k2 * (0.5 * h)) + f(0.5 * h);
    let k4 = a * (x + &k3 * h) + f(h);
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Integrate `ẋ = A x + g(t)` over one period `ts` where `g` interpolates linearly from
/// `g0` to `g1`.
pub fn integrate_segment(
    a: &Mat,
    x: &DVector<f64>,
    g0: &DVector<f64>,
    g1: &DVector<f64>,
    ts: f64,
    substeps: usize,
) -> DVector<f64> {
    let h = ts / substeps as f64;
    let mut x = x.clone();
    for k in 0..substeps {
        let t0 = k as f64 * h;
        x = rk4_step(a, &x, h, |tau| {
            let w = (t0 + tau) / ts;
            g0 * (1.0 - w) + g1 * w
        });
    }
    x
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter("disturbance bound eps must be >= 0".into()));
    }
    Ok(())
}

/// Continuous-time experiment from the origin.
///
/// The input is the linear interpolation of standard Gaussian knots at the sampling
/// instants and the disturbance interpolates knots drawn uniformly from `|d| ≤ √ε`.
/// `X1` holds the exact derivative `A x(t_i) + B u(t_i) + d(t_i)`.
pub fn run_experiment_ct(
    sys: &LinearSystem,
    t: usize,
    ts: f64,
    input_seed: u64,
    dist_seed: u64,
    eps: f64,
) -> Result<ExperimentData> {
    if sys.domain != Domain::ContinuousTime {
        return Err(Error::Precondition("run_experiment_ct needs a continuous-time system".into()));
    }
    check_eps(eps)?;
    if t == 0 || !(ts > 0.0) {
        return Err(Error::InvalidParameter("need T >= 1 and Ts > 0".into()));
    }
    let (n, m) = (sys.n(), sys.m());
    let mut urng = ChaCha8Rng::seed_from_u64(input_seed);
    let mut drng = ChaCha8Rng::seed_from_u64(dist_seed);
    let u: Vec<DVector<f64>> = (0..=t).map(|_| gaussian_vec(&mut urng, m)).collect();
    let d: Vec<DVector<f64>> = (0..=t).map(|_| uniform_ball(&mut drng, n, eps.sqrt())).collect();
    let mut x0 = Mat::zeros(n, t);
    let mut x1 = Mat::zeros(n, t);
    let mut u0 = Mat::zeros(m, t);
    let mut x = DVector::zeros(n);
    for i in 0..t {
        x0.set_column(i, &x);
        u0.set_column(i, &u[i]);
        x1.set_column(i, &(&sys.a * &x + &sys.b * &u[i] + &d[i]));
        let g0 = &sys.b * &u[i] + &d[i];
        let g1 = &sys.b * &u[i + 1] + &d[i + 1];
        x = integrate_segment(&sys.a, &x, &g0, &g1, ts, RK4_SUBSTEPS);
    }
    ExperimentData::new(Domain::ContinuousTime, ts, u0, x0, x1)
}

/// Discrete-time experiment `x⁺ = A x + B u + d` from the origin.
pub fn run_experiment_dt(
    sys: &LinearSystem,
    t: usize,
    input_seed: u64,
    dist_seed: u64,
    eps: f64,
) -> Result<ExperimentData> {
    if sys.domain != Domain::DiscreteTime {
        return Err(Error::Precondition("run_experiment_dt needs a discrete-time system".into()));
    }
    check_eps(eps)?;
    if t == 0 {
        return Err(Error::InvalidParameter("need T >= 1".into()));
    }
    let (n, m) = (sys.n(), sys.m());
    let mut urng = ChaCha8Rng::seed_from_u64(input_seed);
    let mut drng = ChaCha8Rng::seed_from_u64(dist_seed);
    let mut x0 = Mat::zeros(n, t);
    let mut x1 = Mat::zeros(n, t);
    let mut u0 = Mat::zeros(m, t);
    let mut x = DVector::zeros(n);
    for i in 0..t {
        let u = gaussian_vec(&mut urng, m);
        let d = uniform_ball(&mut drng, n, eps.sqrt());
        x0.set_column(i, &x);
        u0.set_column(i, &u);
        x = &sys.a * &x + &sys.b * &u + d;
        x1.set_column(i, &x);
    }
    ExperimentData::new(Domain::DiscreteTime, 1.0, u0, x0, x1)
}

/// Run the experiment matching the system's domain.
pub fn run_experiment(
    sys: &LinearSystem,
    t: usize,
    ts: f64,
    input_seed: u64,
    dist_seed: u64,
    eps: f64,
) -> Result<ExperimentData> {
    match sys.domain {
        Domain::ContinuousTime => run_experiment_ct(sys, t, ts, input_seed, dist_seed, eps),
        Domain::DiscreteTime => run_experiment_dt(sys, t, input_seed, dist_seed, eps),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub time: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub inputs: Vec<DVector<f64>>,
}

impl Trajectory {
    /// CSV with header `t,x1..xn,u1..um`.
    pub fn to_csv(&self) -> String {
        let n = self.states.first().map_or(0, |x| x.len());
        let m = self.inputs.first().map_or(0, |u| u.len());
        let mut s = String::from("t");
        for i in 1..=n {
            let _ = write!(s, ",x{i}");
        }
        for i in 1..=m {
            let _ = write!(s, ",u{i}");
        }
        s.push('\n');
        for ((t, x), u) in self.time.iter().zip(&self.states).zip(&self.inputs) {
            let _ = write!(s, "{t}");
            for v in x.iter().chain(u.iter()) {
                let _ = write!(s, ",{v:e}");
            }
            s.push('\n');
        }
        s
    }
}

/// Response of `x° = (A + B K) x` from `x0` with no disturbance.
///
/// Continuous time uses RK4 with `RK4_SUBSTEPS` substeps per output step `dt` over
/// `[0, horizon]`; discrete time iterates `horizon` steps (`dt` is ignored).
pub fn closed_loop_response(
    sys: &LinearSystem,
    k: &Mat,
    x0: &DVector<f64>,
    horizon: f64,
    dt: f64,
) -> Result<Trajectory> {
    let acl = sys.closed_loop(k)?;
    if x0.len() != sys.n() {
        return Err(Error::Dimension(format!("x0 has length {}, expected {}", x0.len(), sys.n())));
    }
    let mut traj = Trajectory { time: Vec::new(), states: Vec::new(), inputs: Vec::new() };
    let mut x = x0.clone();
    let zero = DVector::zeros(sys.n());
    let (steps, step) = match sys.domain {
        Domain::ContinuousTime => {
            if !(dt > 0.0) {
                return Err(Error::InvalidParameter("output step dt must be > 0".into()));
            }
            ((horizon / dt).round() as usize, dt)
        }
        Domain::DiscreteTime => (horizon.round() as usize, 1.0),
    };
    for i in 0..=steps {
        traj.time.push(i as f64 * step);
        traj.inputs.push(k * &x);
        traj.states.push(x.clone());
        if i == steps {
            break;
        }
        x = match sys.domain {
            Domain::ContinuousTime => integrate_segment(&acl, &x, &zero, &zero, step, RK4_SUBSTEPS),
            Domain::DiscreteTime => &acl * &x,
        };
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tape_transport_entries() {
        let s = tape_transport();
        assert_eq!(s.a[(0, 1)], 2.0);
        assert_eq!(s.b[(4, 0)], 1.0);
        assert_eq!(s.b.sum(), 1.0);
    }

    #[test]
    fn laplacian_rows_sum_to_zero() {
        let l = laplacian();
        for i in 0..5 {
            assert_eq!(l.row(i).sum(), 0.0);
        }
        let s = laplacian_system();
        assert_eq!(s.domain, Domain::DiscreteTime);
        assert_eq!(s.a, Mat::identity(5, 5) - l * 0.5);
    }

    #[test]
    fn disturbance_knots_within_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            assert!(uniform_ball(&mut rng, 5, 0.3).norm() <= 0.3);
        }
    }

    #[test]
    fn dt_experiment_is_exact_without_noise() {
        let s = laplacian_system();
        let d = run_experiment_dt(&s, 30, 1, 2, 0.0).unwrap();
        let r = &d.x1 - &s.a * &d.x0 - &s.b * &d.u0;
        assert!(r.norm() < 1e-12 * d.x1.norm());
        assert_eq!(d.x0.column(1), d.x1.column(0));
    }

    #[test]
    fn seeded_runs_repeat() {
        let s = tape_transport();
        let a = run_experiment_ct(&s, 20, 0.1, 3, 4, 1e-4).unwrap();
        let b = run_experiment_ct(&s, 20, 0.1, 3, 4, 1e-4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_initial_state_stays_zero() {
        let s = tape_transport();
        let k = Mat::from_element(1, 5, -0.3);
        let tr = closed_loop_response(&s, &k, &DVector::zeros(5), 5.0, 0.1).unwrap();
        assert!(tr.states.iter().all(|x| x.norm() == 0.0));
        assert_eq!(tr.time.len(), 51);
        assert!(tr.to_csv().starts_with("t,x1,x2,x3,x4,x5,u1\n"));
    }
}
