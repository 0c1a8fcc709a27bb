//! Sampling-based validation of synthesized gains.
//!
//! Samples of the ellipsoidal set use `Υ = V diag(σ) Wᵀ` with Haar-random `V`, `W`; a
//! configurable fraction sits on the boundary (`σ = 1`). Samples of the pointwise set are
//! produced by hit-and-run started from a point found by cyclic projections; boundary
//! samples take the end of the chord instead of a uniform point on it.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::consistency::{pointwise_forms, split_zt, CenterForm, PointwiseForms, PointwiseTriple};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat, C64};
use crate::regions::RegionIntersection;
use crate::synthesis::{Method, SynthesisInputs, SynthesisResult};

/// Set of systems the gain is checked against.
#[derive(Debug, Clone, Copy)]
pub enum SampleSet<'a> {
    Ellipsoid(&'a CenterForm),
    /// Pointwise set, with an enclosing ellipsoid whose center seeds the search.
    Pointwise { forms: &'a PointwiseForms, enclosing: &'a CenterForm },
    /// A single known system.
    Nominal { a: &'a Mat, b: &'a Mat },
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub n_samples: usize,
    pub seed: u64,
    pub boundary_fraction: f64,
    /// Hit-and-run steps between recorded pointwise samples.
    pub mixing_steps: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { n_samples: 200, seed: 0, boundary_fraction: 0.5, mixing_steps: 10 }
    }
}

/// One sampled closed loop.
#[derive(Debug, Clone, Serialize)]
pub struct SampleRecord {
    pub boundary: bool,
    /// `[re, im]` pairs.
    pub eigenvalues: Vec<[f64; 2]>,
    pub min_margin: f64,
    /// Largest eigenvalue of the characteristic matrices at the sample (absent without `P`).
    pub certificate_residual: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub method: Option<Method>,
    pub set: &'static str,
    pub n_samples: usize,
    pub n_boundary: usize,
    pub n_stable: usize,
    pub fraction_stable: f64,
    pub min_margin: f64,
    pub worst_certificate_residual: Option<f64>,
    /// Every sample with a negative certificate residual is also stable by eigenvalues.
    pub certificate_consistent: bool,
    /// Largest pointwise-test eigenvalue over the samples (pointwise sets only).
    pub worst_pointwise_test: Option<f64>,
    #[serde(skip)]
    pub samples: Vec<SampleRecord>,
}

impl VerificationReport {
    pub fn all_stable(&self) -> bool {
        self.n_samples > 0 && self.n_stable == self.n_samples
    }

    /// `sample,boundary,re,im,min_margin`, one row per eigenvalue.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sample,boundary,re,im,min_margin\n");
        for (i, s) in self.samples.iter().enumerate() {
            for z in &s.eigenvalues {
                out.push_str(&format!("{i},{},{},{},{}\n", s.boundary as u8, z[0], z[1], s.min_margin));
            }
        }
        out
    }
}

/// `margins[i][k]`: margin of the `i`-th eigenvalue of `acl` in region `k`,
/// `−λmax(α + zβ + z̄βᵀ)`; positive strictly inside.
pub fn eig_region_margin(acl: &Mat, target: &RegionIntersection) -> Vec<Vec<f64>> {
    linalg::eigenvalues(acl)
        .into_iter()
        .map(|z| target.regions().iter().map(|r| r.margin(z)).collect())
        .collect()
}

/// Haar-distributed matrix with orthonormal columns.
fn random_orthonormal(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat {
    let g = Mat::from_fn(rows, cols, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // fix column signs so the distribution is Haar
    let mut q = q.columns(0, cols).into_owned();
    for j in 0..cols {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `Υ` with `‖Υ‖ ≤ 1`, all singular values equal to one when `boundary`.
pub fn sample_upsilon(rng: &mut ChaCha8Rng, rows: usize, cols: usize, boundary: bool) -> Mat {
    let k = rows.min(cols);
    let v = random_orthonormal(rng, rows, k);
    let w = random_orthonormal(rng, cols, k);
    let sigma = DVector::from_iterator(k, (0..k).map(|_| if boundary { 1.0 } else { rng.random::<f64>() }));
    v * Mat::from_diagonal(&sigma) * w.transpose()
}

fn n_boundary(opts: &VerifyOptions) -> usize {
    ((opts.n_samples as f64) * opts.boundary_fraction.clamp(0.0, 1.0)).round() as usize
}

/// `(A, B)` samples of the ellipsoid; the first `n_boundary` lie on its boundary.
pub fn sample_ellipsoid(cf: &CenterForm, opts: &VerifyOptions) -> Result<Vec<(Mat, Mat, bool)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let nb = n_boundary(opts);
    let (rows, cols) = cf.zc.shape();
    (0..opts.n_samples)
        .map(|i| {
            let ups = sample_upsilon(&mut rng, rows, cols, i < nb);
            let (a, b) = split_zt(&cf.sample(&ups)?, cf.n());
            Ok((a, b, i < nb))
        })
        .collect()
}

/// Closed form for `‖x° − Zᵀv‖² ≤ ε` when the triple has that shape.
struct Cylinder {
    xo: DVector<f64>,
    v: DVector<f64>,
    eps: f64,
}

fn as_cylinder(t: &PointwiseTriple) -> Option<Cylinder> {
    let n = t.c.nrows();
    let (k, _) = t.a.diagonal().argmax();
    let akk = t.a[(k, k)];
    if akk <= 0.0 {
        return None;
    }
    let v = t.a.column(k) / akk.sqrt();
    let vv = v.norm_squared();
    let xo = -(t.b.transpose() * &v) / vv;
    let rest = &xo * xo.transpose() - &t.c;
    let eps = rest.trace() / n as f64;
    let scale = 1.0 + t.a.norm() + t.b.norm() + t.c.norm();
    let tol = 1e-10 * scale;
    let ok = (&v * v.transpose() - &t.a).norm() <= tol
        && (-(&v * xo.transpose()) - &t.b).norm() <= tol
        && (rest - Mat::identity(n, n) * eps).norm() <= tol
        && eps >= 0.0;
    ok.then_some(Cylinder { xo, v, eps })
}

/// Chord of a convex set along `z + λ d`, given as a closure deciding membership.
fn bisect_end(inside: &dyn Fn(f64) -> bool, dir: f64) -> f64 {
    let mut hi = 1.0;
    while inside(dir * hi) && hi < 1e6 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if inside(dir * mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    dir * lo
}

/// Minimizer of `max_i ‖Zᵀv_i − x°_i‖ / √ε_i` by Lawson's reweighted least squares.
fn minimax_point(cyl: &[Cylinder]) -> Option<Mat> {
    let (p, n) = (cyl.first()?.v.len(), cyl.first()?.xo.len());
    let mut w = vec![1.0 / cyl.len() as f64; cyl.len()];
    let mut best: Option<(f64, Mat)> = None;
    for _ in 0..400 {
        let mut g = Mat::zeros(p, p);
        let mut h = Mat::zeros(n, p);
        for (c, &wi) in cyl.iter().zip(&w) {
            let s = wi / c.eps;
            g += &c.v * c.v.transpose() * s;
            h += &c.xo * c.v.transpose() * s;
        }
        let ridge = 1e-14 * g.trace().max(f64::MIN_POSITIVE);
        g += Mat::identity(p, p) * ridge;
        let zt = g.cholesky()?.solve(&h.transpose()).transpose();
        let r: Vec<f64> = cyl.iter().map(|c| (&zt * &c.v - &c.xo).norm() / c.eps.sqrt()).collect();
        let worst = r.iter().copied().fold(0.0, f64::max);
        if best.as_ref().is_none_or(|(b, _)| worst < *b) {
            best = Some((worst, zt.transpose()));
        }
        let total: f64 = w.iter().zip(&r).map(|(wi, ri)| wi * ri).sum();
        if !(total > 0.0) {
            break;
        }
        for (wi, ri) in w.iter_mut().zip(&r) {
            *wi *= ri / total;
        }
    }
    best.map(|(_, z)| z)
}

struct PointwiseSampler<'a> {
    forms: &'a PointwiseForms,
    cylinders: Option<Vec<Cylinder>>,
}

impl<'a> PointwiseSampler<'a> {
    fn new(forms: &'a PointwiseForms) -> Self {
        let cylinders = forms.items.iter().map(as_cylinder).collect::<Option<Vec<_>>>();
        Self { forms, cylinders }
    }

    fn tol(&self) -> f64 {
        1e-12
    }

    /// Start point via cyclic projections onto the cylinders, shrunk by `shrink`.
    ///
    /// Shrinking yields an interior start but can empty the set when the data are tight,
    /// so progressively milder factors are tried.
    fn start(&self, z0: &Mat) -> Result<Mat> {
        let Some(cyl) = &self.cylinders else {
            return if self.worst(z0) <= 0.0 {
                Ok(z0.clone())
            } else {
                Err(Error::Precondition("pointwise sampling needs a feasible start for general quadratic samples".into()))
            };
        };
        let inside = |zt: &Mat| cyl.iter().all(|c| (zt * &c.v - &c.xo).norm_squared() <= c.eps);
        let z0 = minimax_point(cyl).unwrap_or_else(|| z0.clone());
        if inside(&z0.transpose()) {
            return Ok(z0);
        }
        for shrink in [0.98, 0.999, 1.0 - 1e-6] {
            let mut zt = z0.transpose();
            for _ in 0..5_000 {
                let mut moved = false;
                for c in cyl {
                    let e = &zt * &c.v - &c.xo;
                    let r = shrink * c.eps.sqrt();
                    let en = e.norm();
                    if en > r {
                        zt -= &e * c.v.transpose() * ((en - r) / en / c.v.norm_squared());
                        moved = true;
                    }
                }
                if !moved || inside(&zt) {
                    return Ok(zt.transpose());
                }
            }
        }
        Err(Error::Numerical("cyclic projections did not reach the pointwise set".into()))
    }

    fn worst(&self, z: &Mat) -> f64 {
        self.forms
            .items
            .iter()
            .map(|t| linalg::max_eig(&t.evaluate(z)))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `[λ−, λ+]` with `z + λ d` inside.
    fn chord(&self, z: &Mat, d: &Mat) -> (f64, f64) {
        match &self.cylinders {
            Some(cyl) => {
                let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
                let (zt, dt) = (z.transpose(), d.transpose());
                for c in cyl {
                    let e = &zt * &c.v - &c.xo;
                    let g = &dt * &c.v;
                    let (qa, qb, qc) = (g.norm_squared(), 2.0 * e.dot(&g), e.norm_squared() - c.eps);
                    if qa <= 1e-300 {
                        continue;
                    }
                    let disc = (qb * qb - 4.0 * qa * qc).max(0.0).sqrt();
                    lo = lo.max((-qb - disc) / (2.0 * qa));
                    hi = hi.min((-qb + disc) / (2.0 * qa));
                }
                (lo.min(0.0), hi.max(0.0))
            }
            None => {
                let inside = |l: f64| self.worst(&(z + d * l)) <= self.tol();
                (bisect_end(&inside, -1.0), bisect_end(&inside, 1.0))
            }
        }
    }

    fn sample(&self, z0: &Mat, opts: &VerifyOptions) -> Result<Vec<(Mat, bool)>> {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let nb = n_boundary(opts);
        let mut z = self.start(z0)?;
        let (rows, cols) = z.shape();
        let mut out = Vec::with_capacity(opts.n_samples);
        for i in 0..opts.n_samples {
            let boundary = i < nb;
            for step in 0..opts.mixing_steps.max(1) {
                let mut d = Mat::from_fn(rows, cols, |_, _| rng.sample(StandardNormal));
                d /= d.norm();
                let (lo, hi) = self.chord(&z, &d);
                let last = step + 1 == opts.mixing_steps.max(1);
                if last && boundary {
                    let l = if rng.random::<bool>() { hi } else { lo };
                    out.push((&z + &d * (l * (1.0 - 1e-9)), true));
                } else {
                    z += &d * (lo + (hi - lo) * rng.random::<f64>());
                }
            }
            if !boundary {
                out.push((z.clone(), false));
            }
        }
        Ok(out)
    }
}

/// `(A, B)` samples of the pointwise set; the first `n_boundary` are on its boundary.
pub fn sample_pointwise(forms: &PointwiseForms, enclosing: &CenterForm, opts: &VerifyOptions) -> Result<Vec<(Mat, Mat, bool)>> {
    let sampler = PointwiseSampler::new(forms);
    Ok(sampler
        .sample(&enclosing.zc, opts)?
        .into_iter()
        .map(|(z, b)| {
            let (a, bm) = split_zt(&z.transpose(), forms.n);
            (a, bm, b)
        })
        .collect())
}

/// Check `A + BK` over sampled systems; `p` adds the certificate test.
pub fn verify_gain(
    k: &Mat,
    p: Option<&Mat>,
    set: SampleSet<'_>,
    target: &RegionIntersection,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let (systems, set_name) = match set {
        SampleSet::Ellipsoid(cf) => (sample_ellipsoid(cf, opts)?, "ellipsoid"),
        SampleSet::Pointwise { forms, enclosing } => (sample_pointwise(forms, enclosing, opts)?, "pointwise"),
        SampleSet::Nominal { a, b } => (vec![(a.clone(), b.clone(), false)], "nominal"),
    };
    let samples: Vec<SampleRecord> = systems
        .par_iter()
        .map(|(a, b, boundary)| -> Result<SampleRecord> {
            let acl = a + b * k;
            let eig = linalg::eigenvalues(&acl);
            let min_margin = eig.iter().map(|&z: &C64| target.margin(z)).fold(f64::INFINITY, f64::min);
            let certificate_residual = match p {
                Some(p) => {
                    let mut worst = f64::NEG_INFINITY;
                    for r in target.regions() {
                        worst = worst.max(linalg::max_eig(&r.characteristic_matrix(&acl, p)?));
                    }
                    Some(worst)
                }
                None => None,
            };
            Ok(SampleRecord {
                boundary: *boundary,
                eigenvalues: eig.iter().map(|z| [z.re, z.im]).collect(),
                min_margin,
                certificate_residual,
            })
        })
        .collect::<Result<_>>()?;
    let worst_pointwise_test = match set {
        SampleSet::Pointwise { forms, .. } => Some(
            systems
                .iter()
                .map(|(a, b, _)| forms.worst(a, b))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max),
        ),
        SampleSet::Ellipsoid(_) | SampleSet::Nominal { .. } => None,
    };
    let n_stable = samples.iter().filter(|s| s.min_margin > 0.0).count();
    let n = samples.len();
    Ok(VerificationReport {
        method: None,
        set: set_name,
        n_samples: n,
        n_boundary: samples.iter().filter(|s| s.boundary).count(),
        n_stable,
        fraction_stable: if n > 0 { n_stable as f64 / n as f64 } else { 0.0 },
        min_margin: samples.iter().map(|s| s.min_margin).fold(f64::INFINITY, f64::min),
        worst_certificate_residual: p.map(|_| {
            samples
                .iter()
                .filter_map(|s| s.certificate_residual)
                .fold(f64::NEG_INFINITY, f64::max)
        }),
        certificate_consistent: samples
            .iter()
            .all(|s| s.certificate_residual.is_none_or(|r| r >= 0.0 || s.min_margin > 0.0)),
        worst_pointwise_test,
        samples,
    })
}

/// Verify a feasible synthesis result over the given set.
pub fn verify_robust(
    result: &SynthesisResult,
    set: SampleSet<'_>,
    target: &RegionIntersection,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let k = result.gain()?;
    let mut report = verify_gain(k, Some(&result.p), set, target, opts)?;
    report.method = Some(result.method);
    Ok(report)
}

/// Verify a result against the set its method robustifies over: the nominal system for
/// [`Method::ModelBased`], the pointwise set for [`Method::SProcInstant`] and the ellipsoid
/// otherwise.
pub fn verify_synthesis(
    result: &SynthesisResult,
    inputs: &SynthesisInputs,
    target: &RegionIntersection,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    match result.method {
        Method::ModelBased => {
            let (a, b) = inputs.nominal_system()?;
            verify_robust(result, SampleSet::Nominal { a: &a, b: &b }, target, opts)
        }
        Method::SProcInstant => {
            let cf = inputs.center_form()?;
            let forms = pointwise_forms(&inputs.data, &inputs.model)?;
            verify_robust(result, SampleSet::Pointwise { forms: &forms, enclosing: &cf }, target, opts)
        }
        _ => verify_robust(result, SampleSet::Ellipsoid(&inputs.center_form()?), target, opts),
    }
}
