//! Experiment data, disturbance models and the set of system matrices consistent with them.
//!
//! With `W = [X0; U0]` and `Zᵀ = [A B]`, a pair `(A, B)` is consistent with energy-bounded
//! data when `[I; Z]ᵀ [[C, Bᵀ], [B, A]] [I; Z] ⪯ 0`. Completing the square gives the matrix
//! ellipsoid `(Z − Zc)ᵀ A (Z − Zc) ⪯ Q` with center `Zc = −A⁻¹B` and radius
//! `Q = BᵀA⁻¹B − C`, or equivalently `Z = Zc + A^{-1/2} Υ Q^{1/2}` with `‖Υ‖ ≤ 1`.

use std::path::Path;

use nalgebra::Cholesky;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, from_rows, psd_sqrt, pd_inv_sqrt, symmetrize, to_rows, Mat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    #[serde(rename = "ct")]
    ContinuousTime,
    #[serde(rename = "dt")]
    DiscreteTime,
}

/// Measured inputs `U0` (m x T), states `X0` (n x T) and previews `X1` (n x T).
///
/// In continuous time `X1` holds state derivatives, in discrete time the successor states.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentData {
    pub domain: Domain,
    pub ts: f64,
    pub u0: Mat,
    pub x0: Mat,
    pub x1: Mat,
}

#[derive(Serialize, Deserialize)]
struct ExperimentFile {
    domain: Domain,
    #[serde(rename = "Ts")]
    ts: f64,
    n: usize,
    m: usize,
    #[serde(rename = "T")]
    t: usize,
    #[serde(rename = "U0")]
    u0: Vec<Vec<f64>>,
    #[serde(rename = "X0")]
    x0: Vec<Vec<f64>>,
    #[serde(rename = "X1")]
    x1: Vec<Vec<f64>>,
}

impl ExperimentData {
    pub fn new(domain: Domain, ts: f64, u0: Mat, x0: Mat, x1: Mat) -> Result<Self> {
        if !(ts > 0.0 && ts.is_finite()) {
            return Err(Error::InvalidParameter("sampling period Ts must be > 0".into()));
        }
        let t = x0.ncols();
        if t == 0 {
            return Err(Error::InvalidParameter("experiment has no samples".into()));
        }
        if u0.ncols() != t || x1.ncols() != t {
            return Err(Error::Dimension(format!(
                "column counts differ: U0 {}, X0 {}, X1 {}",
                u0.ncols(),
                t,
                x1.ncols()
            )));
        }
        if x1.nrows() != x0.nrows() || x0.nrows() == 0 || u0.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "X0 has {} rows, X1 has {}, U0 has {}",
                x0.nrows(),
                x1.nrows(),
                u0.nrows()
            )));
        }
        if u0.iter().chain(x0.iter()).chain(x1.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("experiment data must be finite".into()));
        }
        Ok(Self { domain, ts, u0, x0, x1 })
    }

    pub fn n(&self) -> usize {
        self.x0.nrows()
    }

    pub fn m(&self) -> usize {
        self.u0.nrows()
    }

    pub fn t(&self) -> usize {
        self.x0.ncols()
    }

    /// `[X0; U0]`
    pub fn regressor(&self) -> Mat {
        let (n, m, t) = (self.n(), self.m(), self.t());
        let mut w = Mat::zeros(n + m, t);
        w.view_mut((0, 0), (n, t)).copy_from(&self.x0);
        w.view_mut((n, 0), (m, t)).copy_from(&self.u0);
        w
    }

    /// First `t` samples.
    pub fn truncated(&self, t: usize) -> Result<Self> {
        if t == 0 || t > self.t() {
            return Err(Error::InvalidParameter(format!("cannot keep {t} of {} samples", self.t())));
        }
        Self::new(
            self.domain,
            self.ts,
            self.u0.columns(0, t).into_owned(),
            self.x0.columns(0, t).into_owned(),
            self.x1.columns(0, t).into_owned(),
        )
    }

    pub fn to_json(&self) -> String {
        let f = ExperimentFile {
            domain: self.domain,
            ts: self.ts,
            n: self.n(),
            m: self.m(),
            t: self.t(),
            u0: to_rows(&self.u0),
            x0: to_rows(&self.x0),
            x1: to_rows(&self.x1),
        };
        serde_json::to_string_pretty(&f).expect("experiment serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: ExperimentFile = serde_json::from_str(text)?;
        let data = Self::new(
            f.domain,
            f.ts,
            from_rows(&f.u0, f.t)?,
            from_rows(&f.x0, f.t)?,
            from_rows(&f.x1, f.t)?,
        )?;
        if data.n() != f.n || data.m() != f.m || data.t() != f.t {
            return Err(Error::Dimension(format!(
                "header says n = {}, m = {}, T = {} but matrices give n = {}, m = {}, T = {}",
                f.n,
                f.m,
                f.t,
                data.n(),
                data.m(),
                data.t()
            )));
        }
        Ok(data)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&crate::error::read_text(path.as_ref())?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankCheck {
    pub full_row_rank: bool,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

/// Full row rank test of `[X0; U0]` with threshold `1e-8 · σ_max`.
pub fn check_rank(data: &ExperimentData) -> RankCheck {
    let w = data.regressor();
    let rows = w.nrows();
    let sv = w.singular_values();
    let sigma_max = sv.iter().copied().fold(0.0, f64::max);
    let sigma_min = if data.t() < rows {
        0.0
    } else {
        sv.iter().copied().fold(f64::INFINITY, f64::min)
    };
    RankCheck { full_row_rank: sigma_min > 1e-8 * sigma_max, sigma_min, sigma_max }
}

/// Disturbance models. JSON uses `{"type": ..., ...}` with row-major matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DisturbanceModel {
    /// `D0 D0ᵀ ⪯ Δ Δᵀ`
    Energy {
        #[serde(rename = "Delta")]
        delta: Vec<Vec<f64>>,
    },
    /// `[I; D0ᵀ]ᵀ [[R, S], [Sᵀ, Q]] [I; D0ᵀ] ⪯ 0`
    EnergyQuadratic {
        #[serde(rename = "R")]
        r: Vec<Vec<f64>>,
        #[serde(rename = "S")]
        s: Vec<Vec<f64>>,
        #[serde(rename = "Q")]
        q: Vec<Vec<f64>>,
    },
    /// `|d(t_i)|² ≤ ε` at every sample
    Instantaneous { eps: f64 },
    /// `r + d s + sᵀ dᵀ + q d dᵀ ⪯ 0` at every sample, `s` a row vector
    InstantaneousQuadratic { r: Vec<Vec<f64>>, s: Vec<f64>, q: f64 },
}

impl DisturbanceModel {
    /// Energy model `Δ = √(T ε) I` implied by a per-sample bound `ε`.
    pub fn energy_from_eps(eps: f64, n: usize, t: usize) -> Result<Self> {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter("eps must be >= 0".into()));
        }
        let d = (t as f64 * eps).sqrt();
        Ok(DisturbanceModel::Energy { delta: to_rows(&(Mat::identity(n, n) * d)) })
    }

    pub fn is_energy(&self) -> bool {
        matches!(self, DisturbanceModel::Energy { .. } | DisturbanceModel::EnergyQuadratic { .. })
    }

    /// Energy relaxation of an instantaneous model over `t` samples.
    pub fn energy_relaxation(&self, n: usize, t: usize) -> Result<Self> {
        match self {
            DisturbanceModel::Instantaneous { eps } => Self::energy_from_eps(*eps, n, t),
            m if m.is_energy() => Ok(m.clone()),
            _ => Err(Error::Precondition(
                "only the plain instantaneous model has a built-in energy relaxation".into(),
            )),
        }
    }

    /// Check shapes against the data and definiteness of `Q` / `q`.
    pub fn validate(&self, n: usize, t: usize) -> Result<()> {
        match self {
            DisturbanceModel::Energy { delta } => {
                let d = from_rows(delta, 0)?;
                if d.nrows() != n {
                    return Err(Error::Dimension(format!("Delta has {} rows, expected n = {n}", d.nrows())));
                }
            }
            DisturbanceModel::EnergyQuadratic { r, s, q } => {
                let (r, s, q) = (from_rows(r, n)?, from_rows(s, n)?, from_rows(q, t)?);
                if r.shape() != (n, n) || s.shape() != (t, n) || q.shape() != (t, t) {
                    return Err(Error::Dimension(format!(
                        "expected R {n}x{n}, S {t}x{n}, Q {t}x{t}; got R {:?}, S {:?}, Q {:?}",
                        r.shape(),
                        s.shape(),
                        q.shape()
                    )));
                }
                if linalg::asymmetry(&r) > 1e-12 || linalg::asymmetry(&q) > 1e-12 {
                    return Err(Error::InvalidParameter("R and Q must be symmetric".into()));
                }
                if linalg::min_eig(&q) <= 0.0 {
                    return Err(Error::InvalidParameter("Q must be positive definite".into()));
                }
            }
            DisturbanceModel::Instantaneous { eps } => {
                if !(*eps >= 0.0 && eps.is_finite()) {
                    return Err(Error::InvalidParameter("eps must be >= 0".into()));
                }
            }
            DisturbanceModel::InstantaneousQuadratic { r, s, q } => {
                let r = from_rows(r, n)?;
                if r.shape() != (n, n) || s.len() != n {
                    return Err(Error::Dimension(format!("expected r {n}x{n} and s of length {n}")));
                }
                if linalg::asymmetry(&r) > 1e-12 {
                    return Err(Error::InvalidParameter("r must be symmetric".into()));
                }
                if !(*q > 0.0) {
                    return Err(Error::InvalidParameter("q must be > 0".into()));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// `C`, `B`, `A` of the quadratic description of the consistency set.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    pub cc: Mat,
    pub bc: Mat,
    pub ac: Mat,
}

impl QuadraticForm {
    pub fn n(&self) -> usize {
        self.cc.nrows()
    }

    pub fn m(&self) -> usize {
        self.ac.nrows() - self.cc.nrows()
    }

    fn scale(&self) -> f64 {
        (self.cc.norm() + self.bc.norm() + self.ac.norm()).max(1.0)
    }

    /// `[I; Z]ᵀ [[C, Bᵀ], [B, A]] [I; Z]` with `Zᵀ = [A_sys B_sys]`.
    pub fn evaluate(&self, a: &Mat, b: &Mat) -> Result<Mat> {
        let z = stack_z(a, b, self.n(), self.m())?;
        let bz = self.bc.transpose() * &z;
        Ok(symmetrize(&(&self.cc + &bz + bz.transpose() + z.transpose() * &self.ac * &z)))
    }

    /// Membership test with tolerance `1e-9` times the data scale.
    pub fn contains(&self, a: &Mat, b: &Mat) -> Result<Containment> {
        let max_eig = linalg::max_eig(&self.evaluate(a, b)?);
        let tol = 1e-9 * self.scale();
        Ok(Containment { inside: max_eig <= tol, max_eig, tol })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Containment {
    pub inside: bool,
    /// Largest eigenvalue of the quadratic test matrix; negative inside, zero on the boundary.
    pub max_eig: f64,
    pub tol: f64,
}

/// `Zᵀ = [A B]` as an `(n+m) x n` matrix `Z`.
pub fn stack_z(a: &Mat, b: &Mat, n: usize, m: usize) -> Result<Mat> {
    if a.shape() != (n, n) || b.shape() != (n, m) {
        return Err(Error::Dimension(format!(
            "expected A {n}x{n} and B {n}x{m}, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let mut zt = Mat::zeros(n, n + m);
    zt.view_mut((0, 0), (n, n)).copy_from(a);
    zt.view_mut((0, n), (n, m)).copy_from(b);
    Ok(zt.transpose())
}

/// Split `Zᵀ = [A B]` into `(A, B)`.
pub fn split_zt(zt: &Mat, n: usize) -> (Mat, Mat) {
    let m = zt.ncols() - n;
    (zt.columns(0, n).into_owned(), zt.columns(n, m).into_owned())
}

/// Build the quadratic form from energy-type data.
pub fn quadratic_form(data: &ExperimentData, model: &DisturbanceModel) -> Result<QuadraticForm> {
    let (n, t) = (data.n(), data.t());
    model.validate(n, t)?;
    let w = data.regressor();
    let x1 = &data.x1;
    match model {
        DisturbanceModel::Energy { delta } => {
            let d = from_rows(delta, 0)?;
            Ok(QuadraticForm {
                cc: symmetrize(&(x1 * x1.transpose() - &d * d.transpose())),
                bc: -(&w * x1.transpose()),
                ac: symmetrize(&(&w * w.transpose())),
            })
        }
        DisturbanceModel::EnergyQuadratic { r, s, q } => {
            let (r, s, q) = (from_rows(r, n)?, from_rows(s, n)?, from_rows(q, t)?);
            let x1s = x1 * &s;
            Ok(QuadraticForm {
                cc: symmetrize(&(&r + &x1s + x1s.transpose() + x1 * &q * x1.transpose())),
                bc: -(&w * (&s + &q * x1.transpose())),
                ac: symmetrize(&(&w * &q * w.transpose())),
            })
        }
        _ => Err(Error::Precondition(
            "the quadratic form needs an energy-type disturbance model".into(),
        )),
    }
}

/// Center, shape and radius of the consistency ellipsoid, plus the matrix roots used
/// for sampling.
#[derive(Debug, Clone)]
pub struct CenterForm {
    pub zc: Mat,
    pub ac: Mat,
    pub qc: Mat,
    ac_inv_sqrt: Mat,
    qc_sqrt: Mat,
}

impl CenterForm {
    /// Assemble from center, shape and radius directly.
    pub fn from_parts(zc: Mat, ac: Mat, qc: Mat) -> Result<Self> {
        let n = qc.nrows();
        if ac.nrows() != ac.ncols() || zc.shape() != (ac.nrows(), n) || qc.ncols() != n {
            return Err(Error::Dimension(format!(
                "center {:?}, shape {:?} and radius {:?} are incompatible",
                zc.shape(),
                ac.shape(),
                qc.shape()
            )));
        }
        let (ac, qc) = (symmetrize(&ac), symmetrize(&qc));
        Ok(Self { ac_inv_sqrt: pd_inv_sqrt(&ac)?, qc_sqrt: psd_sqrt(&qc), zc, ac, qc })
    }

    pub fn n(&self) -> usize {
        self.qc.nrows()
    }

    pub fn m(&self) -> usize {
        self.ac.nrows() - self.n()
    }

    /// `(A, B)` at the center.
    pub fn center(&self) -> (Mat, Mat) {
        split_zt(&self.zc.transpose(), self.n())
    }

    /// `Zᵀ` for `Z = Zc + A^{-1/2} Υ Q^{1/2}`, requiring `‖Υ‖ ≤ 1`.
    pub fn sample(&self, upsilon: &Mat) -> Result<Mat> {
        if upsilon.shape() != self.zc.shape() {
            return Err(Error::Dimension(format!(
                "Upsilon must be {:?}, got {:?}",
                self.zc.shape(),
                upsilon.shape()
            )));
        }
        let norm = linalg::spectral_norm(upsilon);
        if norm > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!("Upsilon has norm {norm} > 1")));
        }
        Ok((&self.zc + &self.ac_inv_sqrt * upsilon * &self.qc_sqrt).transpose())
    }

    /// `(Z − Zc)ᵀ A (Z − Zc) − Q`, whose largest eigenvalue is `≤ 0` inside the set.
    pub fn ellipsoid_residual(&self, a: &Mat, b: &Mat) -> Result<Mat> {
        let z = stack_z(a, b, self.n(), self.m())?;
        let d = z - &self.zc;
        Ok(symmetrize(&(d.transpose() * &self.ac * d - &self.qc)))
    }
}

/// Complete the square. Fails if `A` is not positive definite or if `Q` has an eigenvalue
/// below `−(1e-9 ‖Q‖ + 1e-12 ‖C‖)`; smaller negative eigenvalues are clipped in the square root.
pub fn center_form(q: &QuadraticForm) -> Result<CenterForm> {
    let ac = symmetrize(&q.ac);
    let Some(chol) = Cholesky::new(ac.clone()) else {
        let ev = linalg::sym_eigenvalues(&ac);
        return Err(Error::RankDeficient {
            sigma_min: ev.first().copied().unwrap_or(0.0).max(0.0).sqrt(),
            sigma_max: ev.last().copied().unwrap_or(0.0).max(0.0).sqrt(),
        });
    };
    let ev = linalg::sym_eigenvalues(&ac);
    if ev[0] <= 1e-14 * ev[ev.len() - 1] {
        return Err(Error::RankDeficient { sigma_min: ev[0].max(0.0).sqrt(), sigma_max: ev[ev.len() - 1].sqrt() });
    }
    let zc = -chol.solve(&q.bc);
    let qc = symmetrize(&(-(q.bc.transpose() * &zc) - &q.cc));
    let qev = linalg::sym_eigenvalues(&qc);
    let qnorm = qev.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    // the floor absorbs cancellation in BᵀA⁻¹B − C when the radius is (nearly) zero
    let tol = 1e-9 * qnorm + 1e-12 * q.cc.norm();
    if qev[0] < -tol {
        return Err(Error::InconsistentData { min_eig: qev[0], tol });
    }
    Ok(CenterForm { ac_inv_sqrt: pd_inv_sqrt(&ac)?, qc_sqrt: psd_sqrt(&qc), zc, ac, qc })
}

/// Per-sample quadratic data `(c_i, b_i, a_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointwiseTriple {
    pub c: Mat,
    pub b: Mat,
    pub a: Mat,
}

impl PointwiseTriple {
    /// `c + bᵀZ + Zᵀb + ZᵀaZ`
    pub fn evaluate(&self, z: &Mat) -> Mat {
        let bz = self.b.transpose() * z;
        symmetrize(&(&self.c + &bz + bz.transpose() + z.transpose() * &self.a * z))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointwiseForms {
    pub n: usize,
    pub m: usize,
    pub items: Vec<PointwiseTriple>,
}

impl PointwiseForms {
    fn scale(&self) -> f64 {
        self.items
            .iter()
            .map(|t| t.c.norm() + t.b.norm() + t.a.norm())
            .fold(1.0, f64::max)
    }

    /// Largest eigenvalue over all samples of the per-sample test matrix.
    pub fn worst(&self, a: &Mat, b: &Mat) -> Result<f64> {
        let z = stack_z(a, b, self.n, self.m)?;
        Ok(self
            .items
            .iter()
            .map(|t| linalg::max_eig(&t.evaluate(&z)))
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// True if `(A, B)` is consistent with every sample.
    pub fn contains(&self, a: &Mat, b: &Mat) -> Result<bool> {
        Ok(self.worst(a, b)? <= 1e-9 * self.scale())
    }

    /// Keep the first `t` samples.
    pub fn truncated(&self, t: usize) -> Self {
        Self { n: self.n, m: self.m, items: self.items.iter().take(t).cloned().collect() }
    }
}

/// Per-sample forms for instantaneous-type disturbance models.
pub fn pointwise_forms(data: &ExperimentData, model: &DisturbanceModel) -> Result<PointwiseForms> {
    let (n, m, t) = (data.n(), data.m(), data.t());
    model.validate(n, t)?;
    let w = data.regressor();
    let items = (0..t)
        .map(|i| {
            let xo = data.x1.column(i).into_owned();
            let v = w.column(i).into_owned();
            let vv = &v * v.transpose();
            match model {
                DisturbanceModel::Instantaneous { eps } => Ok(PointwiseTriple {
                    c: &xo * xo.transpose() - Mat::identity(n, n) * *eps,
                    b: -(&v * xo.transpose()),
                    a: vv,
                }),
                DisturbanceModel::InstantaneousQuadratic { r, s, q } => {
                    let r = from_rows(r, n)?;
                    let s = Mat::from_row_slice(1, n, s);
                    let xs = &xo * &s;
                    Ok(PointwiseTriple {
                        c: symmetrize(&(&r + &xs + xs.transpose() + &xo * xo.transpose() * *q)),
                        b: -(&v * (&s + xo.transpose() * *q)),
                        a: vv * *q,
                    })
                }
                _ => Err(Error::Precondition(
                    "pointwise forms need an instantaneous-type disturbance model".into(),
                )),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PointwiseForms { n, m, items })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_mat(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Mat {
        Mat::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
    }

    /// Discrete-time data `X1 = A X0 + B U0 + D0`.
    fn dataset(rng: &mut ChaCha8Rng, n: usize, m: usize, t: usize, dscale: f64) -> (ExperimentData, Mat, Mat, Mat) {
        let a = random_mat(rng, n, n);
        let b = random_mat(rng, n, m);
        let x0 = random_mat(rng, n, t);
        let u0 = random_mat(rng, m, t);
        let d0 = random_mat(rng, n, t) * dscale;
        let x1 = &a * &x0 + &b * &u0 + &d0;
        (ExperimentData::new(Domain::DiscreteTime, 1.0, u0, x0, x1).unwrap(), a, b, d0)
    }

    #[test]
    fn noiseless_center_is_true_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (data, a, b, _) = dataset(&mut rng, 3, 2, 20, 0.0);
        let q = quadratic_form(&data, &DisturbanceModel::energy_from_eps(0.0, 3, 20).unwrap()).unwrap();
        let cf = center_form(&q).unwrap();
        let (ac, bc) = cf.center();
        assert!((ac - &a).norm() < 1e-10);
        assert!((bc - &b).norm() < 1e-10);
        assert!(linalg::spectral_norm(&cf.qc) < 1e-8 * q.ac.norm());
        assert!(q.evaluate(&a, &b).unwrap().norm() < 1e-9);
    }

    #[test]
    fn quadratic_variant_matches_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (data, ..) = dataset(&mut rng, 2, 1, 8, 0.1);
        let delta = random_mat(&mut rng, 2, 2);
        let e = DisturbanceModel::Energy { delta: to_rows(&delta) };
        let eq = DisturbanceModel::EnergyQuadratic {
            r: to_rows(&-(&delta * delta.transpose())),
            s: to_rows(&Mat::zeros(8, 2)),
            q: to_rows(&Mat::identity(8, 8)),
        };
        let (a, b) = (quadratic_form(&data, &e).unwrap(), quadratic_form(&data, &eq).unwrap());
        assert!((a.cc - b.cc).norm() < 1e-12);
        assert!((a.bc - b.bc).norm() < 1e-12);
        assert!((a.ac - b.ac).norm() < 1e-12);
    }

    #[test]
    fn rank_deficient_data_rejected() {
        let x0 = Mat::from_fn(2, 5, |i, _| i as f64 + 1.0);
        let u0 = Mat::from_element(1, 5, 1.0);
        let data = ExperimentData::new(Domain::DiscreteTime, 1.0, u0, x0.clone(), x0).unwrap();
        assert!(!check_rank(&data).full_row_rank);
        let q = quadratic_form(&data, &DisturbanceModel::energy_from_eps(0.1, 2, 5).unwrap()).unwrap();
        assert!(matches!(center_form(&q), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn samples_are_contained_and_boundary_is_tight() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (data, ..) = dataset(&mut rng, 3, 1, 30, 0.05);
        let q = quadratic_form(&data, &DisturbanceModel::energy_from_eps(0.01, 3, 30).unwrap()).unwrap();
        let cf = center_form(&q).unwrap();
        let ups = random_mat(&mut rng, 4, 3);
        let ups = &ups / linalg::spectral_norm(&ups);
        let zt = cf.sample(&ups).unwrap();
        let (a, b) = split_zt(&zt, 3);
        let c = q.contains(&a, &b).unwrap();
        assert!(c.inside);
        assert!(c.max_eig.abs() <= 1e-7 * q.scale());
        assert!(cf.sample(&(ups * 1.1)).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (data, ..) = dataset(&mut rng, 2, 1, 4, 0.0);
        let back = ExperimentData::from_json(&data.to_json()).unwrap();
        assert_eq!(back, data);
        let m = DisturbanceModel::from_json(r#"{"type":"instantaneous","eps":0.5}"#).unwrap();
        assert_eq!(m, DisturbanceModel::Instantaneous { eps: 0.5 });
        let e = DisturbanceModel::from_json(r#"{"type":"energy","Delta":[[1,0],[0,1]]}"#).unwrap();
        assert!(e.is_energy());
    }

    #[test]
    fn pointwise_triples_have_rank_one_a() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (data, a, b, _) = dataset(&mut rng, 2, 1, 6, 0.0);
        let pw = pointwise_forms(&data, &DisturbanceModel::Instantaneous { eps: 0.0 }).unwrap();
        for t in &pw.items {
            let ev = linalg::sym_eigenvalues(&t.a);
            assert!(ev[ev.len() - 2].abs() < 1e-12);
        }
        assert!(pw.worst(&a, &b).unwrap().abs() < 1e-12);
    }
}
