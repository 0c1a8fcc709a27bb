//! LMI regions of the complex plane.
//!
//! A region is the set `{z : α + zβ + z̄βᵀ ≺ 0}` for a real symmetric `α` and a real `β`,
//! both `s x s`. Intersections are represented as ordered lists of regions and impose a
//! common certificate `P` in [`s_stability_check`].

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, from_rows, hermitian_max_eig, kron, to_rows, Mat, C64};
use crate::lmi::{scalarize, LmiConstraint, ScalarizeOptions, VariableSpace};
use crate::solve::{solve_feasibility, SolveOptions, SolveStatus};

#[derive(Debug, Clone, PartialEq)]
pub struct LmiRegion {
    s: usize,
    alpha: Mat,
    beta: Mat,
    label: String,
}

impl LmiRegion {
    pub fn new(alpha: Mat, beta: Mat, label: impl Into<String>) -> Result<Self> {
        let s = alpha.nrows();
        if s == 0 {
            return Err(Error::InvalidParameter("region dimension s must be at least 1".into()));
        }
        if alpha.ncols() != s || beta.nrows() != s || beta.ncols() != s {
            return Err(Error::Dimension(format!(
                "alpha is {}x{}, beta is {}x{}; both must be s x s",
                alpha.nrows(),
                alpha.ncols(),
                beta.nrows(),
                beta.ncols()
            )));
        }
        if alpha.iter().chain(beta.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("region data must be finite".into()));
        }
        if linalg::asymmetry(&alpha) > 1e-12 {
            return Err(Error::InvalidParameter("alpha must be symmetric".into()));
        }
        let alpha = linalg::symmetrize(&alpha);
        Ok(Self { s, alpha, beta, label: label.into() })
    }

    /// The open left halfplane, `s = 1`, `α = 0`, `β = 1`.
    pub fn hurwitz() -> Self {
        Self::new(Mat::zeros(1, 1), Mat::from_element(1, 1, 1.0), "hurwitz").expect("valid data")
    }

    /// The open unit disk.
    pub fn schur() -> Self {
        Self::new(
            -Mat::identity(2, 2),
            Mat::from_row_slice(2, 2, &[0.0, 0.0, -1.0, 0.0]),
            "schur",
        )
        .expect("valid data")
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn alpha(&self) -> &Mat {
        &self.alpha
    }

    pub fn beta(&self) -> &Mat {
        &self.beta
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `(λα, λβ)`; the point set is unchanged for `λ > 0`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter("scaling factor must be positive".into()));
        }
        Self::new(&self.alpha * lambda, &self.beta * lambda, self.label.clone())
    }

    /// Largest eigenvalue of the Hermitian matrix `α + zβ + z̄βᵀ`.
    pub fn max_eig_at(&self, z: C64) -> f64 {
        let (x, y) = (z.re, z.im);
        match self.s {
            1 => self.alpha[(0, 0)] + 2.0 * x * self.beta[(0, 0)],
            2 => {
                let b = &self.beta;
                let a = self.alpha[(0, 0)] + 2.0 * x * b[(0, 0)];
                let c = self.alpha[(1, 1)] + 2.0 * x * b[(1, 1)];
                let re = self.alpha[(0, 1)] + x * (b[(0, 1)] + b[(1, 0)]);
                let im = y * (b[(0, 1)] - b[(1, 0)]);
                0.5 * (a + c) + (0.25 * (a - c) * (a - c) + re * re + im * im).sqrt()
            }
            _ => {
                let re = &self.alpha + (&self.beta + self.beta.transpose()) * x;
                let im = (&self.beta - self.beta.transpose()) * y;
                hermitian_max_eig(&re, &im)
            }
        }
    }

    /// `−λ_max(α + zβ + z̄βᵀ)`; positive exactly inside the region.
    pub fn margin(&self, z: C64) -> f64 {
        -self.max_eig_at(z)
    }

    pub fn contains(&self, z: C64) -> bool {
        self.contains_with_tol(z, 0.0)
    }

    /// Membership with every eigenvalue below `−tol`.
    pub fn contains_with_tol(&self, z: C64, tol: f64) -> bool {
        self.max_eig_at(z) < -tol
    }

    /// `α⊗P + β⊗(AP) + βᵀ⊗(PAᵀ)`.
    pub fn characteristic_matrix(&self, a: &Mat, p: &Mat) -> Result<Mat> {
        let n = a.nrows();
        if a.ncols() != n || p.nrows() != n || p.ncols() != n {
            return Err(Error::Dimension(format!(
                "A is {}x{} and P is {}x{}",
                a.nrows(),
                a.ncols(),
                p.nrows(),
                p.ncols()
            )));
        }
        let ap = a * p;
        let m = kron(&self.alpha, p) + kron(&self.beta, &ap) + kron(&self.beta.transpose(), &ap.transpose());
        Ok(linalg::symmetrize(&m))
    }

    pub fn to_spec(&self) -> RegionSpec {
        RegionSpec::Raw {
            s: self.s,
            alpha: to_rows(&self.alpha),
            beta: to_rows(&self.beta),
            label: Some(self.label.clone()),
        }
    }
}

impl fmt::Display for LmiRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (s = {})", self.label, self.s)
    }
}

/// Non-empty ordered list of regions; a point belongs to it if it belongs to every member.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionIntersection {
    regions: Vec<LmiRegion>,
}

impl RegionIntersection {
    pub fn new(regions: Vec<LmiRegion>) -> Result<Self> {
        if regions.is_empty() {
            return Err(Error::InvalidParameter("a region intersection needs at least one region".into()));
        }
        Ok(Self { regions })
    }

    pub fn single(region: LmiRegion) -> Self {
        Self { regions: vec![region] }
    }

    pub fn regions(&self) -> &[LmiRegion] {
        &self.regions
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn margin(&self, z: C64) -> f64 {
        self.regions.iter().map(|r| r.margin(z)).fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, z: C64) -> bool {
        self.regions.iter().all(|r| r.contains(z))
    }

    pub fn label(&self) -> String {
        self.regions.iter().map(|r| r.label.as_str()).collect::<Vec<_>>().join(" + ")
    }

    /// Parse presets such as `wedge:0.3,2,0.5512` or `disk:-1,1+halfplane_left:-0.2`.
    pub fn from_preset(text: &str) -> Result<Self> {
        let mut regions = Vec::new();
        for part in text.split('+').map(str::trim).filter(|p| !p.is_empty()) {
            let (kind, params) = match part.split_once(':') {
                Some((k, p)) => (k.trim(), parse_params(p)?),
                None => (part, Vec::new()),
            };
            regions.extend(RegionSpec::Catalog { kind: kind.to_string(), params }.to_regions()?);
        }
        Self::new(regions)
    }

    pub fn from_specs(specs: &[RegionSpec]) -> Result<Self> {
        let mut regions = Vec::new();
        for s in specs {
            regions.extend(s.to_regions()?);
        }
        Self::new(regions)
    }

    /// Accepts a single spec object or an array of specs.
    pub fn from_json(text: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(text)?;
        let specs: Vec<RegionSpec> = if v.is_array() {
            serde_json::from_value(v)?
        } else {
            vec![serde_json::from_value(v)?]
        };
        Self::from_specs(&specs)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.regions.iter().map(LmiRegion::to_spec).collect::<Vec<_>>())
            .expect("region specs serialize")
    }
}

fn parse_params(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("cannot parse region parameter '{p}'")))
        })
        .collect()
}

/// JSON description of a region: a catalog entry or raw matrices (row-major).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum RegionSpec {
    Catalog {
        kind: String,
        #[serde(default)]
        params: Vec<f64>,
    },
    Raw {
        s: usize,
        alpha: Vec<Vec<f64>>,
        beta: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
}

impl RegionSpec {
    /// Catalog kinds yield one region, except `wedge` which yields three.
    pub fn to_regions(&self) -> Result<Vec<LmiRegion>> {
        match self {
            RegionSpec::Catalog { kind, params } if kind == "wedge" => {
                let [ell, rho, theta] = expect_params(kind, params)?;
                Ok(wedge_regions(ell, rho, theta)?.regions)
            }
            RegionSpec::Catalog { kind, params } => Ok(vec![make_region(kind, params)?]),
            RegionSpec::Raw { s, alpha, beta, label } => {
                let a = from_rows(alpha, *s)?;
                let b = from_rows(beta, *s)?;
                if a.nrows() != *s {
                    return Err(Error::Dimension(format!("alpha has {} rows but s = {s}", a.nrows())));
                }
                Ok(vec![LmiRegion::new(a, b, label.clone().unwrap_or_else(|| "custom".into()))?])
            }
        }
    }
}

fn expect_params<const N: usize>(kind: &str, params: &[f64]) -> Result<[f64; N]> {
    <[f64; N]>::try_from(params).map_err(|_| {
        Error::InvalidParameter(format!("region '{kind}' takes {N} parameters, got {}", params.len()))
    })
}

fn require(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg.into()))
    }
}

fn m2(a: f64, b: f64, c: f64, d: f64) -> Mat {
    Mat::from_row_slice(2, 2, &[a, b, c, d])
}

/// Catalog kinds and parameter order:
///
/// | kind | params | set |
/// |---|---|---|
/// | `hurwitz` | | `x < 0` |
/// | `schur` | | `|z| < 1` |
/// | `halfplane_left` | `l` | `x < l` (s = 1) |
/// | `halfplane_right` | `r` | `x > r` (s = 1) |
/// | `halfplane_left_s2` | `l` | `x < l` (s = 2) |
/// | `halfplane_right_s2` | `r` | `x > r` (s = 2) |
/// | `disk` | `x_d, r_d` | `(x − x_d)² + y² < r_d²` |
/// | `vstrip` | `l, r` | `l < x < r` |
/// | `hstrip` | `w` | `y² < w²` |
/// | `ellipse` | `x_e, μ1, μ2` | `(x − x_e)²/μ1² + y²/μ2² < 1` |
/// | `parabola_left` | `x_p, c_p` | `x < x_p − (c_p/2) y²` |
/// | `parabola_right` | `x_p, c_p` | `x > x_p + (c_p/2) y²` |
/// | `hyperbola_left` | `x_h, c_h` | `y² < c_h²(x² − x_h²), x < 0` |
/// | `hyperbola_right` | `x_h, c_h` | `y² < c_h²(x² − x_h²), x > 0` |
/// | `cone_left` (`cone`) | `x_c, θ` | `cos θ |y| < sin θ (x_c − x)` |
/// | `cone_right` | `x_c, θ` | `cos θ |y| < sin θ (x − x_c)` |
pub fn make_region(kind: &str, params: &[f64]) -> Result<LmiRegion> {
    if params.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidParameter(format!("region '{kind}' has a non-finite parameter")));
    }
    let label = if params.is_empty() {
        kind.to_string()
    } else {
        format!(
            "{kind}:{}",
            params.iter().map(|p| format!("{p}")).collect::<Vec<_>>().join(",")
        )
    };
    let one = |v: f64| Mat::from_element(1, 1, v);
    let (alpha, beta) = match kind {
        "hurwitz" => {
            expect_params::<0>(kind, params)?;
            (one(0.0), one(1.0))
        }
        "schur" => {
            expect_params::<0>(kind, params)?;
            (-Mat::identity(2, 2), m2(0.0, 0.0, -1.0, 0.0))
        }
        "halfplane_left" => {
            let [l] = expect_params(kind, params)?;
            (one(-l), one(0.5))
        }
        "halfplane_right" => {
            let [r] = expect_params(kind, params)?;
            (one(r), one(-0.5))
        }
        "halfplane_left_s2" => {
            let [l] = expect_params(kind, params)?;
            (m2(-l, 0.0, 0.0, -1.0), m2(0.5, 0.0, 0.0, 0.0))
        }
        "halfplane_right_s2" => {
            let [r] = expect_params(kind, params)?;
            (m2(r, 0.0, 0.0, -1.0), m2(-0.5, 0.0, 0.0, 0.0))
        }
        "disk" => {
            let [xd, rd] = expect_params(kind, params)?;
            require(rd > 0.0, "disk radius r_d must be > 0")?;
            (m2(-rd, xd, xd, -rd), m2(0.0, 0.0, -1.0, 0.0))
        }
        "vstrip" => {
            let [l, r] = expect_params(kind, params)?;
            require(l < r, "vertical strip needs l < r")?;
            (m2(-r, 0.0, 0.0, l), m2(0.5, 0.0, 0.0, -0.5))
        }
        "hstrip" => {
            let [w] = expect_params(kind, params)?;
            require(w > 0.0, "horizontal strip semiwidth w must be > 0")?;
            (m2(-w, 0.0, 0.0, -w), m2(0.0, 0.5, -0.5, 0.0))
        }
        "ellipse" => {
            let [xe, mu1, mu2] = expect_params(kind, params)?;
            require(mu1 > 0.0, "ellipse semiaxis mu1 must be > 0")?;
            require(mu2 > 0.0, "ellipse semiaxis mu2 must be > 0")?;
            (
                m2(-mu1 * mu1, xe * mu2, xe * mu2, -mu2 * mu2),
                m2(0.0, 0.5 * (mu1 - mu2), -0.5 * (mu1 + mu2), 0.0),
            )
        }
        "parabola_left" | "parabola_right" => {
            let [xp, cp] = expect_params(kind, params)?;
            require(cp > 0.0, "parabola curvature c_p must be > 0")?;
            let k = 0.5 * (cp / 2.0).sqrt();
            if kind == "parabola_left" {
                (m2(-1.0, 0.0, 0.0, -xp), m2(0.0, k, -k, 0.5))
            } else {
                (m2(-1.0, 0.0, 0.0, xp), m2(0.0, k, -k, -0.5))
            }
        }
        "hyperbola_left" | "hyperbola_right" => {
            let [xh, ch] = expect_params(kind, params)?;
            require(xh > 0.0, "hyperbola vertex x_h must be > 0")?;
            require(ch > 0.0, "hyperbola asymptote slope c_h must be > 0")?;
            let a = m2(0.0, ch * xh, ch * xh, 0.0);
            let c = if kind == "hyperbola_left" { ch } else { -ch };
            (a, m2(0.5 * c, 0.5, -0.5, 0.5 * c))
        }
        "cone_left" | "cone" => {
            let [xc, th] = expect_params(kind, params)?;
            require(th > 0.0 && th < PI / 2.0, "cone semiaperture theta must lie in (0, pi/2)")?;
            let (s, c) = th.sin_cos();
            (Mat::identity(2, 2) * (-s * xc), m2(0.5 * s, 0.5 * c, -0.5 * c, 0.5 * s))
        }
        "cone_right" => {
            let [xc, th] = expect_params(kind, params)?;
            require(th > 0.0 && th < PI / 2.0, "cone semiaperture theta must lie in (0, pi/2)")?;
            let (s, c) = th.sin_cos();
            (Mat::identity(2, 2) * (s * xc), m2(-0.5 * s, 0.5 * c, -0.5 * c, -0.5 * s))
        }
        _ => return Err(Error::InvalidParameter(format!("unknown region kind '{kind}'"))),
    };
    LmiRegion::new(alpha, beta, label)
}

/// Halfplane `x < −ℓ`, disk `|z| < ρ` and the left cone at the origin with semiaperture `θ`.
pub fn wedge_regions(ell: f64, rho: f64, theta: f64) -> Result<RegionIntersection> {
    require(ell > 0.0, "wedge decay rate ell must be > 0")?;
    require(rho > 0.0, "wedge radius rho must be > 0")?;
    require(theta > 0.0 && theta < PI / 2.0, "wedge angle theta must lie in (0, pi/2)")?;
    RegionIntersection::new(vec![
        make_region("halfplane_left_s2", &[-ell])?,
        make_region("disk", &[0.0, rho])?,
        make_region("cone_left", &[0.0, theta])?,
    ])
}

/// Disk used as a discrete-time performance specification.
pub fn dt_disk_spec(center_x: f64, radius: f64) -> Result<LmiRegion> {
    make_region("disk", &[center_x, radius])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankOneFactor {
    pub eta: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl RankOneFactor {
    pub fn eta_mat(&self) -> Mat {
        Mat::from_column_slice(self.eta.len(), 1, &self.eta)
    }

    pub fn gamma_mat(&self) -> Mat {
        Mat::from_column_slice(self.gamma.len(), 1, &self.gamma)
    }

    /// `η γᵀ`
    pub fn product(&self) -> Mat {
        self.eta_mat() * self.gamma_mat().transpose()
    }
}

/// True if `β = 0`, in which case the region is either empty or the whole plane.
pub fn is_constant_region(region: &LmiRegion) -> bool {
    region.beta.iter().all(|&v| v == 0.0)
}

/// Factor `β = η γᵀ` when `β` has numerical rank one.
pub fn rank_one_factor(region: &LmiRegion) -> Option<RankOneFactor> {
    if is_constant_region(region) {
        return None;
    }
    let svd = region.beta.clone().svd(false, true);
    let vt = svd.v_t?;
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    let (i1, s1) = (order[0], sv[order[0]]);
    if order.len() > 1 && sv[order[1]] > 1e-9 * s1 {
        return None;
    }
    let mut gamma: Vec<f64> = vt.row(i1).iter().copied().collect();
    let lead = gamma.iter().copied().fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
    if lead < 0.0 {
        gamma.iter_mut().for_each(|v| *v = -*v);
    }
    for v in gamma.iter_mut() {
        if v.abs() < 1e-15 {
            *v = 0.0;
        }
    }
    // η = β γ equals σ₁ u₁ for a unit right singular vector γ
    let g = Mat::from_column_slice(gamma.len(), 1, &gamma);
    let eta: Vec<f64> = (&region.beta * g).iter().copied().collect();
    Some(RankOneFactor { eta, gamma })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `x < bound`
    Left,
    /// `x > bound`
    Right,
}

impl Side {
    fn holds(self, x: f64, bound: f64) -> bool {
        match self {
            Side::Left => x < bound,
            Side::Right => x > bound,
        }
    }
}

/// Shape of an `s = 2` region with rank-one `β`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionClass {
    Empty,
    FullPlane,
    VerticalHalfplane { bound: f64, side: Side },
    VerticalStrip { left: f64, right: f64 },
    /// `(x − x0)² + y² < sigma`
    Disk { x0: f64, sigma: f64 },
    DiskHalfplaneIntersection { x0: f64, sigma: f64, bound: f64, side: Side },
}

impl RegionClass {
    pub fn contains(&self, z: C64) -> bool {
        let (x, y) = (z.re, z.im);
        let in_disk = |x0: f64, sigma: f64| (x - x0) * (x - x0) + y * y < sigma;
        match *self {
            RegionClass::Empty => false,
            RegionClass::FullPlane => true,
            RegionClass::VerticalHalfplane { bound, side } => side.holds(x, bound),
            RegionClass::VerticalStrip { left, right } => left < x && x < right,
            RegionClass::Disk { x0, sigma } => in_disk(x0, sigma),
            RegionClass::DiskHalfplaneIntersection { x0, sigma, bound, side } => {
                in_disk(x0, sigma) && side.holds(x, bound)
            }
        }
    }
}

/// Solution set in `x` of `a0 + a1 x < 0`: `(lower, upper)` open interval, or `None` if empty.
fn affine_interval(a0: f64, a1: f64, scale: f64) -> Option<(f64, f64)> {
    if a1.abs() <= 1e-12 * scale {
        return (a0 < 0.0).then_some((f64::NEG_INFINITY, f64::INFINITY));
    }
    let root = -a0 / a1;
    if a1 > 0.0 {
        Some((f64::NEG_INFINITY, root))
    } else {
        Some((root, f64::INFINITY))
    }
}

/// Classify an `s = 2` region whose `β` factors as `η γᵀ`.
///
/// Writing `z = x + jy`, the region is `M11 < 0` and `det M > 0` with
/// `M11 = α11 + 2x η1γ1` and
/// `det M = α11α22 − α12² + 2x(α11η2γ2 + α22η1γ1 − α12(η1γ2 + η2γ1)) − (x² + y²)(η1γ2 − η2γ1)²`.
pub fn classify_rank_one(region: &LmiRegion, factor: &RankOneFactor) -> Result<RegionClass> {
    if region.s != 2 || factor.eta.len() != 2 || factor.gamma.len() != 2 {
        return Err(Error::InvalidParameter("rank-one classification needs s = 2".into()));
    }
    let a = &region.alpha;
    let (e1, e2) = (factor.eta[0], factor.eta[1]);
    let (g1, g2) = (factor.gamma[0], factor.gamma[1]);
    let fscale = (e1 * e1 + e2 * e2).sqrt() * (g1 * g1 + g2 * g2).sqrt();
    if fscale == 0.0 {
        return Err(Error::InvalidParameter("degenerate rank-one factor".into()));
    }
    let (a11, a12, a22) = (a[(0, 0)], a[(0, 1)], a[(1, 1)]);
    let scale = a.norm().max(fscale).max(1.0);
    let det = e1 * g2 - e2 * g1;
    let c0 = a11 * a22 - a12 * a12;
    let c1 = a11 * e2 * g2 + a22 * e1 * g1 - a12 * (e1 * g2 + e2 * g1);
    // first-leading-minor condition: a11 + 2 x e1 g1 < 0
    let first = affine_interval(a11, 2.0 * e1 * g1, scale);

    if det.abs() <= 1e-10 * fscale {
        // det M = c0 + 2 c1 x > 0  ⇔  −c0 − 2 c1 x < 0
        let second = affine_interval(-c0, -2.0 * c1, scale * scale);
        let (Some((l1, u1)), Some((l2, u2))) = (first, second) else {
            return Ok(RegionClass::Empty);
        };
        let (lo, hi) = (l1.max(l2), u1.min(u2));
        return Ok(match (lo.is_finite(), hi.is_finite()) {
            _ if lo >= hi => RegionClass::Empty,
            (false, false) => RegionClass::FullPlane,
            (false, true) => RegionClass::VerticalHalfplane { bound: hi, side: Side::Left },
            (true, false) => RegionClass::VerticalHalfplane { bound: lo, side: Side::Right },
            (true, true) => RegionClass::VerticalStrip { left: lo, right: hi },
        });
    }

    let d2 = det * det;
    let x0 = c1 / d2;
    let sigma = (c0 * d2 + c1 * c1) / (d2 * d2);
    if sigma <= 0.0 {
        return Ok(RegionClass::Empty);
    }
    let r = sigma.sqrt();
    let Some((lo, hi)) = first else {
        return Ok(RegionClass::Empty);
    };
    let (dl, dr) = (x0 - r, x0 + r);
    Ok(if lo <= dl && dr <= hi {
        RegionClass::Disk { x0, sigma }
    } else if hi <= dl || lo >= dr {
        RegionClass::Empty
    } else if hi.is_finite() {
        RegionClass::DiskHalfplaneIntersection { x0, sigma, bound: hi, side: Side::Left }
    } else {
        RegionClass::DiskHalfplaneIntersection { x0, sigma, bound: lo, side: Side::Right }
    })
}

/// Two-disk inner approximation of a wedge.
#[derive(Debug, Clone)]
pub struct WedgeApprox {
    /// `|z| < ρ` and `|z − x_t| < |x_t| sin θ`.
    pub disks: RegionIntersection,
    pub x_t: f64,
    /// Area of the intersection of the two disks.
    pub area: f64,
    /// Right end `x_t (1 − sin θ)` of the tangent disk.
    pub right_end: f64,
    /// True when the right end lies at or left of `−ℓ`.
    pub right_end_ok: bool,
}

/// Area of the intersection of two disks with centers `d` apart.
pub fn disk_intersection_area(r1: f64, r2: f64, d: f64) -> f64 {
    let (big, small) = if r1 >= r2 { (r1, r2) } else { (r2, r1) };
    if d >= big + small {
        return 0.0;
    }
    if d <= big - small {
        return PI * small * small;
    }
    let c1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0);
    let c2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0);
    let k = ((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)).max(0.0);
    r1 * r1 * c1.acos() + r2 * r2 * c2.acos() - 0.5 * k.sqrt()
}

/// Area of `{|z| < ρ} ∩ {|z − x_t| < |x_t| sin θ}`.
pub fn tangent_disk_area(rho: f64, theta: f64, x_t: f64) -> f64 {
    disk_intersection_area(rho, x_t.abs() * theta.sin(), x_t.abs())
}

/// Golden-section maximization of a unimodal function on `[a, b]`.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Choose the disk tangent to the wedge's cone whose intersection with `|z| < ρ` has the
/// largest area, searching centers in `[−ρ/cos θ, −ρ/(1 + sin θ)]`.
pub fn inner_approx_wedge(ell: f64, rho: f64, theta: f64) -> Result<WedgeApprox> {
    require(ell > 0.0, "ell must be > 0")?;
    require(theta > 0.0 && theta < PI / 4.0, "theta must lie in (0, pi/4)")?;
    require(
        rho > ell * (3.0 + 2.0 * 2f64.sqrt()),
        "rho must exceed ell (3 + 2 sqrt 2)",
    )?;
    let (s, c) = theta.sin_cos();
    let lo = -rho / c;
    let hi = -rho / (1.0 + s);
    let f = |x: f64| tangent_disk_area(rho, theta, x);
    let n = 1000;
    let h = (hi - lo) / n as f64;
    let best = (0..=n)
        .map(|i| lo + h * i as f64)
        .max_by(|a, b| f(*a).total_cmp(&f(*b)))
        .expect("non-empty grid");
    let x_t = golden_max(f, (best - h).max(lo), (best + h).min(hi), 1e-10);
    let radius = x_t.abs() * s;
    let disks = RegionIntersection::new(vec![
        make_region("disk", &[0.0, rho])?,
        make_region("disk", &[x_t, radius])?,
    ])?;
    let right_end = x_t * (1.0 - s);
    Ok(WedgeApprox { disks, x_t, area: f(x_t), right_end, right_end_ok: right_end <= -ell })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityMode {
    Eigenvalue,
    Certificate,
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub stable: bool,
    pub eigenvalues: Vec<C64>,
    /// `margins[i][k]`: margin of eigenvalue `i` in region `k` (eigenvalue mode).
    pub margins: Vec<Vec<f64>>,
    /// Common certificate `P` (certificate mode, when found).
    pub certificate: Option<Mat>,
    pub solver_status: Option<SolveStatus>,
}

/// Decide whether every eigenvalue of `a` lies in every region of `target`.
pub fn s_stability_check(target: &RegionIntersection, a: &Mat, mode: StabilityMode) -> Result<StabilityReport> {
    let n = a.nrows();
    if a.ncols() != n || n == 0 {
        return Err(Error::Dimension("A must be square and non-empty".into()));
    }
    let eigenvalues = linalg::eigenvalues(a);
    match mode {
        StabilityMode::Eigenvalue => {
            let margins: Vec<Vec<f64>> = eigenvalues
                .iter()
                .map(|&z| target.regions.iter().map(|r| r.margin(z)).collect())
                .collect();
            let stable = margins.iter().flatten().all(|&m| m > 0.0);
            Ok(StabilityReport { stable, eigenvalues, margins, certificate: None, solver_status: None })
        }
        StabilityMode::Certificate => {
            let mut vs = VariableSpace::new();
            let p = vs.symmetric("P", n)?;
            let pe = vs.expr(p);
            let ap = pe.left_mul(a)?;
            let mut cons = vec![LmiConstraint::new("P > 0", pe.scale(-1.0))];
            for r in &target.regions {
                let m = pe.kron_left(&r.alpha).add(&crate::lmi::sym_kron_pair(&r.beta, &ap)?)?;
                cons.push(LmiConstraint::new(r.label.clone(), m));
            }
            let prob = scalarize(&cons, &vs, &ScalarizeOptions::default())?;
            let out = solve_feasibility(&prob, &SolveOptions::default());
            if out.status == SolveStatus::NumericalFailure {
                return Err(Error::Solver(format!(
                    "certificate search did not converge after {} iterations",
                    out.iterations
                )));
            }
            let stable = out.status == SolveStatus::Feasible;
            Ok(StabilityReport {
                stable,
                eigenvalues,
                margins: Vec::new(),
                certificate: stable.then(|| vs.value(p, &out.assignment)),
                solver_status: Some(out.status),
            })
        }
    }
}

/// Sample the boundary of a region intersection by casting rays from an interior point.
///
/// Directions in which no boundary is met within a large radius are skipped, so
/// unbounded regions yield open polylines.
pub fn boundary_points(target: &RegionIntersection, n_rays: usize) -> Result<Vec<C64>> {
    let center = interior_point(target)?;
    let reach = 1e3 * (1.0 + center.norm());
    let mut out = Vec::new();
    for k in 0..n_rays {
        let phi = 2.0 * PI * k as f64 / n_rays as f64;
        let dir = C64::new(phi.cos(), phi.sin());
        let inside = |r: f64| target.margin(center + dir * r) > 0.0;
        let mut hi = 1e-3;
        while inside(hi) && hi < reach {
            hi *= 2.0;
        }
        if inside(hi) {
            continue;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if inside(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-13 * hi.max(1.0) {
                break;
            }
        }
        out.push(center + dir * (0.5 * (lo + hi)));
    }
    Ok(out)
}

/// A point on the real axis near the middle of the region's real-axis section.
///
/// LMI regions are convex and symmetric about the real axis, so a non-empty region meets
/// the real axis in an interval.
pub fn interior_point(target: &RegionIntersection) -> Result<C64> {
    let n = 40_000;
    let (a, b) = (-100.0, 100.0);
    let h = (b - a) / n as f64;
    let inside: Vec<f64> = (0..=n)
        .map(|i| a + h * i as f64)
        .filter(|&x| target.margin(C64::new(x, 0.0)) > 0.0)
        .collect();
    match (inside.first(), inside.last()) {
        (Some(&l), Some(&r)) => Ok(C64::new(0.5 * (l + r), 0.0)),
        _ => Err(Error::InvalidParameter(
            "no interior point found on the real axis within [-100, 100]".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(x: f64, y: f64) -> C64 {
        C64::new(x, y)
    }

    #[test]
    fn unit_disk_data() {
        let d = make_region("disk", &[0.0, 1.0]).unwrap();
        assert_eq!(d.alpha(), &(-Mat::identity(2, 2)));
        assert_eq!(d.beta(), &m2(0.0, 0.0, -1.0, 0.0));
        assert_eq!(d.alpha(), LmiRegion::schur().alpha());
    }

    #[test]
    fn s1_halfplane_is_scaled_hurwitz() {
        let h = make_region("halfplane_left", &[0.0]).unwrap();
        assert_eq!(h.alpha()[(0, 0)], 0.0);
        assert_eq!(h.beta()[(0, 0)], 0.5);
        let hz = LmiRegion::hurwitz();
        assert_eq!(h.scaled(2.0).unwrap().beta(), hz.beta());
    }

    #[test]
    fn cone_at_quarter_pi() {
        let c = make_region("cone_left", &[0.0, PI / 4.0]).unwrap();
        let h = 2f64.sqrt() / 2.0;
        assert!(c.alpha().norm() < 1e-15);
        assert!((c.beta() * 2.0 - m2(h, h, -h, h)).norm() < 1e-15);
    }

    #[test]
    fn membership_basics() {
        let hz = LmiRegion::hurwitz();
        assert!(hz.contains(z(-1.0, 0.0)));
        assert!(!hz.contains(z(1.0, 0.0)));
        let d = make_region("disk", &[-1.0, 1.0]).unwrap();
        assert!(d.contains(z(-0.5, 0.5)));
        assert!(!LmiRegion::schur().contains(z(1.0, 0.0)));
    }

    #[test]
    fn parameter_validation_names_the_bound() {
        let e = make_region("disk", &[0.0, -1.0]).unwrap_err().to_string();
        assert!(e.contains("r_d"));
        assert!(make_region("vstrip", &[1.0, 0.0]).is_err());
        assert!(make_region("cone_left", &[0.0, 2.0]).is_err());
        assert!(make_region("nope", &[]).is_err());
        assert!(make_region("disk", &[0.0]).is_err());
    }

    #[test]
    fn rejects_asymmetric_alpha() {
        assert!(LmiRegion::new(m2(0.0, 1.0, 0.0, 0.0), Mat::zeros(2, 2), "x").is_err());
    }

    #[test]
    fn characteristic_matrix_cases() {
        let a = m2(1.0, 2.0, -3.0, 0.5);
        let p = m2(2.0, 0.3, 0.3, 1.0);
        let hz = LmiRegion::hurwitz();
        let m = hz.characteristic_matrix(&a, &p).unwrap();
        assert!((m - (&a * &p + &p * a.transpose())).norm() < 1e-14);
        // Schur with n = 1: [[−p, −ap], [−ap, −p]]
        let a1 = Mat::from_element(1, 1, 0.7);
        let p1 = Mat::from_element(1, 1, 2.0);
        let ms = LmiRegion::schur().characteristic_matrix(&a1, &p1).unwrap();
        assert!((ms - m2(-2.0, -1.4, -1.4, -2.0)).norm() < 1e-15);
        // A = 0, P = I → α ⊗ I
        let w = make_region("ellipse", &[-1.0, 2.0, 1.0]).unwrap();
        let m0 = w.characteristic_matrix(&Mat::zeros(2, 2), &Mat::identity(2, 2)).unwrap();
        assert!((m0 - kron(w.alpha(), &Mat::identity(2, 2))).norm() < 1e-15);
    }

    #[test]
    fn rank_one_factors() {
        let d = make_region("disk", &[-1.0, 1.0]).unwrap();
        let f = rank_one_factor(&d).unwrap();
        assert!((f.product() - d.beta()).norm() < 1e-12);
        assert_eq!(f.gamma, vec![1.0, 0.0]);
        assert_eq!(f.eta, vec![0.0, -1.0]);
        let h = rank_one_factor(&LmiRegion::hurwitz()).unwrap();
        assert_eq!((h.eta[0], h.gamma[0]), (1.0, 1.0));
        assert!(rank_one_factor(&make_region("cone_left", &[0.0, 0.7]).unwrap()).is_none());
        let flat = LmiRegion::new(-Mat::identity(2, 2), Mat::zeros(2, 2), "flat").unwrap();
        assert!(rank_one_factor(&flat).is_none());
        assert!(is_constant_region(&flat));
    }

    #[test]
    fn classify_disk() {
        let d = make_region("disk", &[-1.0, 1.0]).unwrap();
        let f = rank_one_factor(&d).unwrap();
        match classify_rank_one(&d, &f).unwrap() {
            RegionClass::Disk { x0, sigma } => {
                assert!((x0 + 1.0).abs() < 1e-12);
                assert!((sigma - 1.0).abs() < 1e-12);
            }
            other => panic!("unexpected class {other:?}"),
        }
    }

    #[test]
    fn classify_halfplane_and_empty() {
        let h = make_region("halfplane_left_s2", &[-0.3]).unwrap();
        let f = rank_one_factor(&h).unwrap();
        assert_eq!(
            classify_rank_one(&h, &f).unwrap(),
            RegionClass::VerticalHalfplane { bound: -0.3, side: Side::Left }
        );
        // disk data with a positive diagonal: completed square is negative
        let e = LmiRegion::new(m2(1.0, 0.0, 0.0, 1.0), m2(0.0, 0.0, -1.0, 0.0), "empty").unwrap();
        let f = rank_one_factor(&e).unwrap();
        assert_eq!(classify_rank_one(&e, &f).unwrap(), RegionClass::Empty);
    }

    #[test]
    fn wedge_membership() {
        let w = wedge_regions(0.3, 2.0, PI / 4.0).unwrap();
        assert!(w.contains(z(-1.0, 0.0)));
        assert!(!w.contains(z(-0.1, 0.0)));
        assert_eq!(w.len(), 3);
    }

    #[test]
    fn dt_disk() {
        let d = dt_disk_spec(0.47, 0.43).unwrap();
        assert!(d.contains(z(0.47, 0.0)));
        assert!(!d.contains(z(0.95, 0.0)));
    }

    #[test]
    fn presets_parse() {
        let w = RegionIntersection::from_preset("wedge:0.3,2,0.5512").unwrap();
        assert_eq!(w.len(), 3);
        let two = RegionIntersection::from_preset("disk:-1,1 + halfplane_left:-0.2").unwrap();
        assert_eq!(two.len(), 2);
        assert_eq!(RegionIntersection::from_preset("hurwitz").unwrap().len(), 1);
        assert!(RegionIntersection::from_preset("disk:a,b").is_err());
    }

    #[test]
    fn json_roundtrip() {
        let w = wedge_regions(0.3, 2.0, 0.5).unwrap();
        let text = w.to_json().to_string();
        let back = RegionIntersection::from_json(&text).unwrap();
        assert_eq!(back.len(), 3);
        for (a, b) in w.regions().iter().zip(back.regions()) {
            assert_eq!(a.alpha(), b.alpha());
            assert_eq!(a.beta(), b.beta());
        }
        let cat = RegionIntersection::from_json(r#"{"kind":"disk","params":[-1,1]}"#).unwrap();
        assert_eq!(cat.len(), 1);
    }

    #[test]
    fn lens_area_limits() {
        assert_eq!(disk_intersection_area(1.0, 1.0, 3.0), 0.0);
        assert!((disk_intersection_area(2.0, 1.0, 0.5) - PI).abs() < 1e-15);
        // two unit disks one radius apart
        let want = 2.0 * PI / 3.0 - 3f64.sqrt() / 2.0;
        assert!((disk_intersection_area(1.0, 1.0, 1.0) - want).abs() < 1e-12);
    }

    #[test]
    fn boundary_of_hurwitz_is_imaginary_axis() {
        let pts = boundary_points(&RegionIntersection::single(LmiRegion::hurwitz()), 64).unwrap();
        assert!(!pts.is_empty());
        assert!(pts.iter().all(|p| p.re.abs() < 1e-9));
    }

    #[test]
    fn stability_modes_trivial() {
        let hz = RegionIntersection::single(LmiRegion::hurwitz());
        let a = m2(-1.0, 0.0, 0.0, -2.0);
        for mode in [StabilityMode::Eigenvalue, StabilityMode::Certificate] {
            assert!(s_stability_check(&hz, &a, mode).unwrap().stable);
        }
        let osc = m2(0.0, 1.0, -1.0, 0.0);
        for mode in [StabilityMode::Eigenvalue, StabilityMode::Certificate] {
            assert!(!s_stability_check(&hz, &osc, mode).unwrap().stable);
        }
    }
}
