//! Controller-synthesis programs built on [`crate::lmi`] and solved by [`crate::solve`].
//!
//! Every program shares the decision variables `P = Pᵀ ≻ 0` (n×n) and `Y` (m×n) and returns
//! the gain `K = Y P⁻¹`. The data-driven programs guarantee that all eigenvalues of `A + BK`
//! lie in every target region for every `(A, B)` in the relevant consistency set.
//!
//! Before assembly the data matrices are divided by `‖Ac‖` (or, per sample, by the norm of
//! the sample's data block). All programs are homogeneous in the decision variables, so
//! this rescaling leaves the feasible set unchanged up to a positive factor.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::Cholesky;
use serde::{Deserialize, Serialize};

use crate::consistency::{
    center_form, pointwise_forms, quadratic_form, CenterForm, DisturbanceModel, ExperimentData,
    PointwiseForms, QuadraticForm,
};
use crate::error::{Error, Result};
use crate::linalg::{self, block, identity, kron, spectral_norm, Mat, C64};
use crate::lmi::{
    block2x2, scalarize, sym_kron_pair, AffineMatrixExpr, LmiConstraint, ScalarizeOptions,
    VarHandle, VariableSpace,
};
use crate::regions::{rank_one_factor, RegionIntersection};
use crate::solve::{solve_feasibility, SolveOptions, SolveOutcome, SolveStatus};

/// Multiplier count above which per-sample S-procedure programs attach a cost note.
pub const LARGE_MULTIPLIER_COUNT: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "model")]
    ModelBased,
    #[serde(rename = "petersen")]
    Petersen,
    #[serde(rename = "rank1")]
    RankOne,
    #[serde(rename = "sproc-energy")]
    SProcEnergy,
    #[serde(rename = "sproc-instant")]
    SProcInstant,
}

impl Method {
    pub const ALL: [Method; 5] =
        [Method::ModelBased, Method::Petersen, Method::RankOne, Method::SProcEnergy, Method::SProcInstant];

    pub const DATA_DRIVEN: [Method; 4] =
        [Method::Petersen, Method::RankOne, Method::SProcEnergy, Method::SProcInstant];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::ModelBased => "model",
            Method::Petersen => "petersen",
            Method::RankOne => "rank1",
            Method::SProcEnergy => "sproc-energy",
            Method::SProcInstant => "sproc-instant",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method '{s}'")))
    }
}

#[derive(Debug, Clone)]
pub struct SynthesisOptions {
    pub solve: SolveOptions,
    pub scalarize: ScalarizeOptions,
    /// Rescale data matrices to unit norm before assembly.
    pub normalize: bool,
    /// Solve in whitened state and input coordinates (see [`Coordinates`]).
    pub precondition: bool,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self { solve: SolveOptions::default(), scalarize: ScalarizeOptions::default(), normalize: true, precondition: true }
    }
}

#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub method: Method,
    pub p: Mat,
    pub y: Mat,
    /// `Y P⁻¹`, absent when `P` is not positive definite.
    pub k: Option<Mat>,
    /// Multipliers, region-major (`taus[region][sample]`).
    pub taus: Vec<Vec<f64>>,
    pub outcome: SolveOutcome,
    pub solve_seconds: f64,
    pub notes: Vec<String>,
}

impl SynthesisResult {
    pub fn status(&self) -> SolveStatus {
        self.outcome.status
    }

    pub fn is_feasible(&self) -> bool {
        self.outcome.status == SolveStatus::Feasible
    }

    /// Gain of a feasible result.
    pub fn gain(&self) -> Result<&Mat> {
        match (&self.k, self.is_feasible()) {
            (Some(k), true) => Ok(k),
            _ => Err(Error::Precondition(format!(
                "{} synthesis is {:?}, no certified gain",
                self.method, self.outcome.status
            ))),
        }
    }

    /// Summary record evaluated at a nominal `(A, B)`.
    pub fn report(&self, a: &Mat, b: &Mat, target: &RegionIntersection) -> Result<SynthesisReport> {
        let certified = self.is_feasible() || self.outcome.status == SolveStatus::Marginal;
        let (k, p, eig, margins) = match (&self.k, certified) {
            (Some(k), true) => {
                let acl = a + b * k;
                let eig = linalg::eigenvalues(&acl);
                let margins = eig.iter().map(|&z| target.margin(z)).collect();
                (Some(linalg::to_rows(k)), Some(linalg::to_rows(&self.p)), Some(eig), Some(margins))
            }
            _ => (None, None, None, None),
        };
        Ok(SynthesisReport {
            method: self.method,
            status: self.outcome.status,
            k,
            p,
            eig_closed_loop: eig.map(|v| v.iter().map(|z| [z.re, z.im]).collect()),
            margins,
            solver: SolverSummary {
                t: self.outcome.t,
                upper_bound: self.outcome.upper_bound,
                max_residual: self.outcome.max_residual,
                margin: self.outcome.margin,
                iterations: self.outcome.iterations,
                seconds: self.solve_seconds,
            },
            notes: self.notes.clone(),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverSummary {
    pub t: f64,
    pub upper_bound: f64,
    pub max_residual: f64,
    pub margin: f64,
    pub iterations: usize,
    pub seconds: f64,
}

/// JSON record of one synthesis run. `margins[i]` is the smallest region margin of the
/// `i`-th closed-loop eigenvalue (positive inside).
#[derive(Debug, Clone, Serialize)]
pub struct SynthesisReport {
    pub method: Method,
    pub status: SolveStatus,
    #[serde(rename = "K")]
    pub k: Option<Vec<Vec<f64>>>,
    #[serde(rename = "P")]
    pub p: Option<Vec<Vec<f64>>>,
    /// `[re, im]` pairs.
    pub eig_closed_loop: Option<Vec<[f64; 2]>>,
    pub margins: Option<Vec<f64>>,
    pub solver: SolverSummary,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// `K = Y P⁻¹` through a Cholesky solve.
pub fn recover_gain(p: &Mat, y: &Mat) -> Result<Mat> {
    if p.nrows() != p.ncols() || y.ncols() != p.nrows() {
        return Err(Error::Dimension(format!("P {:?} and Y {:?} are incompatible", p.shape(), y.shape())));
    }
    let chol = Cholesky::new(linalg::symmetrize(p))
        .ok_or_else(|| Error::Numerical("P is not positive definite".into()))?;
    Ok(chol.solve(&y.transpose()).transpose())
}

/// State and input coordinates `x = S x̃`, `u = R ũ` in which a program is solved.
///
/// The change of coordinates is a similarity transform of `A + BK`, so eigenvalue
/// placement is unaffected, and every program in this module transforms by congruence.
/// Whitening with the Cholesky factors of the regressor Gram blocks makes `Ac` well scaled.
#[derive(Debug, Clone)]
pub struct Coordinates {
    pub s: Mat,
    pub r: Mat,
}

impl Coordinates {
    pub fn identity(n: usize, m: usize) -> Self {
        Self { s: identity(n), r: identity(m) }
    }

    /// Cholesky factors of the diagonal blocks of the `(n+m)×(n+m)` Gram matrix `gram`.
    /// Blocks that are not positive definite fall back to identity.
    pub fn from_gram(gram: &Mat, n: usize) -> Self {
        let m = gram.nrows() - n;
        let factor = |b: Mat, k: usize| {
            let b = linalg::symmetrize(&b);
            let scale = b.trace() / k.max(1) as f64;
            if scale > 0.0 {
                if let Some(c) = Cholesky::new(b) {
                    return c.l();
                }
            }
            identity(k)
        };
        Self {
            s: factor(gram.view((0, 0), (n, n)).into_owned(), n),
            r: factor(gram.view((n, n), (m, m)).into_owned(), m),
        }
    }

    fn n(&self) -> usize {
        self.s.nrows()
    }

    fn t(&self) -> Mat {
        let (n, m) = (self.s.nrows(), self.r.nrows());
        let mut t = Mat::zeros(n + m, n + m);
        t.view_mut((0, 0), (n, n)).copy_from(&self.s);
        t.view_mut((n, n), (m, m)).copy_from(&self.r);
        t
    }

    fn inverses(&self) -> Result<(Mat, Mat)> {
        let si = self.s.clone().try_inverse().ok_or_else(|| Error::Numerical("singular state scaling".into()))?;
        let ti = self.t().try_inverse().ok_or_else(|| Error::Numerical("singular input scaling".into()))?;
        Ok((si, ti))
    }

    /// Quadratic data `(C, B, A)` in the new coordinates.
    pub fn quadratic(&self, c: &Mat, b: &Mat, a: &Mat) -> Result<(Mat, Mat, Mat)> {
        let (si, ti) = self.inverses()?;
        Ok((
            linalg::symmetrize(&(&si * c * si.transpose())),
            &ti * b * si.transpose(),
            linalg::symmetrize(&(&ti * a * ti.transpose())),
        ))
    }

    pub fn center_form(&self, cf: &CenterForm) -> Result<CenterForm> {
        let (si, ti) = self.inverses()?;
        CenterForm::from_parts(
            self.t().transpose() * &cf.zc * si.transpose(),
            &ti * &cf.ac * ti.transpose(),
            &si * &cf.qc * si.transpose(),
        )
    }

    pub fn system(&self, a: &Mat, b: &Mat) -> Result<(Mat, Mat)> {
        let (si, _) = self.inverses()?;
        Ok((&si * a * &self.s, &si * b * &self.r))
    }

    /// `(P, Y)` back in the original coordinates.
    pub fn restore(&self, p: &Mat, y: &Mat) -> (Mat, Mat) {
        debug_assert_eq!(p.nrows(), self.n());
        (linalg::symmetrize(&(&self.s * p * self.s.transpose())), &self.r * y * self.s.transpose())
    }
}

/// Shared variables and constraint list.
struct Program {
    vars: VariableSpace,
    p: VarHandle,
    y: VarHandle,
    pe: AffineMatrixExpr,
    /// `[P; Y]`
    py: AffineMatrixExpr,
    cons: Vec<LmiConstraint>,
    taus: Vec<Vec<VarHandle>>,
    notes: Vec<String>,
}

impl Program {
    fn new(n: usize, m: usize) -> Result<Self> {
        let mut vars = VariableSpace::new();
        let p = vars.symmetric("P", n)?;
        let y = vars.matrix("Y", m, n)?;
        let pe = vars.expr(p);
        let py = AffineMatrixExpr::vstack(&[pe.clone(), vars.expr(y)])?;
        let cons = vec![LmiConstraint::new("P > 0", pe.scale(-1.0))];
        Ok(Self { vars, p, y, pe, py, cons, taus: Vec::new(), notes: Vec::new() })
    }

    fn solve(self, method: Method, coords: &Coordinates, opts: &SynthesisOptions) -> Result<SynthesisResult> {
        let problem = scalarize(&self.cons, &self.vars, &opts.scalarize)?;
        let start = Instant::now();
        let outcome = solve_feasibility(&problem, &opts.solve);
        let solve_seconds = start.elapsed().as_secs_f64();
        let x = &outcome.assignment;
        let (mut p, mut y) = coords.restore(&self.vars.value(self.p, x), &self.vars.value(self.y, x));
        // (P, Y) certify placement up to a positive factor; keep λmin(P) above the margin
        let floor = outcome.margin / 2.0;
        let lmin = linalg::min_eig(&p);
        if lmin > 0.0 && lmin < floor {
            p *= floor / lmin;
            y *= floor / lmin;
        }
        let k = recover_gain(&p, &y).ok();
        let taus = self
            .taus
            .iter()
            .map(|hs| hs.iter().map(|&h| self.vars.value(h, x)[(0, 0)]).collect())
            .collect();
        Ok(SynthesisResult { method, p, y, k, taus, outcome, solve_seconds, notes: self.notes })
    }
}

fn check_target(target: &RegionIntersection) -> Result<()> {
    if target.is_empty() {
        return Err(Error::InvalidParameter("target has no regions".into()));
    }
    Ok(())
}

/// Model-based design: `αᵢ⊗P + Tr-sym{βᵢ⊗(AP+BY)} ≺ 0` for every region.
pub fn model_based(a: &Mat, b: &Mat, target: &RegionIntersection, opts: &SynthesisOptions) -> Result<SynthesisResult> {
    check_target(target)?;
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::Dimension(format!("A {:?} and B {:?} are incompatible", a.shape(), b.shape())));
    }
    let coords = Coordinates::identity(n, b.ncols());
    let mut prog = Program::new(n, b.ncols())?;
    let ab = prog.py.left_mul(&block(&[vec![a, b]])?)?;
    for r in target.regions() {
        let m = prog.pe.kron_left(r.alpha()).add(&sym_kron_pair(r.beta(), &ab)?)?;
        prog.cons.push(LmiConstraint::new(r.label(), m));
    }
    prog.solve(Method::ModelBased, &coords, opts)
}

fn coordinates_for(gram: &Mat, n: usize, opts: &SynthesisOptions) -> Coordinates {
    if opts.precondition {
        Coordinates::from_gram(gram, n)
    } else {
        Coordinates::identity(n, gram.nrows() - n)
    }
}

/// Center form in solver coordinates with `(Qc, Ac)` divided by `‖Ac‖`.
fn prepared_center(cf: &CenterForm, opts: &SynthesisOptions) -> Result<(Coordinates, Mat, Mat, Mat)> {
    let coords = coordinates_for(&cf.ac, cf.n(), opts);
    let t = coords.center_form(cf)?;
    let s = if opts.normalize { 1.0 / spectral_norm(&t.ac) } else { 1.0 };
    Ok((coords, t.zc, &t.qc * s, &t.ac * s))
}

/// Robust design over the matrix ellipsoid via Petersen's lemma, one block per region.
pub fn synth_petersen(cf: &CenterForm, target: &RegionIntersection, opts: &SynthesisOptions) -> Result<SynthesisResult> {
    check_target(target)?;
    let (n, m) = (cf.n(), cf.m());
    let (coords, zc, qc, ac) = prepared_center(cf, opts)?;
    let mut prog = Program::new(n, m)?;
    let ab = prog.py.left_mul(&zc.transpose())?;
    for r in target.regions() {
        let s = r.s();
        let is = identity(s);
        let top = prog
            .pe
            .kron_left(r.alpha())
            .add(&sym_kron_pair(r.beta(), &ab)?)?
            .add_constant(&kron(&(r.beta() * r.beta().transpose()), &qc))?;
        let lower = prog.py.kron_left(&is);
        let bottom = AffineMatrixExpr::from_constant(-kron(&is, &ac));
        prog.cons.push(LmiConstraint::new(r.label(), block2x2(&top, &lower, &bottom)?));
    }
    prog.solve(Method::Petersen, &coords, opts)
}

/// Exact robust design for regions with `β = ηγᵀ`.
///
/// Fails with [`Error::NoRankOneFactor`] naming the first region without such a factor.
pub fn synth_rank_one(cf: &CenterForm, target: &RegionIntersection, opts: &SynthesisOptions) -> Result<SynthesisResult> {
    check_target(target)?;
    let (n, m) = (cf.n(), cf.m());
    let factors = target
        .regions()
        .iter()
        .map(|r| rank_one_factor(r).ok_or_else(|| Error::NoRankOneFactor(r.label().to_string())))
        .collect::<Result<Vec<_>>>()?;
    let (coords, zc, qc, ac) = prepared_center(cf, opts)?;
    let mut prog = Program::new(n, m)?;
    let in_ = identity(n);
    let zct = zc.transpose();
    for (r, f) in target.regions().iter().zip(&factors) {
        let eta_i = kron(&f.eta_mat(), &in_);
        let gpy = prog.py.kron_left(&f.gamma_mat().transpose());
        let cross = gpy.left_mul(&(&eta_i * &zct))?.tr_sym()?;
        let top = prog
            .pe
            .kron_left(r.alpha())
            .add(&cross)?
            .add_constant(&(&eta_i * &qc * eta_i.transpose()))?;
        let bottom = AffineMatrixExpr::from_constant(-ac.clone());
        prog.cons.push(LmiConstraint::new(r.label(), block2x2(&top, &gpy, &bottom)?));
    }
    prog.solve(Method::RankOne, &coords, opts)
}

/// `[[α⊗P, (β⊗[P;Y])ᵀ], [β⊗[P;Y], 0]]`
fn sproc_base(prog: &Program, alpha: &Mat, beta: &Mat) -> Result<AffineMatrixExpr> {
    let (nm, s) = (prog.py.rows(), alpha.nrows());
    let top = prog.pe.kron_left(alpha);
    let lower = prog.py.kron_left(beta);
    let bottom = AffineMatrixExpr::zeros(s * nm, s * nm);
    block2x2(&top, &lower, &bottom)
}

/// `[[I⊗C, I⊗Bᵀ], [I⊗B, I⊗A]]`
fn lifted_data(s: usize, c: &Mat, b: &Mat, a: &Mat) -> Result<Mat> {
    let is = identity(s);
    block(&[
        vec![&kron(&is, c), &kron(&is, &b.transpose())],
        vec![&kron(&is, b), &kron(&is, a)],
    ])
}

/// S-procedure design over the energy-bounded consistency set, one multiplier per region.
pub fn synth_sproc_energy(q: &QuadraticForm, target: &RegionIntersection, opts: &SynthesisOptions) -> Result<SynthesisResult> {
    check_target(target)?;
    let (n, m) = (q.n(), q.m());
    let coords = coordinates_for(&q.ac, n, opts);
    let (cc, bc, ac) = coords.quadratic(&q.cc, &q.bc, &q.ac)?;
    let sc = if opts.normalize { 1.0 / spectral_norm(&ac).max(f64::MIN_POSITIVE) } else { 1.0 };
    let (cc, bc, ac) = (cc * sc, bc * sc, ac * sc);
    let mut prog = Program::new(n, m)?;
    for (i, r) in target.regions().iter().enumerate() {
        let tau = prog.vars.scalar(&format!("tau[{i}]"), true)?;
        let mut e = sproc_base(&prog, r.alpha(), r.beta())?;
        e.add_term(prog.vars.coordinate(tau), &-lifted_data(r.s(), &cc, &bc, &ac)?)?;
        prog.cons.push(LmiConstraint::new(r.label(), e));
        prog.taus.push(vec![tau]);
    }
    prog.solve(Method::SProcEnergy, &coords, opts)
}

/// S-procedure design over the pointwise consistency set, one multiplier per sample and region.
pub fn synth_sproc_instant(pw: &PointwiseForms, target: &RegionIntersection, opts: &SynthesisOptions) -> Result<SynthesisResult> {
    check_target(target)?;
    if pw.items.is_empty() {
        return Err(Error::InvalidParameter("no data samples".into()));
    }
    let gram = pw.items.iter().fold(Mat::zeros(pw.n + pw.m, pw.n + pw.m), |acc, t| acc + &t.a);
    let coords = coordinates_for(&gram, pw.n, opts);
    let items = pw
        .items
        .iter()
        .map(|t| coords.quadratic(&t.c, &t.b, &t.a))
        .collect::<Result<Vec<_>>>()?;
    let mut prog = Program::new(pw.n, pw.m)?;
    let count = items.len() * target.len();
    if count > LARGE_MULTIPLIER_COUNT {
        prog.notes.push(format!(
            "{count} sample multipliers; solve time grows roughly cubically with the sample count"
        ));
    }
    for (i, r) in target.regions().iter().enumerate() {
        let mut e = sproc_base(&prog, r.alpha(), r.beta())?;
        let mut hs = Vec::with_capacity(items.len());
        for (j, (c, b, a)) in items.iter().enumerate() {
            let tau = prog.vars.scalar(&format!("tau[{i}][{j}]"), true)?;
            let mut d = lifted_data(r.s(), c, b, a)?;
            if opts.normalize {
                let nrm = spectral_norm(&d);
                if nrm > 0.0 {
                    d /= nrm;
                }
            }
            e.add_term(prog.vars.coordinate(tau), &-d)?;
            hs.push(tau);
        }
        prog.cons.push(LmiConstraint::new(r.label(), e));
        prog.taus.push(hs);
    }
    prog.solve(Method::SProcInstant, &coords, opts)
}

/// Everything a method may need; each method picks what it uses.
#[derive(Debug, Clone)]
pub struct SynthesisInputs {
    pub data: ExperimentData,
    /// Instantaneous or energy disturbance model.
    pub model: DisturbanceModel,
    /// Known `(A, B)` for the model-based method; the data center is used when absent.
    pub nominal: Option<(Mat, Mat)>,
}

impl SynthesisInputs {
    /// Energy-type model used by the ellipsoid methods.
    pub fn energy_model(&self) -> Result<DisturbanceModel> {
        if self.model.is_energy() {
            Ok(self.model.clone())
        } else {
            self.model.energy_relaxation(self.data.n(), self.data.t())
        }
    }

    pub fn quadratic_form(&self) -> Result<QuadraticForm> {
        quadratic_form(&self.data, &self.energy_model()?)
    }

    pub fn center_form(&self) -> Result<CenterForm> {
        center_form(&self.quadratic_form()?)
    }

    /// Nominal `(A, B)`: the known system if given, else the ellipsoid center.
    pub fn nominal_system(&self) -> Result<(Mat, Mat)> {
        match &self.nominal {
            Some(ab) => Ok(ab.clone()),
            None => Ok(self.center_form()?.center()),
        }
    }
}

/// Run one method. `rank_one_target` replaces `target` for [`Method::RankOne`] when given
/// (for instance the two-disk inner approximation of a wedge).
pub fn synthesize(
    method: Method,
    inputs: &SynthesisInputs,
    target: &RegionIntersection,
    rank_one_target: Option<&RegionIntersection>,
    opts: &SynthesisOptions,
) -> Result<SynthesisResult> {
    match method {
        Method::ModelBased => {
            let (a, b) = inputs.nominal_system()?;
            model_based(&a, &b, target, opts)
        }
        Method::Petersen => synth_petersen(&inputs.center_form()?, target, opts),
        Method::RankOne => synth_rank_one(&inputs.center_form()?, rank_one_target.unwrap_or(target), opts),
        Method::SProcEnergy => synth_sproc_energy(&inputs.quadratic_form()?, target, opts),
        Method::SProcInstant => {
            if inputs.model.is_energy() {
                return Err(Error::Precondition(
                    "sproc-instant needs an instantaneous disturbance model".into(),
                ));
            }
            synth_sproc_instant(&pointwise_forms(&inputs.data, &inputs.model)?, target, opts)
        }
    }
}

/// Smallest region margin over the spectrum of `a + b k`.
pub fn closed_loop_margin(a: &Mat, b: &Mat, k: &Mat, target: &RegionIntersection) -> f64 {
    linalg::eigenvalues(&(a + b * k))
        .into_iter()
        .map(|z: C64| target.margin(z))
        .fold(f64::INFINITY, f64::min)
}
