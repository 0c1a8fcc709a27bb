//! Strict LMI feasibility through a phase-I semidefinite program.
//!
//! The problem `F_k(x) ≺ 0 for all k` is decided by maximizing `t` subject to
//! `F_k(x) + t I ⪯ 0`, box bounds on `x` and `-t_cap ≤ t ≤ t_cap`. In the standard
//! dual form `max bᵀy  s.t.  C − Σ y_i A_i = S ⪰ 0` this has `y = (x, t)`, `b = e_t`,
//! `C_k = −F0_k`, `A_ik = F_ik`, `A_tk = I`; the bounds form a diagonal cone.
//!
//! The solver is an infeasible primal-dual path-following method using the HKM search
//! direction with a Mehrotra predictor-corrector. Variables that appear in a single
//! semidefinite block (typically S-procedure multipliers) are eliminated block by block
//! before the reduced Schur complement over the remaining variables is factored.
//!
//! Verdicts:
//! * `Feasible`: re-evaluation of the original blocks at the returned assignment gives
//!   every block `⪯ −(margin/2) I` and the achieved `t` is at least `margin`.
//! * `Infeasible`: a primal point certifies that no assignment within the bounds reaches
//!   `t ≥ margin/2`. The bound `⟨C, X⟩ + Σ |y_i|_max |r_p,i|` is valid even when the primal
//!   equations hold only approximately, because `y` is confined to the box.
//! * `Marginal`: converged, but neither of the above is certified.
//! * `NumericalFailure`: the iteration limit was reached, or the iterates broke down, before
//!   any iterate reached `t ≥ margin`.

use nalgebra::{Cholesky, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::linalg::{symmetrize, Mat};
use crate::lmi::SdpProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Feasible,
    Infeasible,
    Marginal,
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Overrides the margin stored in the problem.
    pub margin: Option<f64>,
    /// Cap on the phase-I variable; `None` uses the problem scale.
    pub t_cap: Option<f64>,
    /// Stop as soon as the current iterate has every block `⪯ −early_exit · I`.
    pub early_exit: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 200, margin: None, t_cap: None, early_exit: None }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    /// Values of the problem variables (without `t`). Nonnegative variables are clamped.
    pub assignment: Vec<f64>,
    /// Achieved strictness `−max_residual`.
    pub t: f64,
    /// Certified upper bound on the phase-I optimum.
    pub upper_bound: f64,
    /// Largest eigenvalue over all blocks at `assignment`.
    pub max_residual: f64,
    pub margin: f64,
    pub iterations: usize,
}

struct ConeBlock {
    dim: usize,
    c: Mat,
    vars: Vec<usize>,
    mats: Vec<Mat>,
}

struct LpRow {
    var: usize,
    a: f64,
    c: f64,
}

/// Partition of the variables into globals and per-block locals.
struct Layout {
    m: usize,
    globals: Vec<usize>,
    gpos: Vec<usize>,
    /// `(block, position)` of a local variable.
    local: Vec<Option<(usize, usize)>>,
    block_locals: Vec<Vec<usize>>,
}

impl Layout {
    fn new(m: usize, blocks: &[ConeBlock]) -> Self {
        let mut count = vec![0usize; m];
        let mut owner = vec![usize::MAX; m];
        for (k, b) in blocks.iter().enumerate() {
            for &v in &b.vars {
                count[v] += 1;
                owner[v] = k;
            }
        }
        let mut globals = Vec::new();
        let mut gpos = vec![usize::MAX; m];
        let mut local = vec![None; m];
        let mut block_locals = vec![Vec::new(); blocks.len()];
        for v in 0..m {
            if count[v] == 1 {
                let k = owner[v];
                local[v] = Some((k, block_locals[k].len()));
                block_locals[k].push(v);
            } else {
                gpos[v] = globals.len();
                globals.push(v);
            }
        }
        Self { m, globals, gpos, local, block_locals }
    }
}

/// Schur system in arrow form, factored once per iteration and reused by both solves.
struct Factored {
    /// Per block: Cholesky of the local-local block, `Mll⁻¹ Mlg`.
    locals: Vec<Option<(Cholesky<f64, Dyn>, Mat)>>,
    mlg: Vec<Mat>,
    global: Option<Cholesky<f64, Dyn>>,
}

fn chol_reg(mut m: Mat) -> Option<Cholesky<f64, Dyn>> {
    let scale = m.diagonal().iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(1e-300);
    let mut reg = 0.0;
    for _ in 0..8 {
        if let Some(c) = Cholesky::new(m.clone()) {
            return Some(c);
        }
        let add = if reg == 0.0 { 1e-14 * scale } else { reg * 100.0 };
        for i in 0..m.nrows() {
            m[(i, i)] += add - reg;
        }
        reg = add;
    }
    None
}

struct Ipm {
    blocks: Vec<ConeBlock>,
    lp: Vec<LpRow>,
    layout: Layout,
    /// `|y_i|` bound used in the certified upper bound.
    ybound: Vec<f64>,
}

struct Iterate {
    x: Vec<Mat>,
    s: Vec<Mat>,
    y: DVector<f64>,
    xl: DVector<f64>,
    sl: DVector<f64>,
}

struct Direction {
    dx: Vec<Mat>,
    ds: Vec<Mat>,
    dy: DVector<f64>,
    dxl: DVector<f64>,
    dsl: DVector<f64>,
}

impl Ipm {
    fn new(problem: &SdpProblem, t_cap: f64) -> Self {
        let n = problem.n_vars;
        let tv = n;
        let m = n + 1;
        let blocks: Vec<ConeBlock> = problem
            .blocks
            .iter()
            .map(|b| {
                let mut vars: Vec<usize> = b.coeffs.iter().map(|(k, _)| *k).collect();
                let mut mats: Vec<Mat> = b.coeffs.iter().map(|(_, c)| c.clone()).collect();
                vars.push(tv);
                mats.push(Mat::identity(b.dim, b.dim));
                ConeBlock { dim: b.dim, c: -&b.constant, vars, mats }
            })
            .collect();
        let mut lp = Vec::new();
        let mut ybound = vec![0.0; m];
        for k in 0..n {
            let (lo, hi) = (problem.lower[k], problem.upper[k]);
            if lo.is_finite() {
                lp.push(LpRow { var: k, a: -1.0, c: -lo });
            }
            if hi.is_finite() {
                lp.push(LpRow { var: k, a: 1.0, c: hi });
            }
            ybound[k] = lo.abs().max(hi.abs());
        }
        lp.push(LpRow { var: tv, a: 1.0, c: t_cap });
        lp.push(LpRow { var: tv, a: -1.0, c: t_cap });
        ybound[tv] = t_cap;
        let layout = Layout::new(m, &blocks);
        Self { blocks, lp, layout, ybound }
    }

    fn initial(&self) -> Iterate {
        let m = self.layout.m;
        let mut x = Vec::new();
        let mut s = Vec::new();
        for b in &self.blocks {
            let d = b.dim as f64;
            let mut xi: f64 = 10f64.max(d.sqrt());
            let mut eta: f64 = 10f64.max(d.sqrt()).max(b.c.norm());
            for (i, a) in b.vars.iter().zip(&b.mats) {
                let bi = if *i == m - 1 { 1.0 } else { 0.0 };
                xi = xi.max(d * (1.0 + bi) / (1.0 + a.norm()));
                eta = eta.max(a.norm());
            }
            x.push(Mat::identity(b.dim, b.dim) * xi);
            s.push(Mat::identity(b.dim, b.dim) * eta);
        }
        let xl = DVector::from_element(self.lp.len(), 10.0);
        let sl = DVector::from_iterator(
            self.lp.len(),
            self.lp.iter().map(|r| 10f64.max(r.c.abs()).max(r.a.abs())),
        );
        Iterate { x, s, y: DVector::zeros(m), xl, sl }
    }

    /// 𝒜(X) including the diagonal cone.
    fn a_op(&self, x: &[Mat], xl: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.layout.m);
        for (b, xk) in self.blocks.iter().zip(x) {
            for (&v, a) in b.vars.iter().zip(&b.mats) {
                out[v] += a.dot(xk);
            }
        }
        for (r, &xv) in self.lp.iter().zip(xl.iter()) {
            out[r.var] += r.a * xv;
        }
        out
    }

    fn at_op_block(&self, k: usize, y: &DVector<f64>) -> Mat {
        let b = &self.blocks[k];
        let mut out = Mat::zeros(b.dim, b.dim);
        for (&v, a) in b.vars.iter().zip(&b.mats) {
            if y[v] != 0.0 {
                out += a * y[v];
            }
        }
        out
    }

    fn at_op_lp(&self, y: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.lp.len(), self.lp.iter().map(|r| r.a * y[r.var]))
    }

    fn build_schur(&self, it: &Iterate, rchol: &[Mat], lchol: &[Mat]) -> Option<Factored> {
        let lay = &self.layout;
        let ng = lay.globals.len();
        let mut mgg = Mat::zeros(ng, ng);
        let mut mll: Vec<Mat> = lay.block_locals.iter().map(|l| Mat::zeros(l.len(), l.len())).collect();
        let mut mlg: Vec<Mat> = lay.block_locals.iter().map(|l| Mat::zeros(l.len(), ng)).collect();
        for (k, b) in self.blocks.iter().enumerate() {
            let d = b.dim;
            let nv = b.vars.len();
            let mut rinv = Mat::identity(d, d);
            if !rchol[k].solve_lower_triangular_mut(&mut rinv) {
                return None;
            }
            let mut g = Mat::zeros(d * d, nv);
            for (j, a) in b.mats.iter().enumerate() {
                let gj = &rinv * a * &lchol[k];
                g.column_mut(j).copy_from_slice(gj.as_slice());
            }
            let mb = g.transpose() * &g;
            for (p, &vp) in b.vars.iter().enumerate() {
                for (q, &vq) in b.vars.iter().enumerate() {
                    let val = mb[(p, q)];
                    match (lay.local[vp], lay.local[vq]) {
                        (None, None) => mgg[(lay.gpos[vp], lay.gpos[vq])] += val,
                        (Some((kk, ip)), None) => mlg[kk][(ip, lay.gpos[vq])] += val,
                        (Some((kk, ip)), Some((_, iq))) => mll[kk][(ip, iq)] += val,
                        (None, Some(_)) => {}
                    }
                }
            }
        }
        for (i, r) in self.lp.iter().enumerate() {
            let val = r.a * r.a * it.xl[i] / it.sl[i];
            match lay.local[r.var] {
                None => {
                    let g = lay.gpos[r.var];
                    mgg[(g, g)] += val;
                }
                Some((kk, ip)) => mll[kk][(ip, ip)] += val,
            }
        }
        let mut locals = Vec::with_capacity(self.blocks.len());
        for (k, mk) in mll.into_iter().enumerate() {
            if mk.nrows() == 0 {
                locals.push(None);
                continue;
            }
            let ch = chol_reg(mk)?;
            let sol = ch.solve(&mlg[k]);
            mgg -= mlg[k].transpose() * &sol;
            locals.push(Some((ch, sol)));
        }
        let global = if ng > 0 { Some(chol_reg(symmetrize(&mgg))?) } else { None };
        Some(Factored { locals, mlg, global })
    }

    fn schur_solve(&self, f: &Factored, rhs: &DVector<f64>) -> DVector<f64> {
        let lay = &self.layout;
        let ng = lay.globals.len();
        let mut rg = DVector::from_iterator(ng, lay.globals.iter().map(|&v| rhs[v]));
        let mut rl: Vec<DVector<f64>> = lay
            .block_locals
            .iter()
            .map(|l| DVector::from_iterator(l.len(), l.iter().map(|&v| rhs[v])))
            .collect();
        for (k, loc) in f.locals.iter().enumerate() {
            if let Some((ch, _)) = loc {
                let z = ch.solve(&rl[k]);
                rg -= f.mlg[k].tr_mul(&z);
            }
        }
        let yg = match &f.global {
            Some(ch) => ch.solve(&rg),
            None => rg,
        };
        let mut out = DVector::zeros(lay.m);
        for (i, &v) in lay.globals.iter().enumerate() {
            out[v] = yg[i];
        }
        for (k, loc) in f.locals.iter().enumerate() {
            if let Some((ch, sol)) = loc {
                let z = ch.solve(&rl[k]) - sol * &yg;
                rl[k] = z;
                for (i, &v) in lay.block_locals[k].iter().enumerate() {
                    out[v] = rl[k][i];
                }
            }
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn direction(
        &self,
        it: &Iterate,
        f: &Factored,
        sinv: &[Mat],
        rp: &DVector<f64>,
        rd: &[Mat],
        rdl: &DVector<f64>,
        sigma_mu: f64,
        corr: Option<(&[Mat], &DVector<f64>)>,
    ) -> Direction {
        // Z = σμ S⁻¹ − X − X R_d S⁻¹ − corr, and 𝒜(X 𝒜ᵀ(Δy) S⁻¹) = r_p − 𝒜(Z).
        let z: Vec<Mat> = (0..self.blocks.len())
            .map(|k| {
                let mut zk = &sinv[k] * sigma_mu - &it.x[k] - &it.x[k] * &rd[k] * &sinv[k];
                if let Some((c, _)) = corr {
                    zk -= &c[k];
                }
                zk
            })
            .collect();
        let zl = DVector::from_iterator(
            self.lp.len(),
            (0..self.lp.len()).map(|i| {
                let mut v = sigma_mu / it.sl[i] - it.xl[i] - it.xl[i] * rdl[i] / it.sl[i];
                if let Some((_, cl)) = corr {
                    v -= cl[i] / it.sl[i];
                }
                v
            }),
        );
        let rhs = rp - self.a_op(&z, &zl);
        let dy = self.schur_solve(f, &rhs);
        let mut dx = Vec::with_capacity(self.blocks.len());
        let mut ds = Vec::with_capacity(self.blocks.len());
        for k in 0..self.blocks.len() {
            let dsk = &rd[k] - self.at_op_block(k, &dy);
            let mut dxk = &sinv[k] * sigma_mu - &it.x[k] - &it.x[k] * &dsk * &sinv[k];
            if let Some((c, _)) = corr {
                dxk -= &c[k];
            }
            dx.push(symmetrize(&dxk));
            ds.push(dsk);
        }
        let dsl = rdl - self.at_op_lp(&dy);
        let dxl = DVector::from_iterator(
            self.lp.len(),
            (0..self.lp.len()).map(|i| {
                let mut v = sigma_mu / it.sl[i] - it.xl[i] - it.xl[i] * dsl[i] / it.sl[i];
                if let Some((_, cl)) = corr {
                    v -= cl[i] / it.sl[i];
                }
                v
            }),
        );
        Direction { dx, ds, dy, dxl, dsl }
    }
}

/// Largest step `a ≤ 1` keeping `M + a D ⪰ 0`, given the Cholesky factor of `M`.
fn max_step_psd(l: &Mat, d: &Mat) -> f64 {
    let mut w = d.clone();
    if !l.solve_lower_triangular_mut(&mut w) {
        return 0.0;
    }
    let mut wt = w.transpose();
    if !l.solve_lower_triangular_mut(&mut wt) {
        return 0.0;
    }
    let lmin = crate::linalg::min_eig(&wt);
    if lmin >= 0.0 {
        1.0
    } else {
        (1.0 / -lmin).min(1.0)
    }
}

fn max_step_lp(v: &DVector<f64>, dv: &DVector<f64>) -> f64 {
    v.iter()
        .zip(dv.iter())
        .filter(|(_, &d)| d < 0.0)
        .map(|(&x, &d)| -x / d)
        .fold(1.0, f64::min)
}

fn chol_lower(m: &Mat) -> Option<Mat> {
    Cholesky::new(symmetrize(m)).map(|c| c.l())
}

/// Decide strict feasibility of the scalarized problem.
pub fn solve_feasibility(problem: &SdpProblem, opts: &SolveOptions) -> SolveOutcome {
    let margin = opts.margin.unwrap_or(problem.margin);
    let t_cap = opts.t_cap.unwrap_or(problem.scale).max(10.0 * margin);
    let ipm = Ipm::new(problem, t_cap);
    let m = ipm.layout.m;
    let tv = m - 1;
    let nu = ipm.blocks.iter().map(|b| b.dim).sum::<usize>() + ipm.lp.len();
    let cnorm = (ipm.blocks.iter().map(|b| b.c.norm_squared()).sum::<f64>()
        + ipm.lp.iter().map(|r| r.c * r.c).sum::<f64>())
    .sqrt();

    let extract = |y: &DVector<f64>| -> (Vec<f64>, f64) {
        let x: Vec<f64> = (0..problem.n_vars)
            .map(|k| if problem.lower[k] == 0.0 { y[k].max(0.0) } else { y[k] })
            .collect();
        let r = problem.max_residual(&x);
        (x, r)
    };
    let finish = |status, y: &DVector<f64>, ub: f64, iterations| {
        let (x, r) = extract(y);
        SolveOutcome { status, assignment: x, t: -r, upper_bound: ub, max_residual: r, margin, iterations }
    };

    let mut it = ipm.initial();
    let mut best_ub = f64::INFINITY;
    // most negative residual seen; a breakdown after reaching `−margin` still certifies feasibility
    let mut best_y = it.y.clone();
    let mut best_res = f64::INFINITY;
    let breakdown = |best_y: &DVector<f64>, best_res: f64, ub: f64, iter| {
        let status = if best_res <= -margin { SolveStatus::Feasible } else { SolveStatus::NumericalFailure };
        finish(status, best_y, ub, iter)
    };
    for iter in 0..opts.max_iter {
        let (Some(rchol), Some(lchol)) = (
            it.s.iter().map(chol_lower).collect::<Option<Vec<_>>>(),
            it.x.iter().map(chol_lower).collect::<Option<Vec<_>>>(),
        ) else {
            return breakdown(&best_y, best_res, best_ub, iter);
        };
        let sinv: Vec<Mat> = it
            .s
            .iter()
            .map(|s| Cholesky::new(symmetrize(s)).map(|c| c.inverse()).unwrap_or_else(|| s.clone()))
            .collect();

        let ax = ipm.a_op(&it.x, &it.xl);
        let mut rp = -ax;
        rp[tv] += 1.0;
        let rd: Vec<Mat> = (0..ipm.blocks.len())
            .map(|k| &ipm.blocks[k].c - &it.s[k] - ipm.at_op_block(k, &it.y))
            .collect();
        let aty_l = ipm.at_op_lp(&it.y);
        let rdl = DVector::from_iterator(
            ipm.lp.len(),
            (0..ipm.lp.len()).map(|i| ipm.lp[i].c - it.sl[i] - aty_l[i]),
        );
        let gap_sum: f64 = it.x.iter().zip(&it.s).map(|(x, s)| x.dot(s)).sum::<f64>() + it.xl.dot(&it.sl);
        let mu = gap_sum / nu as f64;

        let pobj: f64 = ipm.blocks.iter().zip(&it.x).map(|(b, x)| b.c.dot(x)).sum::<f64>()
            + ipm.lp.iter().zip(it.xl.iter()).map(|(r, &x)| r.c * x).sum::<f64>();
        let dobj = it.y[tv];
        let ub = pobj + rp.iter().zip(&ipm.ybound).map(|(r, b)| r.abs() * b).sum::<f64>();
        best_ub = best_ub.min(ub);

        let pinf = rp.norm() / 2.0;
        let dinf = (rd.iter().map(|r| r.norm_squared()).sum::<f64>() + rdl.norm_squared()).sqrt() / (1.0 + cnorm);
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());

        let (_, res) = extract(&it.y);
        if res < best_res {
            best_res = res;
            best_y.copy_from(&it.y);
        }
        if let Some(e) = opts.early_exit {
            if res <= -e.max(margin) {
                return finish(SolveStatus::Feasible, &it.y, best_ub, iter);
            }
        }
        if best_ub < 0.5 * margin {
            return finish(SolveStatus::Infeasible, &it.y, best_ub, iter);
        }
        if pinf <= opts.tol && dinf <= opts.tol && gap <= opts.tol {
            let status = if res <= -0.5 * margin && -res >= margin {
                SolveStatus::Feasible
            } else {
                SolveStatus::Marginal
            };
            return finish(status, &it.y, best_ub, iter);
        }

        let Some(fac) = ipm.build_schur(&it, &rchol, &lchol) else {
            return breakdown(&best_y, best_res, best_ub, iter);
        };

        // predictor
        let aff = ipm.direction(&it, &fac, &sinv, &rp, &rd, &rdl, 0.0, None);
        let ap_aff = lchol
            .iter()
            .zip(&aff.dx)
            .map(|(l, d)| max_step_psd(l, d))
            .fold(max_step_lp(&it.xl, &aff.dxl), f64::min);
        let ad_aff = rchol
            .iter()
            .zip(&aff.ds)
            .map(|(l, d)| max_step_psd(l, d))
            .fold(max_step_lp(&it.sl, &aff.dsl), f64::min);
        let mut gap_aff = 0.0;
        for k in 0..ipm.blocks.len() {
            gap_aff += (&it.x[k] + &aff.dx[k] * ap_aff).dot(&(&it.s[k] + &aff.ds[k] * ad_aff));
        }
        gap_aff += (&it.xl + &aff.dxl * ap_aff).dot(&(&it.sl + &aff.dsl * ad_aff));
        let mu_aff = gap_aff / nu as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let corr: Vec<Mat> = (0..ipm.blocks.len()).map(|k| &aff.dx[k] * &aff.ds[k] * &sinv[k]).collect();
        let corr_l = aff.dxl.component_mul(&aff.dsl);
        let dir = ipm.direction(&it, &fac, &sinv, &rp, &rd, &rdl, sigma * mu, Some((&corr, &corr_l)));

        let gamma = 0.9 + 0.09 * ap_aff.min(ad_aff);
        let ap = lchol
            .iter()
            .zip(&dir.dx)
            .map(|(l, d)| max_step_psd(l, d))
            .fold(max_step_lp(&it.xl, &dir.dxl), f64::min);
        let ad = rchol
            .iter()
            .zip(&dir.ds)
            .map(|(l, d)| max_step_psd(l, d))
            .fold(max_step_lp(&it.sl, &dir.dsl), f64::min);
        let ap = (gamma * ap).min(1.0);
        let ad = (gamma * ad).min(1.0);
        if ap < 1e-12 && ad < 1e-12 {
            return breakdown(&best_y, best_res, best_ub, iter);
        }
        for k in 0..ipm.blocks.len() {
            it.x[k] = symmetrize(&(&it.x[k] + &dir.dx[k] * ap));
            it.s[k] = symmetrize(&(&it.s[k] + &dir.ds[k] * ad));
        }
        it.xl += &dir.dxl * ap;
        it.sl += &dir.dsl * ad;
        it.y += &dir.dy * ad;
    }
    let (_, res) = extract(&it.y);
    if res < best_res {
        best_res = res;
        best_y = it.y;
    }
    breakdown(&best_y, best_res, best_ub, opts.max_iter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_eig;
    use crate::lmi::{scalarize, LmiConstraint, ScalarizeOptions, VariableSpace};

    fn lyapunov(a: &Mat) -> SolveOutcome {
        let n = a.nrows();
        let mut vs = VariableSpace::new();
        let p = vs.symmetric("P", n).unwrap();
        let pe = vs.expr(p);
        let lyap = pe.left_mul(a).unwrap().tr_sym().unwrap();
        let cons = vec![LmiConstraint::new("P>0", pe.scale(-1.0)), LmiConstraint::new("lyap", lyap)];
        let prob = scalarize(&cons, &vs, &ScalarizeOptions::default()).unwrap();
        solve_feasibility(&prob, &SolveOptions::default())
    }

    #[test]
    fn stable_diagonal_is_feasible() {
        let out = lyapunov(&Mat::from_diagonal(&DVector::from_vec(vec![-1.0, -2.0])));
        assert_eq!(out.status, SolveStatus::Feasible);
        assert!(out.max_residual <= -0.5 * out.margin);
    }

    #[test]
    fn unstable_mode_is_infeasible() {
        let out = lyapunov(&Mat::from_diagonal(&DVector::from_vec(vec![1.0, -2.0])));
        assert_eq!(out.status, SolveStatus::Infeasible);
    }

    #[test]
    fn scalar_constraint_with_offset() {
        let mut vs = VariableSpace::new();
        let x = vs.scalar("x", false).unwrap();
        // x − 1 ≺ 0 and −x − 2 ≺ 0: feasible.
        let e1 = vs.expr(x).add_constant(&Mat::from_element(1, 1, -1.0)).unwrap();
        let e2 = vs.expr(x).scale(-1.0).add_constant(&Mat::from_element(1, 1, -2.0)).unwrap();
        let prob = scalarize(
            &[LmiConstraint::new("a", e1), LmiConstraint::new("b", e2)],
            &vs,
            &ScalarizeOptions::default(),
        )
        .unwrap();
        let out = solve_feasibility(&prob, &SolveOptions::default());
        assert_eq!(out.status, SolveStatus::Feasible);
        // x − 1 ≺ 0 and 2 − x ≺ 0: infeasible.
        let e3 = vs.expr(x).scale(-1.0).add_constant(&Mat::from_element(1, 1, 2.0)).unwrap();
        let e1 = vs.expr(x).add_constant(&Mat::from_element(1, 1, -1.0)).unwrap();
        let prob = scalarize(
            &[LmiConstraint::new("a", e1), LmiConstraint::new("c", e3)],
            &vs,
            &ScalarizeOptions::default(),
        )
        .unwrap();
        let out = solve_feasibility(&prob, &SolveOptions::default());
        assert_eq!(out.status, SolveStatus::Infeasible);
    }

    #[test]
    fn local_multipliers_are_eliminated_correctly() {
        // Two blocks each with its own nonnegative multiplier and a shared scalar.
        let mut vs = VariableSpace::new();
        let x = vs.scalar("x", false).unwrap();
        let t1 = vs.scalar("t1", true).unwrap();
        let t2 = vs.scalar("t2", true).unwrap();
        let c = |v: f64| Mat::from_element(1, 1, v);
        // x − t1 + 1 ≺ 0 ; −x − t2 + 1 ≺ 0 ; t1 + t2 − 3 ≺ 0
        let b1 = vs.expr(x).sub(&vs.expr(t1)).unwrap().add_constant(&c(1.0)).unwrap();
        let b2 = vs.expr(x).scale(-1.0).sub(&vs.expr(t2)).unwrap().add_constant(&c(1.0)).unwrap();
        let b3 = vs.expr(t1).add(&vs.expr(t2)).unwrap().add_constant(&c(-3.0)).unwrap();
        let prob = scalarize(
            &[LmiConstraint::new("1", b1), LmiConstraint::new("2", b2), LmiConstraint::new("3", b3)],
            &vs,
            &ScalarizeOptions::default(),
        )
        .unwrap();
        let out = solve_feasibility(&prob, &SolveOptions::default());
        assert_eq!(out.status, SolveStatus::Feasible);
        // optimum of max t: t = 1/3 with t1 = t2 = 4/3
        assert!((out.t - 1.0 / 3.0).abs() < 1e-6, "t = {}", out.t);
        assert!(max_eig(&prob.blocks[2].evaluate(&out.assignment)) < 0.0);
    }
}
