//! Matrix expressions affine in scalar decision variables, and their reduction to a
//! block-diagonal semidefinite feasibility problem.
//!
//! Matrix-valued decision variables are declared in a [`VariableSpace`]; each one is
//! expanded into scalar coordinates. Symmetric variables use packed lower-triangle
//! coordinates, so `P = Pᵀ` holds by construction and no equality constraints are needed.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::{kron, Mat};

#[derive(Debug, Clone, PartialEq)]
pub enum VarKind {
    Symmetric { dim: usize },
    Matrix { rows: usize, cols: usize },
    Scalar { nonneg: bool },
}

impl VarKind {
    fn len(&self) -> usize {
        match *self {
            VarKind::Symmetric { dim } => dim * (dim + 1) / 2,
            VarKind::Matrix { rows, cols } => rows * cols,
            VarKind::Scalar { .. } => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VarEntry {
    pub name: String,
    pub kind: VarKind,
    pub offset: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VarHandle(usize);

/// Registry of the decision variables of one problem.
#[derive(Debug, Clone, Default)]
pub struct VariableSpace {
    entries: Vec<VarEntry>,
    len: usize,
}

impl VariableSpace {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, name: &str, kind: VarKind) -> Result<VarHandle> {
        if self.entries.iter().any(|e| e.name == name) {
            return Err(Error::InvalidParameter(format!("duplicate variable name '{name}'")));
        }
        if kind.len() == 0 {
            return Err(Error::InvalidParameter(format!("variable '{name}' has zero size")));
        }
        let offset = self.len;
        self.len += kind.len();
        self.entries.push(VarEntry { name: name.to_string(), kind, offset });
        Ok(VarHandle(self.entries.len() - 1))
    }

    pub fn symmetric(&mut self, name: &str, dim: usize) -> Result<VarHandle> {
        self.push(name, VarKind::Symmetric { dim })
    }

    pub fn matrix(&mut self, name: &str, rows: usize, cols: usize) -> Result<VarHandle> {
        self.push(name, VarKind::Matrix { rows, cols })
    }

    pub fn scalar(&mut self, name: &str, nonneg: bool) -> Result<VarHandle> {
        self.push(name, VarKind::Scalar { nonneg })
    }

    /// Coordinate index of a scalar variable.
    pub fn coordinate(&self, h: VarHandle) -> usize {
        self.entries[h.0].offset
    }

    /// Number of scalar coordinates.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn entry(&self, h: VarHandle) -> &VarEntry {
        &self.entries[h.0]
    }

    pub fn entries(&self) -> &[VarEntry] {
        &self.entries
    }

    fn owner(&self, coord: usize) -> &VarEntry {
        let i = self.entries.partition_point(|e| e.offset <= coord) - 1;
        &self.entries[i]
    }

    /// True if scalar coordinate `coord` belongs to a nonnegative scalar variable.
    pub fn is_nonneg(&self, coord: usize) -> bool {
        matches!(self.owner(coord).kind, VarKind::Scalar { nonneg: true })
    }

    pub fn coordinate_name(&self, coord: usize) -> String {
        let e = self.owner(coord);
        let k = coord - e.offset;
        match e.kind {
            VarKind::Scalar { .. } => e.name.clone(),
            VarKind::Matrix { cols, .. } => format!("{}[{},{}]", e.name, k / cols, k % cols),
            VarKind::Symmetric { dim } => {
                let (i, j) = packed_to_ij(dim, k);
                format!("{}[{},{}]", e.name, i, j)
            }
        }
    }

    /// The variable as a matrix expression (`1 x 1` for scalars).
    pub fn expr(&self, h: VarHandle) -> AffineMatrixExpr {
        let e = &self.entries[h.0];
        match e.kind {
            VarKind::Scalar { .. } => {
                let mut x = AffineMatrixExpr::zeros(1, 1);
                x.coeffs.insert(e.offset, Mat::from_element(1, 1, 1.0));
                x
            }
            VarKind::Matrix { rows, cols } => {
                let mut x = AffineMatrixExpr::zeros(rows, cols);
                for i in 0..rows {
                    for j in 0..cols {
                        let mut c = Mat::zeros(rows, cols);
                        c[(i, j)] = 1.0;
                        x.coeffs.insert(e.offset + i * cols + j, c);
                    }
                }
                x
            }
            VarKind::Symmetric { dim } => {
                let mut x = AffineMatrixExpr::zeros(dim, dim);
                for k in 0..e.kind.len() {
                    let (i, j) = packed_to_ij(dim, k);
                    let mut c = Mat::zeros(dim, dim);
                    c[(i, j)] = 1.0;
                    c[(j, i)] = 1.0;
                    x.coeffs.insert(e.offset + k, c);
                }
                x
            }
        }
    }

    /// Numeric value of a variable under the assignment `x`.
    pub fn value(&self, h: VarHandle, x: &[f64]) -> Mat {
        self.expr(h).evaluate(x)
    }
}

/// Packed coordinate `k` of a `dim x dim` symmetric matrix, column-major lower triangle.
fn packed_to_ij(dim: usize, mut k: usize) -> (usize, usize) {
    for j in 0..dim {
        let col = dim - j;
        if k < col {
            return (j + k, j);
        }
        k -= col;
    }
    unreachable!("packed index out of range")
}

/// `constant + Σ_k x_k · coeffs[k]`.
#[derive(Debug, Clone)]
pub struct AffineMatrixExpr {
    rows: usize,
    cols: usize,
    constant: Mat,
    coeffs: BTreeMap<usize, Mat>,
}

impl AffineMatrixExpr {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, constant: Mat::zeros(rows, cols), coeffs: BTreeMap::new() }
    }

    pub fn from_constant(m: Mat) -> Self {
        Self { rows: m.nrows(), cols: m.ncols(), constant: m, coeffs: BTreeMap::new() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn constant(&self) -> &Mat {
        &self.constant
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (usize, &Mat)> {
        self.coeffs.iter().map(|(&k, m)| (k, m))
    }

    pub fn coeff(&self, var: usize) -> Option<&Mat> {
        self.coeffs.get(&var)
    }

    fn map(&self, rows: usize, cols: usize, f: impl Fn(&Mat) -> Mat) -> Self {
        Self {
            rows,
            cols,
            constant: f(&self.constant),
            coeffs: self.coeffs.iter().map(|(&k, m)| (k, f(m))).collect(),
        }
    }

    fn check_same_shape(&self, other: &Self, what: &str) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "{what}: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "add")?;
        let mut out = self.clone();
        out.constant += &other.constant;
        for (&k, m) in &other.coeffs {
            out.coeffs
                .entry(k)
                .and_modify(|c| *c += m)
                .or_insert_with(|| m.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(self.rows, self.cols, |m| m * a)
    }

    pub fn add_constant(&self, m: &Mat) -> Result<Self> {
        self.add(&Self::from_constant(m.clone()))
    }

    /// `m · self`
    pub fn left_mul(&self, m: &Mat) -> Result<Self> {
        if m.ncols() != self.rows {
            return Err(Error::Dimension(format!(
                "left_mul: {}x{} times {}x{}",
                m.nrows(),
                m.ncols(),
                self.rows,
                self.cols
            )));
        }
        Ok(self.map(m.nrows(), self.cols, |c| m * c))
    }

    /// `self · m`
    pub fn right_mul(&self, m: &Mat) -> Result<Self> {
        if m.nrows() != self.cols {
            return Err(Error::Dimension(format!(
                "right_mul: {}x{} times {}x{}",
                self.rows,
                self.cols,
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(self.map(self.rows, m.ncols(), |c| c * m))
    }

    pub fn transpose(&self) -> Self {
        self.map(self.cols, self.rows, |c| c.transpose())
    }

    /// `m ⊗ self`
    pub fn kron_left(&self, m: &Mat) -> Self {
        self.map(m.nrows() * self.rows, m.ncols() * self.cols, |c| kron(m, c))
    }

    /// `self ⊗ m`
    pub fn kron_right(&self, m: &Mat) -> Self {
        self.map(self.rows * m.nrows(), self.cols * m.ncols(), |c| kron(c, m))
    }

    /// `self + selfᵀ`
    pub fn tr_sym(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::Dimension("tr_sym of a non-square expression".into()));
        }
        Ok(self.map(self.rows, self.cols, |c| c + c.transpose()))
    }

    /// In-place `self += x_var · coeff`.
    pub fn add_term(&mut self, var: usize, coeff: &Mat) -> Result<()> {
        if coeff.shape() != (self.rows, self.cols) {
            return Err(Error::Dimension(format!(
                "term {:?} added to {}x{} expression",
                coeff.shape(),
                self.rows,
                self.cols
            )));
        }
        self.coeffs
            .entry(var)
            .and_modify(|c| *c += coeff)
            .or_insert_with(|| coeff.clone());
        Ok(())
    }

    pub fn evaluate(&self, x: &[f64]) -> Mat {
        let mut out = self.constant.clone();
        for (&k, c) in &self.coeffs {
            out += c * x[k];
        }
        out
    }

    /// Largest relative asymmetry over the constant and every coefficient.
    pub fn asymmetry(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        std::iter::once(&self.constant)
            .chain(self.coeffs.values())
            .map(crate::linalg::asymmetry)
            .fold(0.0, f64::max)
    }

    /// Drop coefficients that are exactly zero.
    pub fn prune(mut self) -> Self {
        self.coeffs.retain(|_, m| m.iter().any(|&v| v != 0.0));
        self
    }

    /// Assemble a grid of blocks into one expression.
    pub fn blocks(grid: &[Vec<AffineMatrixExpr>]) -> Result<Self> {
        let heights: Vec<usize> = grid.iter().map(|r| r.first().map_or(0, |e| e.rows)).collect();
        let widths: Vec<usize> = grid
            .first()
            .map(|r| r.iter().map(|e| e.cols).collect())
            .unwrap_or_default();
        let (rows, cols) = (heights.iter().sum(), widths.iter().sum());
        let mut out = Self::zeros(rows, cols);
        let mut r0 = 0;
        for (row, &h) in grid.iter().zip(&heights) {
            if row.len() != widths.len() {
                return Err(Error::Dimension("ragged block grid".into()));
            }
            let mut c0 = 0;
            for (e, &w) in row.iter().zip(&widths) {
                if e.rows != h || e.cols != w {
                    return Err(Error::Dimension(format!(
                        "block {}x{} does not fit slot {}x{}",
                        e.rows, e.cols, h, w
                    )));
                }
                out.constant.view_mut((r0, c0), (h, w)).copy_from(&e.constant);
                for (&k, m) in &e.coeffs {
                    out.coeffs
                        .entry(k)
                        .or_insert_with(|| Mat::zeros(rows, cols))
                        .view_mut((r0, c0), (h, w))
                        .copy_from(m);
                }
                c0 += w;
            }
            r0 += h;
        }
        Ok(out)
    }

    pub fn vstack(parts: &[AffineMatrixExpr]) -> Result<Self> {
        let grid: Vec<Vec<AffineMatrixExpr>> = parts.iter().map(|p| vec![p.clone()]).collect();
        Self::blocks(&grid)
    }
}

/// `m ⊗ x`.
pub fn kron_const_var(m: &Mat, x: &AffineMatrixExpr) -> AffineMatrixExpr {
    x.kron_left(m)
}

/// `β ⊗ L + βᵀ ⊗ Lᵀ`, symmetric by construction.
pub fn sym_kron_pair(beta: &Mat, l: &AffineMatrixExpr) -> Result<AffineMatrixExpr> {
    if beta.nrows() != beta.ncols() || l.rows() != l.cols() {
        return Err(Error::Dimension("sym_kron_pair needs square operands".into()));
    }
    l.kron_left(beta).tr_sym()
}

/// `[[a11, lowerᵀ], [lower, a22]]`.
pub fn block2x2(
    a11: &AffineMatrixExpr,
    lower: &AffineMatrixExpr,
    a22: &AffineMatrixExpr,
) -> Result<AffineMatrixExpr> {
    if a11.rows() != a11.cols() || a22.rows() != a22.cols() {
        return Err(Error::Dimension("block2x2 diagonal blocks must be square".into()));
    }
    if lower.rows() != a22.rows() || lower.cols() != a11.cols() {
        return Err(Error::Dimension(format!(
            "block2x2 off-diagonal {}x{} incompatible with diagonal blocks {} and {}",
            lower.rows(),
            lower.cols(),
            a11.rows(),
            a22.rows()
        )));
    }
    AffineMatrixExpr::blocks(&[
        vec![a11.clone(), lower.transpose()],
        vec![lower.clone(), a22.clone()],
    ])
}

/// A strict matrix inequality `expr ≺ 0`.
#[derive(Debug, Clone)]
pub struct LmiConstraint {
    pub label: String,
    pub expr: AffineMatrixExpr,
}

impl LmiConstraint {
    pub fn new(label: impl Into<String>, expr: AffineMatrixExpr) -> Self {
        Self { label: label.into(), expr }
    }
}

#[derive(Debug, Clone)]
pub struct ScalarizeOptions {
    /// Strictness margin; `None` selects `1e-7 · scale`.
    pub margin: Option<f64>,
    /// Box bound `|x_k| ≤ bound` applied to every coordinate.
    pub bound: f64,
}

impl Default for ScalarizeOptions {
    fn default() -> Self {
        Self { margin: None, bound: 1e3 }
    }
}

/// One semidefinite block: `constant + Σ x_k coeff_k ≺ 0`.
#[derive(Debug, Clone)]
pub struct SdpBlock {
    pub label: String,
    pub dim: usize,
    pub constant: Mat,
    pub coeffs: Vec<(usize, Mat)>,
}

impl SdpBlock {
    pub fn evaluate(&self, x: &[f64]) -> Mat {
        let mut out = self.constant.clone();
        for (k, c) in &self.coeffs {
            out += c * x[*k];
        }
        out
    }
}

/// Scalarized feasibility problem: find `x` within bounds with every block `≺ 0`.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub n_vars: usize,
    pub var_names: Vec<String>,
    pub blocks: Vec<SdpBlock>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub margin: f64,
    pub scale: f64,
}

impl SdpProblem {
    /// Largest eigenvalue over all blocks at `x`; negative means strictly feasible.
    pub fn max_residual(&self, x: &[f64]) -> f64 {
        self.blocks
            .iter()
            .map(|b| crate::linalg::max_eig(&b.evaluate(x)))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn within_bounds(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&v, (&l, &u))| v >= l && v <= u)
    }

    /// Sparse SDPA-style text of the phase-I problem
    /// `max t  s.t.  −(F0 + Σ x_k F_k) − t I ⪰ 0,  bounds`.
    ///
    /// Variables are `x_1 … x_N, t`; the objective line minimizes `−t`. Block 1 is a
    /// diagonal (LP) block holding the bounds, blocks 2… are the matrix inequalities.
    /// Entry lines are `mat block i j value` with 1-based upper-triangle indices; matrix 0
    /// is the constant term of `F(x) = Σ x_k G_k − G_0 ⪰ 0`.
    pub fn to_sdpa(&self) -> String {
        let nv = self.n_vars + 1;
        let t = nv; // 1-based index of t
        let bounds: Vec<(usize, f64, f64)> = (0..self.n_vars)
            .flat_map(|k| {
                let mut rows = Vec::new();
                if self.lower[k].is_finite() {
                    rows.push((k, 1.0, self.lower[k]));
                }
                if self.upper[k].is_finite() {
                    rows.push((k, -1.0, -self.upper[k]));
                }
                rows
            })
            .collect();
        let mut s = String::new();
        let _ = writeln!(s, "\"ddlmi phase-I feasibility problem\"");
        let _ = writeln!(s, "{nv} = mDIM");
        let nblocks = self.blocks.len() + usize::from(!bounds.is_empty());
        let _ = writeln!(s, "{nblocks} = nBLOCK");
        let mut structs: Vec<String> = Vec::new();
        if !bounds.is_empty() {
            structs.push(format!("-{}", bounds.len()));
        }
        structs.extend(self.blocks.iter().map(|b| b.dim.to_string()));
        let _ = writeln!(s, "{} = bLOCKsTRUCT", structs.join(" "));
        let obj: Vec<String> = (0..nv).map(|k| if k + 1 == t { "-1".into() } else { "0".into() }).collect();
        let _ = writeln!(s, "{}", obj.join(" "));
        let mut blk = 1;
        if !bounds.is_empty() {
            // a·x_k − c ≥ 0  ⇔  G_k = a, G_0 = c
            for (row, &(k, a, c)) in bounds.iter().enumerate() {
                if c != 0.0 {
                    let _ = writeln!(s, "0 {blk} {} {} {:e}", row + 1, row + 1, c);
                }
                let _ = writeln!(s, "{} {blk} {} {} {:e}", k + 1, row + 1, row + 1, a);
            }
            blk += 1;
        }
        for b in &self.blocks {
            // −F0 − Σ x F − t I ⪰ 0  ⇔  G_0 = F0, G_k = −F_k, G_t = −I
            write_upper(&mut s, 0, blk, &b.constant, 1.0);
            for (k, c) in &b.coeffs {
                write_upper(&mut s, k + 1, blk, c, -1.0);
            }
            for i in 0..b.dim {
                let _ = writeln!(s, "{t} {blk} {} {} -1", i + 1, i + 1);
            }
            blk += 1;
        }
        s
    }
}

fn write_upper(s: &mut String, mat: usize, blk: usize, m: &Mat, sign: f64) {
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            let v = m[(i, j)];
            if v != 0.0 {
                let _ = writeln!(s, "{mat} {blk} {} {} {:e}", i + 1, j + 1, sign * v);
            }
        }
    }
}

/// Reduce a list of strict LMIs to an [`SdpProblem`].
pub fn scalarize(
    constraints: &[LmiConstraint],
    vars: &VariableSpace,
    opts: &ScalarizeOptions,
) -> Result<SdpProblem> {
    if constraints.is_empty() {
        return Err(Error::InvalidParameter("no constraints to scalarize".into()));
    }
    let mut blocks = Vec::with_capacity(constraints.len());
    let mut scale: f64 = 0.0;
    for c in constraints {
        let e = &c.expr;
        if e.rows() != e.cols() {
            return Err(Error::Dimension(format!("constraint '{}' is not square", c.label)));
        }
        if e.asymmetry() > 1e-10 {
            return Err(Error::InvalidParameter(format!("constraint '{}' is not symmetric", c.label)));
        }
        if let Some((&k, _)) = e.coeffs.iter().find(|(&k, _)| k >= vars.len()) {
            return Err(Error::InvalidParameter(format!(
                "constraint '{}' references unknown variable {k}",
                c.label
            )));
        }
        scale = scale.max(e.constant().norm());
        let sym = |m: &Mat| (m + m.transpose()) * 0.5;
        blocks.push(SdpBlock {
            label: c.label.clone(),
            dim: e.rows(),
            constant: sym(e.constant()),
            coeffs: e
                .coeffs()
                .filter(|(_, m)| m.iter().any(|&v| v != 0.0))
                .map(|(k, m)| (k, sym(m)))
                .collect(),
        });
    }
    let scale = scale.max(1.0);
    let margin = opts.margin.unwrap_or(1e-7 * scale);
    if margin <= 0.0 || !margin.is_finite() {
        return Err(Error::InvalidParameter("margin must be positive".into()));
    }
    let n = vars.len();
    let lower = (0..n)
        .map(|k| if vars.is_nonneg(k) { 0.0 } else { -opts.bound })
        .collect();
    Ok(SdpProblem {
        n_vars: n,
        var_names: (0..n).map(|k| vars.coordinate_name(k)).collect(),
        blocks,
        lower,
        upper: vec![opts.bound; n],
        margin,
        scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::identity;

    fn sample_assignment(n: usize) -> Vec<f64> {
        (0..n).map(|k| ((k as f64) * 0.7).sin() + 0.1 * k as f64).collect()
    }

    #[test]
    fn packed_indexing_roundtrip() {
        let dim = 4;
        let mut seen = Vec::new();
        for k in 0..dim * (dim + 1) / 2 {
            let (i, j) = packed_to_ij(dim, k);
            assert!(i >= j && i < dim);
            seen.push((i, j));
        }
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 10);
    }

    #[test]
    fn symmetric_variable_is_symmetric() {
        let mut vs = VariableSpace::new();
        let p = vs.symmetric("P", 3).unwrap();
        let x = sample_assignment(vs.len());
        let v = vs.value(p, &x);
        assert_eq!(v, v.transpose());
    }

    #[test]
    fn duplicate_names_rejected() {
        let mut vs = VariableSpace::new();
        vs.scalar("tau", true).unwrap();
        assert!(vs.scalar("tau", true).is_err());
    }

    #[test]
    fn kron_with_zero_alpha_is_zero() {
        let mut vs = VariableSpace::new();
        let p = vs.symmetric("P", 2).unwrap();
        let e = kron_const_var(&Mat::zeros(1, 1), &vs.expr(p));
        let x = sample_assignment(vs.len());
        assert_eq!(e.evaluate(&x).norm(), 0.0);
    }

    #[test]
    fn kron_identity_is_block_diagonal() {
        let mut vs = VariableSpace::new();
        let p = vs.symmetric("P", 2).unwrap();
        let x = sample_assignment(vs.len());
        let pv = vs.value(p, &x);
        let e = kron_const_var(&identity(2), &vs.expr(p)).evaluate(&x);
        assert_eq!(e.view((0, 0), (2, 2)).clone_owned(), pv);
        assert_eq!(e.view((2, 2), (2, 2)).clone_owned(), pv);
        assert_eq!(e.view((0, 2), (2, 2)).norm(), 0.0);
    }

    #[test]
    fn sym_kron_pair_scalar_is_lyapunov_operator() {
        let mut vs = VariableSpace::new();
        let p = vs.symmetric("P", 2).unwrap();
        let a = Mat::from_row_slice(2, 2, &[0.0, 1.0, -2.0, -3.0]);
        let l = vs.expr(p).left_mul(&a).unwrap();
        let e = sym_kron_pair(&Mat::from_element(1, 1, 1.0), &l).unwrap();
        let x = sample_assignment(vs.len());
        let pv = vs.value(p, &x);
        let want = &a * &pv + &pv * a.transpose();
        assert!((e.evaluate(&x) - want).norm() < 1e-14);
    }

    #[test]
    fn sym_kron_pair_of_zero_is_zero() {
        let e = sym_kron_pair(&identity(2), &AffineMatrixExpr::zeros(3, 3)).unwrap();
        assert_eq!(e.evaluate(&[]).norm(), 0.0);
        assert_eq!(e.rows(), 6);
    }

    #[test]
    fn block2x2_identity_roundtrip_and_mismatch() {
        let i2 = AffineMatrixExpr::from_constant(identity(2));
        let i3 = AffineMatrixExpr::from_constant(identity(3));
        let z = AffineMatrixExpr::zeros(3, 2);
        let b = block2x2(&i2, &z, &i3).unwrap();
        assert_eq!(b.evaluate(&[]), identity(5));
        let bad = AffineMatrixExpr::zeros(2, 2);
        assert!(block2x2(&i2, &bad, &i3).is_err());
    }

    #[test]
    fn scalarize_rejects_empty() {
        let vs = VariableSpace::new();
        assert!(scalarize(&[], &vs, &ScalarizeOptions::default()).is_err());
    }

    #[test]
    fn scalarize_scalar_constraint() {
        let mut vs = VariableSpace::new();
        let x = vs.scalar("x", false).unwrap();
        let e = vs.expr(x).add_constant(&Mat::from_element(1, 1, -1.0)).unwrap();
        let prob = scalarize(&[LmiConstraint::new("x<1", e)], &vs, &ScalarizeOptions::default()).unwrap();
        assert_eq!(prob.blocks.len(), 1);
        assert_eq!(prob.blocks[0].dim, 1);
        assert!((prob.max_residual(&[0.5]) + 0.5).abs() < 1e-15);
        assert!(prob.to_sdpa().contains("= mDIM"));
    }
}
