//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type C64 = Complex<f64>;

/// `a ⊗ b`.
pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

/// `m + mᵀ`.
pub fn tr_sym(m: &Mat) -> Mat {
    m + m.transpose()
}

/// Symmetric part `(m + mᵀ) / 2`.
pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

pub fn identity(n: usize) -> Mat {
    Mat::identity(n, n)
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn sym_eigenvalues(m: &Mat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(symmetrize(m)).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

pub fn max_eig(m: &Mat) -> f64 {
    sym_eigenvalues(m).last().copied().unwrap_or(f64::NEG_INFINITY)
}

pub fn min_eig(m: &Mat) -> f64 {
    sym_eigenvalues(m).first().copied().unwrap_or(f64::INFINITY)
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(m: &Mat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Apply `f` to the eigenvalues of a symmetric matrix.
pub fn sym_map(m: &Mat, f: impl Fn(f64) -> f64) -> Mat {
    let eig = SymmetricEigen::new(symmetrize(m));
    let d = DVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|&l| f(l)));
    &eig.eigenvectors * Mat::from_diagonal(&d) * eig.eigenvectors.transpose()
}

/// Positive semidefinite square root; negative eigenvalues are clipped to zero.
pub fn psd_sqrt(m: &Mat) -> Mat {
    sym_map(m, |l| l.max(0.0).sqrt())
}

/// Inverse square root of a positive definite matrix.
pub fn pd_inv_sqrt(m: &Mat) -> Result<Mat> {
    let ev = sym_eigenvalues(m);
    if ev.first().is_none_or(|&l| l <= 0.0) {
        return Err(Error::Numerical("matrix is not positive definite".into()));
    }
    Ok(sym_map(m, |l| 1.0 / l.sqrt()))
}

/// Eigenvalues of a general real square matrix.
pub fn eigenvalues(m: &Mat) -> Vec<C64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<C64> = m.complex_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    ev
}

/// Largest eigenvalue of the Hermitian matrix `re + j·im` (with `im` antisymmetric),
/// computed through its real symmetric embedding.
pub fn hermitian_max_eig(re: &Mat, im: &Mat) -> f64 {
    let s = re.nrows();
    let mut emb = Mat::zeros(2 * s, 2 * s);
    emb.view_mut((0, 0), (s, s)).copy_from(re);
    emb.view_mut((s, s), (s, s)).copy_from(re);
    emb.view_mut((0, s), (s, s)).copy_from(&(-im));
    emb.view_mut((s, 0), (s, s)).copy_from(im);
    max_eig(&emb)
}

/// Stack blocks row-wise; all blocks in a row share a height, all columns share a width.
pub fn block(rows: &[Vec<&Mat>]) -> Result<Mat> {
    let heights: Vec<usize> = rows.iter().map(|r| r.first().map_or(0, |m| m.nrows())).collect();
    let widths: Vec<usize> = rows
        .first()
        .map(|r| r.iter().map(|m| m.ncols()).collect())
        .unwrap_or_default();
    let mut out = Mat::zeros(heights.iter().sum(), widths.iter().sum());
    let mut r0 = 0;
    for (row, &h) in rows.iter().zip(&heights) {
        if row.len() != widths.len() {
            return Err(Error::Dimension("ragged block row".into()));
        }
        let mut c0 = 0;
        for (m, &w) in row.iter().zip(&widths) {
            if m.nrows() != h || m.ncols() != w {
                return Err(Error::Dimension(format!(
                    "block {}x{} does not fit slot {}x{}",
                    m.nrows(),
                    m.ncols(),
                    h,
                    w
                )));
            }
            out.view_mut((r0, c0), (h, w)).copy_from(*m);
            c0 += w;
        }
        r0 += h;
    }
    Ok(out)
}

/// Row-major nested vectors to a matrix. An empty outer vector gives a `0 x cols` matrix.
pub fn from_rows(rows: &[Vec<f64>], cols_if_empty: usize) -> Result<Mat> {
    if rows.is_empty() {
        return Ok(Mat::zeros(0, cols_if_empty));
    }
    let c = rows[0].len();
    if rows.iter().any(|r| r.len() != c) {
        return Err(Error::Dimension("ragged row-major array".into()));
    }
    Ok(Mat::from_fn(rows.len(), c, |i, j| rows[i][j]))
}

pub fn to_rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Relative symmetry defect `‖m − mᵀ‖_F / max(1, ‖m‖_F)`.
pub fn asymmetry(m: &Mat) -> f64 {
    (m - m.transpose()).norm() / m.norm().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psd_sqrt_squares_back() {
        let m = Mat::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let r = psd_sqrt(&m);
        assert!((&r * &r - &m).norm() < 1e-12);
    }

    #[test]
    fn hermitian_embedding_matches_direct() {
        // [[1, j],[−j, 1]] has eigenvalues 0 and 2.
        let re = identity(2);
        let im = Mat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!((hermitian_max_eig(&re, &im) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn block_rejects_mismatch() {
        let a = identity(2);
        let b = Mat::zeros(3, 1);
        assert!(block(&[vec![&a, &b]]).is_err());
    }
}
