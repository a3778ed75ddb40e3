//! Complex vector/matrix aliases and the few Hermitian helpers the crate needs.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type Cx = Complex64;
pub type CVec = DVector<Cx>;
pub type CMat = DMatrix<Cx>;

/// Largest entrywise deviation from Hermitian symmetry.
pub fn hermitian_defect(m: &CMat) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    hermitian_defect(m) <= tol
}

/// Eigenvalues of a Hermitian matrix, ascending. Only the Hermitian part of
/// `m` is used.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let sym = (m + m.adjoint()) * Cx::from(0.5);
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

pub fn lambda_min(m: &CMat) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}

pub fn lambda_max(m: &CMat) -> f64 {
    hermitian_eigenvalues(m).last().copied().unwrap_or(0.0)
}

/// Ascending eigenvalues of a real symmetric matrix.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Re{x^H A x}; exact for Hermitian A.
pub fn quad_form(a: &CMat, x: &CVec) -> f64 {
    x.dotc(&(a * x)).re
}

/// x^H y, conjugating the first argument.
pub fn inner(x: &CVec, y: &CVec) -> Cx {
    x.dotc(y)
}

/// Σ_g w_g w_g^H.
pub fn sum_outer(ws: &[CVec], n: usize) -> CMat {
    let mut q = CMat::zeros(n, n);
    for w in ws {
        q += w * w.adjoint();
    }
    q
}

/// Nearest PSD matrix (Frobenius norm) to the Hermitian part of `m`.
pub fn psd_projection(m: &CMat) -> CMat {
    let herm = (m + m.adjoint()) * Cx::from(0.5);
    let eig = herm.symmetric_eigen();
    let mut out = CMat::zeros(m.nrows(), m.ncols());
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > 0.0 {
            let v = eig.eigenvectors.column(i);
            out += v * v.adjoint() * Cx::from(lam);
        }
    }
    (&out + out.adjoint()) * Cx::from(0.5)
}
