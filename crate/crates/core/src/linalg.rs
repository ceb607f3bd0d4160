// Thin wrappers over faer for the dense operations used throughout.

use faer::linalg::solvers::{Llt, Solve};
use faer::{Col, Mat, Side};

use crate::error::{Error, Result};

pub(crate) fn col(v: &[f64]) -> Col<f64> {
    Col::from_fn(v.len(), |i| v[i])
}

pub(crate) fn to_vec(c: &Col<f64>) -> Vec<f64> {
    (0..c.nrows()).map(|i| c[i]).collect()
}

pub(crate) fn matvec(a: &Mat<f64>, v: &[f64]) -> Vec<f64> {
    let r = a * col(v);
    to_vec(&r)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn frobenius(a: &Mat<f64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)] * a[(i, j)];
        }
    }
    s.sqrt()
}

/// Eigenpairs of a symmetric matrix, eigenvalues nonincreasing.
pub(crate) fn sym_eigen(a: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let n = a.nrows();
    if n == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    let evd = a.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Linalg(format!("eigendecomposition: {e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    // faer returns nondecreasing order
    let values = (0..n).rev().map(|i| s[i]).collect();
    let vectors = Mat::from_fn(n, n, |i, j| u[(i, n - 1 - j)]);
    Ok((values, vectors))
}

/// Eigenvalues only, nonincreasing.
pub(crate) fn sym_eigenvalues(a: &Mat<f64>) -> Result<Vec<f64>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let mut v =
        a.self_adjoint_eigenvalues(Side::Lower).map_err(|e| Error::Linalg(format!("eigenvalues: {e:?}")))?;
    v.reverse();
    Ok(v)
}

/// Cholesky factor of `a + shift * I`.
pub(crate) fn shifted_cholesky(a: &Mat<f64>, shift: f64) -> Result<Llt<f64>> {
    let n = a.nrows();
    let m = Mat::from_fn(n, n, |i, j| if i == j { a[(i, j)] + shift } else { a[(i, j)] });
    m.llt(Side::Lower).map_err(|e| Error::Linalg(format!("cholesky: {e:?}")))
}

pub(crate) fn llt_solve(llt: &Llt<f64>, v: &[f64]) -> Vec<f64> {
    to_vec(&llt.solve(col(v)))
}

/// General square solve with partial pivoting.
pub(crate) fn lu_solve(a: &Mat<f64>, b: &[f64]) -> Vec<f64> {
    to_vec(&a.partial_piv_lu().solve(col(b)))
}
