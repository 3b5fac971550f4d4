//! Dense symmetric eigendecomposition and the matrix helpers built on it.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigenvalues (ascending) and, when requested, the matching unit
/// eigenvectors as columns of a row-major `n × n` matrix.
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Option<Vec<f64>>,
}

/// Diagonalises the symmetric row-major matrix `a` (`n × n`) by Householder
/// tridiagonalisation and implicit QR. The input is symmetrised first.
pub fn symmetric_eigen(a: &[f64], n: usize, want_vectors: bool) -> Result<Eigen> {
    if a.len() != n * n {
        return Err(Error::shape("symmetric_eigen", format!("{} values for a {n}×{n} matrix", a.len())));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("matrix has non-finite entries".into()));
    }
    let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (a[i * n + j] + a[j * n + i]));
    if !want_vectors {
        let mut values: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        return Ok(Eigen { values, vectors: None });
    }
    let e = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| e.eigenvalues[i].total_cmp(&e.eigenvalues[j]));
    let values = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (col, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[k * n + col] = e.eigenvectors[(k, src)];
        }
    }
    Ok(Eigen { values, vectors: Some(vectors) })
}

/// `C = A · B` for row-major square matrices.
pub fn matmul_square(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    unsafe {
        matrixmultiply::dgemm(n, n, n, 1.0, a.as_ptr(), n as isize, 1, b.as_ptr(), n as isize, 1, 0.0, c.as_mut_ptr(), n as isize, 1);
    }
    c
}

/// Principal square root of a symmetric PSD matrix; negative eigenvalues are
/// clamped to zero.
pub fn psd_sqrt(a: &[f64], n: usize) -> Result<Vec<f64>> {
    let e = symmetric_eigen(a, n, true)?;
    let v = e.vectors.expect("vectors requested");
    let mut scaled = v.clone();
    for (j, &lam) in e.values.iter().enumerate() {
        let r = lam.max(0.0).sqrt();
        for k in 0..n {
            scaled[k * n + j] *= r;
        }
    }
    // V diag(√λ) Vᵀ
    let mut out = vec![0.0; n * n];
    unsafe {
        matrixmultiply::dgemm(
            n, n, n, 1.0, scaled.as_ptr(), n as isize, 1, v.as_ptr(), 1, n as isize, 0.0, out.as_mut_ptr(), n as isize, 1,
        );
    }
    Ok(out)
}
