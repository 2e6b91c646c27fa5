//! Covariance repair and factorization.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigenvalue floor applied before factorizing a covariance matrix.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// Symmetrizes `cov` (row-major, `n x n`) and clips its eigenvalues at
/// [`EIGEN_FLOOR`]. Returns the repaired matrix and whether any eigenvalue
/// was clipped.
pub fn repair_psd(cov: &[f64], n: usize) -> (Vec<f64>, bool) {
    if n == 0 {
        return (Vec::new(), false);
    }
    let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (cov[i * n + j] + cov[j * n + i]));
    let eig = SymmetricEigen::new(m);
    let mut clipped = false;
    let vals = eig.eigenvalues.map(|l| {
        if l < EIGEN_FLOOR {
            clipped = true;
            EIGEN_FLOOR
        } else {
            l
        }
    });
    if !clipped {
        let sym: Vec<f64> = (0..n * n).map(|k| 0.5 * (cov[k] + cov[(k % n) * n + k / n])).collect();
        return (sym, false);
    }
    let v = &eig.eigenvectors;
    let rebuilt = v * DMatrix::from_diagonal(&vals) * v.transpose();
    let out = (0..n * n).map(|k| 0.5 * (rebuilt[(k / n, k % n)] + rebuilt[(k % n, k / n)])).collect();
    (out, true)
}

/// Lower Cholesky factor (row-major) of a repaired covariance matrix.
pub fn cholesky(cov: &[f64], n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let m = DMatrix::from_row_slice(n, n, cov);
    let chol = m
        .cholesky()
        .ok_or_else(|| Error::InvalidModel("covariance is not positive definite after repair".into()))?;
    let l = chol.l();
    Ok((0..n * n).map(|k| l[(k / n, k % n)]).collect())
}

/// Lower factor `L` (row-major) with `L L' = cov` for a positive
/// semi-definite `cov`. Zero pivots give zero columns, so degenerate
/// directions stay exactly degenerate. Matrices that are not semi-definite
/// are repaired with [`repair_psd`] first; the returned flag records that.
pub fn factor_covariance(cov: &[f64], n: usize) -> Result<(Vec<f64>, Vec<f64>, bool)> {
    let sym: Vec<f64> = (0..n * n).map(|k| 0.5 * (cov[k] + cov[(k % n) * n + k / n])).collect();
    if let Some(l) = semidefinite_cholesky(&sym, n) {
        return Ok((sym, l, false));
    }
    let (repaired, _) = repair_psd(&sym, n);
    let l = cholesky(&repaired, n)?;
    Ok((repaired, l, true))
}

fn semidefinite_cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let scale = (0..n).map(|i| a[i * n + i].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let tol = 1e-13 * scale;
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let d = a[j * n + j] - (0..j).map(|k| l[j * n + k] * l[j * n + k]).sum::<f64>();
        if d > tol {
            let root = d.sqrt();
            l[j * n + j] = root;
            for i in j + 1..n {
                let s = a[i * n + j] - (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum::<f64>();
                l[i * n + j] = s / root;
            }
        } else if d >= -tol {
            for i in j + 1..n {
                let s = a[i * n + j] - (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum::<f64>();
                if s.abs() > 1e-7 * scale {
                    return None;
                }
            }
        } else {
            return None;
        }
    }
    Some(l)
}
