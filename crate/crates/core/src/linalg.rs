//! Thin wrappers over faer for the dense solves used by the pipeline.

use faer::linalg::solvers::{Solve, SolveLstsq};
use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result, Stage};

/// Solves `a x = b` for a square real matrix given row-major.
pub fn solve_real(n: usize, a: &[f64], b: &[f64], stage: Stage) -> Result<Vec<f64>> {
    let m = Mat::<f64>::from_fn(n, n, |i, j| a[i * n + j]);
    let rhs = Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
    let x = m.partial_piv_lu().solve(&rhs);
    let out: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
    if out.iter().all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(Error::numerical(stage, "singular linear system"))
    }
}

/// Solves `a x = b` for a square complex matrix given row-major.
pub fn solve_complex(n: usize, a: &[C64], b: &[C64], stage: Stage) -> Result<Vec<C64>> {
    let m = Mat::<C64>::from_fn(n, n, |i, j| a[i * n + j]);
    let rhs = Mat::<C64>::from_fn(n, 1, |i, _| b[i]);
    let x = m.partial_piv_lu().solve(&rhs);
    let out: Vec<C64> = (0..n).map(|i| x[(i, 0)]).collect();
    if out.iter().all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(Error::numerical(stage, "singular linear system"))
    }
}

/// Least-squares solution of an overdetermined complex system `a x ≈ b`,
/// `a` given row-major with `rows ≥ cols`.
pub fn least_squares_complex(rows: usize, cols: usize, a: &[C64], b: &[C64]) -> Vec<C64> {
    let m = Mat::<C64>::from_fn(rows, cols, |i, j| a[i * cols + j]);
    let rhs = Mat::<C64>::from_fn(rows, 1, |i, _| b[i]);
    let x = m.qr().solve_lstsq(&rhs);
    (0..cols).map(|i| x[(i, 0)]).collect()
}

/// Right singular vector of the smallest singular value of a real
/// `rows × cols` matrix, with all singular values in descending order.
pub fn null_vector(rows: &[Vec<f64>], stage: Stage) -> Result<(Vec<f64>, Vec<f64>)> {
    let r = rows.len();
    let c = rows.first().map_or(0, |v| v.len());
    if r < c || c == 0 {
        return Err(Error::numerical(stage, "underdetermined null-space problem"));
    }
    let m = Mat::<f64>::from_fn(r, c, |i, j| rows[i][j]);
    let svd = m
        .thin_svd()
        .map_err(|e| Error::numerical(stage, format!("SVD failed: {e:?}")))?;
    let s: Vec<f64> = (0..c).map(|k| svd.S()[k]).collect();
    let kmin = (0..c).min_by(|&a, &b| s[a].total_cmp(&s[b])).unwrap();
    let v: Vec<f64> = (0..c).map(|i| svd.V()[(i, kmin)]).collect();
    let mut sorted = s;
    sorted.sort_by(|a, b| b.total_cmp(a));
    Ok((v, sorted))
}
