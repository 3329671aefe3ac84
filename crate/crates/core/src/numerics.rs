//! Small linear-algebra kernels shared by the solvers.

use crate::error::{Error, Result};

/// Solves a tridiagonal system with the Thomas algorithm.
///
/// `lower[i]` couples row `i` to `i - 1` (entry 0 unused), `upper[i]` couples
/// row `i` to `i + 1` (last entry unused).
pub(crate) fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = diag.len();
    debug_assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot.abs() < f64::MIN_POSITIVE || !pivot.is_finite() {
        return Err(Error::SingularSystem { row: 0 });
    }
    c[0] = upper[0] / pivot;
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * c[i - 1];
        if pivot.abs() < f64::MIN_POSITIVE || !pivot.is_finite() {
            return Err(Error::SingularSystem { row: i });
        }
        c[i] = upper[i] / pivot;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / pivot;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

pub(crate) struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Jacobi-preconditioned conjugate gradients for a symmetric positive
/// definite operator given as a closure `apply(x, out)`.
pub(crate) fn preconditioned_cg<F>(
    apply: F,
    diag: &[f64],
    rhs: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<CgOutcome>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = rhs.len();
    let rhs_norm = dot(rhs, rhs).sqrt();
    let mut x = vec![0.0; n];
    if rhs_norm == 0.0 {
        return Ok(CgOutcome {
            x,
            iterations: 0,
            residual: 0.0,
        });
    }
    let mut r = rhs.to_vec();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(ri, di)| ri / di).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut residual = 1.0;
    for it in 0..max_iter {
        apply(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        residual = dot(&r, &r).sqrt() / rhs_norm;
        if residual <= tol {
            return Ok(CgOutcome {
                x,
                iterations: it + 1,
                residual,
            });
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual,
    })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
