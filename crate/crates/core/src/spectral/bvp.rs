//! Finite-difference solution of the mode boundary-value problems
//!
//! ```text
//! -w'' + (n² + c V(r)) w = 0 on (-L, L),   w(±L) = 1,
//! ```
//!
//! with `V` the indicator of `(-ρ, ρ)`, as an independent check on the closed
//! forms.

use super::{mode_coefficients, ModeKind, ModeParams};
use crate::error::{invalid, Error, Result};
use crate::numerics::solve_tridiagonal;

/// Three-point discretizations of the mode problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BvpScheme {
    /// Exponentially fitted: each cell's three-point coupling is built from
    /// the exact transfer matrix of `w'' = q w` on that cell, splitting cells
    /// at `±ρ`. Exact for piecewise-constant `q` up to rounding.
    #[default]
    Fitted,
    /// Standard central differences with `V = ½` on nodes that sit exactly on
    /// `±ρ` and a second-order one-sided boundary slope. Second order.
    Central,
}

/// Transfer matrix `[[A, B], [C, D]]` mapping `(w, w')` across a length `len`
/// where `w'' = q w`.
fn transfer(q: f64, len: f64) -> [f64; 4] {
    if q > 0.0 {
        let c = q.sqrt();
        let (sh, ch) = ((c * len).sinh(), (c * len).cosh());
        [ch, sh / c, c * sh, ch]
    } else if q < 0.0 {
        let c = (-q).sqrt();
        let (sn, cs) = (c * len).sin_cos();
        [cs, sn / c, -c * sn, cs]
    } else {
        [1.0, len, 0.0, 1.0]
    }
}

fn compose(second: [f64; 4], first: [f64; 4]) -> [f64; 4] {
    let [a2, b2, c2, d2] = second;
    let [a1, b1, c1, d1] = first;
    [
        a2 * a1 + b2 * c1,
        a2 * b1 + b2 * d1,
        c2 * a1 + d2 * c1,
        c2 * b1 + d2 * d1,
    ]
}

/// Transfer matrix of the cell `[a, b]`, split at the potential edges.
fn cell_transfer(a: f64, b: f64, rho: f64, outer: f64, inner: f64) -> [f64; 4] {
    let q_at = |x: f64| if x.abs() < rho { inner } else { outer };
    let mut cuts = vec![a];
    for edge in [-rho, rho] {
        if edge > a && edge < b {
            cuts.push(edge);
        }
    }
    cuts.push(b);
    let mut m = [1.0, 0.0, 0.0, 1.0];
    for w in cuts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        m = compose(transfer(q_at(mid), w[1] - w[0]), m);
    }
    m
}

/// Returns `(w(L), w'(L))`.
fn solve_fitted(l: f64, rho: f64, n2: f64, c: f64, mesh: usize) -> Result<(f64, f64)> {
    let h = 2.0 * l / mesh as f64;
    let node = |k: usize| -l + k as f64 * h;
    let cells: Vec<[f64; 4]> = (0..mesh)
        .map(|k| cell_transfer(node(k), node(k + 1), rho, n2, n2 + c))
        .collect();
    if cells.iter().flatten().any(|v| !v.is_finite()) {
        return Err(invalid("mesh too coarse for the requested wavenumber"));
    }
    let m = mesh - 1;
    let (mut lower, mut diag, mut upper, mut rhs) =
        (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    for k in 1..mesh {
        let [_, b_prev, _, d_prev] = cells[k - 1];
        let [a_next, b_next, _, _] = cells[k];
        let row = k - 1;
        diag[row] = d_prev / b_prev + a_next / b_next;
        if k == 1 {
            rhs[row] += 1.0 / b_prev;
        } else {
            lower[row] = -1.0 / b_prev;
        }
        if k == mesh - 1 {
            rhs[row] += 1.0 / b_next;
        } else {
            upper[row] = -1.0 / b_next;
        }
    }
    let w = solve_tridiagonal(&lower, &diag, &upper, &rhs)?;
    let [_, b, _, d] = cells[mesh - 1];
    Ok((1.0, (d - w[m - 1]) / b))
}

fn solve_central(l: f64, rho: f64, n2: f64, c: f64, mesh: usize) -> Result<(f64, f64)> {
    let h = 2.0 * l / mesh as f64;
    let tol = 1e-12 * l;
    let potential = |x: f64| {
        let a = x.abs();
        if (a - rho).abs() <= tol {
            0.5
        } else if a < rho {
            1.0
        } else {
            0.0
        }
    };
    let m = mesh - 1;
    let h2 = h * h;
    let (mut lower, mut diag, mut upper, mut rhs) =
        (vec![-1.0; m], vec![0.0; m], vec![-1.0; m], vec![0.0; m]);
    for row in 0..m {
        let x = -l + (row + 1) as f64 * h;
        diag[row] = 2.0 + h2 * (n2 + c * potential(x));
    }
    lower[0] = 0.0;
    upper[m - 1] = 0.0;
    rhs[0] = 1.0;
    rhs[m - 1] += 1.0;
    let w = solve_tridiagonal(&lower, &diag, &upper, &rhs)?;
    // w'(L) ≈ (w_M - w_{M-1})/h + (h/2) w''(L), with w''(L) = n² w(L)
    Ok((1.0, (1.0 - w[m - 1]) / h + 0.5 * h * n2))
}

/// `w(L) w'(L) / n` for `-w'' + (n² + c V) w = 0`, `w(±L) = 1`, on `mesh`
/// uniform intervals.
pub fn bvp_boundary_coefficient(
    half_width: f64,
    rho: f64,
    n: usize,
    c: f64,
    mesh: usize,
    scheme: BvpScheme,
) -> Result<f64> {
    if n == 0 {
        return Err(invalid("boundary coefficient needs n >= 1"));
    }
    if mesh < 4 {
        return Err(invalid("mesh must have at least 4 intervals"));
    }
    let n2 = (n * n) as f64;
    let (w, dw) = match scheme {
        BvpScheme::Fitted => solve_fitted(half_width, rho, n2, c, mesh)?,
        BvpScheme::Central => solve_central(half_width, rho, n2, c, mesh)?,
    };
    let value = w * dw / n as f64;
    if !value.is_finite() {
        return Err(Error::SingularSystem { row: mesh - 2 });
    }
    Ok(value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BvpCheck {
    /// Richardson extrapolation `(4 fine - coarse) / 3`.
    pub numeric: f64,
    pub closed_form: f64,
    /// `|numeric - closed_form| / |closed_form|`.
    pub discrepancy: f64,
    /// Value on `mesh / 2` intervals.
    pub coarse: f64,
    /// Value on `mesh` intervals.
    pub fine: f64,
}

/// Solves the mode problem on `mesh / 2` and `mesh` intervals, extrapolates,
/// and compares with the closed-form `Pₙ` or `Qₙ`.
pub fn bvp_cross_check(
    p: &ModeParams,
    kind: ModeKind,
    mesh: usize,
    scheme: BvpScheme,
) -> Result<BvpCheck> {
    if mesh < 64 || mesh % 2 != 0 {
        return Err(invalid("mesh must be an even number of intervals >= 64"));
    }
    let coeffs = mode_coefficients(p)?;
    let (c, closed_form) = match kind {
        ModeKind::Real => (p.kappa() * p.kappa(), coeffs.p),
        ModeKind::Imag => (-p.kappa().powi(-2), coeffs.q),
    };
    let solve = |m| bvp_boundary_coefficient(p.half_width(), p.rho(), p.n(), c, m, scheme);
    let coarse = solve(mesh / 2)?;
    let fine = solve(mesh)?;
    let numeric = (4.0 * fine - coarse) / 3.0;
    Ok(BvpCheck {
        numeric,
        closed_form,
        discrepancy: ((numeric - closed_form) / closed_form).abs(),
        coarse,
        fine,
    })
}
