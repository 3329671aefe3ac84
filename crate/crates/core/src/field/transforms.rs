//! Reflection symmetrization, phase normalization and the boundary-average
//! identities.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::energy::row_sums;
use super::{ComplexField, Side};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Symmetrized {
    pub field: ComplexField,
    /// Half of the rectangle that was kept and mirrored.
    pub kept: Side,
    /// Bound energy of the kept half; the output's bound energy is twice this.
    pub half_energy: f64,
}

/// Bound energies (`e^{2r}` replaced by `1/R²`) of the lower and upper halves.
/// An odd centre row is split evenly; the edges straddling `r = 0` for even
/// `nr` belong to neither half.
fn half_energies(u: &ComplexField, kappa: f64) -> (f64, f64) {
    let nr = u.nr();
    let (hr, hphi) = (u.hr(), u.hphi());
    let big_r = u.annulus().outer_radius();
    let pot_w = 0.25 * kappa * kappa / (big_r * big_r) * hr * hphi;
    let sums = row_sums(u);
    let row_term = |i: usize| {
        let w = u.row_weight(i);
        0.5 * hr / hphi * w * sums.angular[i] + pot_w * w * sums.potential[i]
    };
    let edge = |i: usize| 0.5 * hphi / hr * sums.radial[i];

    let (lower, upper);
    if nr % 2 == 1 {
        let c = nr / 2;
        lower =
            (0..c).map(edge).sum::<f64>() + (0..c).map(row_term).sum::<f64>() + 0.5 * row_term(c);
        upper = (c..nr - 1).map(edge).sum::<f64>()
            + (c + 1..nr).map(row_term).sum::<f64>()
            + 0.5 * row_term(c);
    } else {
        let h = nr / 2;
        lower = (0..h - 1).map(edge).sum::<f64>() + (0..h).map(row_term).sum::<f64>();
        upper = (h..nr - 1).map(edge).sum::<f64>() + (h..nr).map(row_term).sum::<f64>();
    }
    (lower, upper)
}

/// Reflects the half with the smaller bound energy across `r = 0`, so that
/// `u(r, φ) = u(-r, φ)` holds exactly and the bound energy of the result is
/// at most `E_κ[u]`.
pub fn symmetrize(u: &ComplexField, kappa: f64) -> Symmetrized {
    let nr = u.nr();
    let (lower, upper) = half_energies(u, kappa);
    let kept = if upper <= lower {
        Side::Outer
    } else {
        Side::Inner
    };
    let mut out = u.clone();
    for i in 0..nr {
        let mirror = nr - 1 - i;
        let source = match kept {
            Side::Outer => i.max(mirror),
            Side::Inner => i.min(mirror),
        };
        if source != i {
            let row = u.row(source).to_vec();
            for (j, z) in row.into_iter().enumerate() {
                out.set(i, j, z);
            }
        }
    }
    Symmetrized {
        field: out,
        kept,
        half_energy: lower.min(upper),
    }
}

/// `∫₀^{2π} u(±L, φ) dφ` by the periodic trapezoid rule.
fn boundary_integral(u: &ComplexField, side: Side) -> Complex64 {
    u.boundary_row(side).iter().sum::<Complex64>() * u.hphi()
}

/// Rotates `u` by a unit constant so that `∫ u(L, φ) dφ` is real and
/// nonnegative. Returns the rotated field and the unit constant `γ` with
/// `output = γ̄ u`.
pub fn phase_normalize(u: &ComplexField) -> Result<(ComplexField, Complex64)> {
    let integral = boundary_integral(u, Side::Outer);
    let scale: f64 = u
        .boundary_row(Side::Outer)
        .iter()
        .map(|z| z.norm())
        .sum::<f64>()
        * u.hphi();
    if integral.norm() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::VanishingAverage);
    }
    let gamma = integral / integral.norm();
    Ok((u.scaled(gamma.conj()), gamma))
}

/// `(|∫u(L,φ)dφ - 2πγ|, |∫u(-L,φ)dφ - 2πγ|)`, i.e. the deviations of
/// `(1/R)∮_{|x|=R} u dσ` and `R∮_{|x|=1/R} u dσ` from `2πγ`.
pub fn boundary_identity_residual(u: &ComplexField, gamma: Complex64) -> (f64, f64) {
    let target = gamma * (2.0 * PI);
    (
        (boundary_integral(u, Side::Outer) - target).norm(),
        (boundary_integral(u, Side::Inner) - target).norm(),
    )
}
