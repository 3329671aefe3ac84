//! Linear mode reduction of the Ginzburg-Landau problem near the unit
//! constant.
//!
//! On `[-L, L] × [0, 2π)` the quadratic functional
//!
//! ```text
//! F_κ[w] = ½∫|∇w|² + ∫_{-ρ}^{ρ}∫ (κ²/2 (Re w - 1)² - κ⁻²/2 (Im w)²)
//! ```
//!
//! separates in Fourier modes. Each mode `n` has a real profile `w⁽¹⁾`
//! solving `-w'' + (n² + κ² V) w = 0` and an imaginary profile `w⁽²⁾` solving
//! `-w'' + (n² - κ⁻² V) w = 0`, both equal to one at `r = ±L`, where `V` is the
//! indicator of `(-ρ, ρ)`. The boundary coefficients `Pₙ = w⁽¹⁾(L) w⁽¹⁾'(L)/n`
//! and `Qₙ` (likewise for `w⁽²⁾`) decide whether `F` can drop to `2π`.

mod bvp;
mod certificate;
mod coefficients;
mod functional;
mod profile;

pub use bvp::{bvp_boundary_coefficient, bvp_cross_check, BvpCheck, BvpScheme};
pub use certificate::{
    certify_nonexistence, kappa0_search, tail_bound, Certificate, KappaSearch, TailBound,
};
pub use coefficients::{
    mode_coefficients, mode_table, write_mode_table, ModeCoefficients, ModeRow,
};
pub use functional::{
    aligned_radial_nodes, constrained_min, constrained_min_with, f_eval, linear_solve,
    ConstrainedMin, LinearSolution, ModeContribution,
};
pub use profile::{mode_profile, p0_slope, ModeProfile};

use crate::error::{invalid, Result};
use crate::geometry::Annulus;

/// Which of the two mode families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    /// `w⁽¹⁾`, coefficient `Pₙ`; carries the real part.
    Real,
    /// `w⁽²⁾`, coefficient `Qₙ`; carries the imaginary part.
    Imag,
}

/// A single mode `n` at `(κ, L, ρ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeParams {
    n: usize,
    kappa: f64,
    half_width: f64,
    rho: f64,
}

impl ModeParams {
    /// Requires `0 < ρ < L` and `κ > 1`. `n = 0` is accepted for the real
    /// profile only.
    pub fn new(n: usize, kappa: f64, half_width: f64, rho: f64) -> Result<Self> {
        if !half_width.is_finite() || half_width <= 0.0 {
            return Err(invalid("half log-width L must be positive"));
        }
        if !rho.is_finite() || rho <= 0.0 || rho >= half_width {
            return Err(invalid(format!(
                "rho must satisfy 0 < rho < L = {half_width}"
            )));
        }
        check_kappa(kappa)?;
        Ok(Self {
            n,
            kappa,
            half_width,
            rho,
        })
    }

    pub fn from_annulus(annulus: &Annulus, kappa: f64, n: usize) -> Result<Self> {
        Self::new(n, kappa, annulus.half_width(), annulus.rho())
    }

    pub fn with_n(self, n: usize) -> Self {
        Self { n, ..self }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Width `L - ρ` of each potential-free strip.
    pub fn gap(&self) -> f64 {
        self.half_width - self.rho
    }

    /// Inner wavenumber `√(n² + κ²)` or `√(n² - κ⁻²)`.
    pub fn inner_wavenumber(&self, kind: ModeKind) -> f64 {
        let n2 = (self.n * self.n) as f64;
        match kind {
            ModeKind::Real => (self.n as f64).hypot(self.kappa),
            ModeKind::Imag => (n2 - self.kappa.powi(-2)).sqrt(),
        }
    }
}

pub(crate) fn check_kappa(kappa: f64) -> Result<()> {
    if !kappa.is_finite() || kappa <= 1.0 {
        return Err(invalid("kappa must exceed 1"));
    }
    Ok(())
}

/// `1 - tanh(y)` without cancellation, `y ≥ 0`.
pub(crate) fn one_minus_tanh(y: f64) -> f64 {
    let e = (-2.0 * y).exp();
    2.0 * e / (1.0 + e)
}
