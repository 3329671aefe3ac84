//! Closed-form mode profiles `w⁽¹⁾ₙ`, `w⁽²⁾ₙ` and the `n = 0` real profile.
//!
//! For `n ≥ 1`, with `D = (1 + E) + T(1 - E)`, `x = |r| - ρ ≥ 0` on the outer
//! branches and `a = |r| < ρ` on the inner one:
//!
//! ```text
//! w = e^{n(x-d)} ((1 + e^{-2nx}) + T(1 - e^{-2nx})) / D
//! w = e^{s(a-ρ)} (1 + e^{-2sa}) / (1 + e^{-2sρ}) · 2e^{-nd} / D
//! ```
//!
//! which is the textbook three-branch `cosh`/`sinh` solution divided by `γ`,
//! with every exponential argument nonpositive.

use super::coefficients::transfer_ratio;
use super::{ModeKind, ModeParams};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeProfile {
    n: usize,
    rho: f64,
    gap: f64,
    /// Inner wavenumber.
    s: f64,
    /// `n ≥ 1`: `T`. `n = 0`: the slope `s tanh(ρs)` on the outer branch.
    t: f64,
    /// `n ≥ 1`: `D`. `n = 0`: `1 + d s tanh(ρs)`.
    denom: f64,
}

/// Profile of mode `n` in the requested family. `n = 0` is available for the
/// real family only (the imaginary `n = 0` mode never enters: `Im a₀ = 0`).
pub fn mode_profile(p: &ModeParams, kind: ModeKind) -> Result<ModeProfile> {
    let s = p.inner_wavenumber(kind);
    let d = p.gap();
    if p.n() == 0 {
        if kind == ModeKind::Imag {
            return Err(invalid("the imaginary family starts at n = 1"));
        }
        let slope = s * (p.rho() * s).tanh();
        return Ok(ModeProfile {
            n: 0,
            rho: p.rho(),
            gap: d,
            s,
            t: slope,
            denom: 1.0 + d * slope,
        });
    }
    let (t, _) = transfer_ratio(p, kind);
    let nd = p.n() as f64 * d;
    let e = (-2.0 * nd).exp();
    Ok(ModeProfile {
        n: p.n(),
        rho: p.rho(),
        gap: d,
        s,
        t,
        denom: (1.0 + e) + t * -(-2.0 * nd).exp_m1(),
    })
}

/// `w₀'(L) = κ tanh(κρ) / (1 + κ(L - ρ) tanh(κρ))`, the slope entering the
/// `n = 0` term `2π(a₀ - 1)² w₀'(L)`.
pub fn p0_slope(p: &ModeParams) -> f64 {
    let s = p.kappa();
    let t = s * (p.rho() * s).tanh();
    t / (1.0 + p.gap() * t)
}

impl ModeProfile {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `w` and `dw/d|r|` on `|r| ≥ ρ`.
    fn outer(&self, x: f64) -> (f64, f64) {
        if self.n == 0 {
            return ((1.0 + self.t * x) / self.denom, self.t / self.denom);
        }
        let n = self.n as f64;
        let lead = (n * (x - self.gap)).exp() / self.denom;
        let e = (-2.0 * n * x).exp();
        (
            lead * ((1.0 + e) + self.t * (1.0 - e)),
            n * lead * ((1.0 - e) + self.t * (1.0 + e)),
        )
    }

    /// `w` and `dw/d|r|` on `|r| ≤ ρ`.
    fn inner(&self, a: f64) -> (f64, f64) {
        let s = self.s;
        let scale = if self.n == 0 {
            1.0 / self.denom
        } else {
            2.0 * (-(self.n as f64) * self.gap).exp() / self.denom
        };
        let lead = (s * (a - self.rho)).exp() / (1.0 + (-2.0 * s * self.rho).exp()) * scale;
        let e = (-2.0 * s * a).exp();
        (lead * (1.0 + e), s * lead * (1.0 - e))
    }

    fn eval(&self, r: f64) -> (f64, f64) {
        let a = r.abs();
        let (w, dw) = if a >= self.rho {
            self.outer(a - self.rho)
        } else {
            self.inner(a)
        };
        (w, if r < 0.0 { -dw } else { dw })
    }

    pub fn value(&self, r: f64) -> f64 {
        self.eval(r).0
    }

    pub fn derivative(&self, r: f64) -> f64 {
        self.eval(r).1
    }

    /// `w'(L)`.
    pub fn boundary_slope(&self) -> f64 {
        self.outer(self.gap).1
    }

    /// `w(L) w'(L) / n` for `n ≥ 1`; equals `Pₙ` or `Qₙ`.
    pub fn boundary_coefficient(&self) -> f64 {
        let (w, dw) = self.outer(self.gap);
        w * dw / self.n.max(1) as f64
    }
}
