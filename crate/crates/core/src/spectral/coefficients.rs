//! Closed-form mode coefficients `Pₙ, Qₙ, αₙ, βₙ` and the normalizers `γ`.
//!
//! With `d = L - ρ`, `E = e^{-2nd}`, `T₁ = √(1 + κ²/n²) tanh(ρ√(n² + κ²))` and
//! `T₂ = √(1 - (κn)⁻²) tanh(ρ√(n² - κ⁻²))`:
//!
//! ```text
//! P = ((1 - E) + (1 + E) T₁) / ((1 + E) + (1 - E) T₁)
//! Q = ((1 - E) + (1 + E) T₂) / ((1 + E) + (1 - E) T₂)
//! α = (1 - T₂) / (1 + T₂),   β = (T₁ - 1) / (T₁ + 1)
//! ```
//!
//! Everything is assembled from `e^{-x}` with `x ≥ 0`, so no intermediate
//! overflows however large `n d` or `ρ√(n² + κ²)` get.

use std::io::Write;

use serde::Serialize;

use super::{one_minus_tanh, ModeKind, ModeParams};
use crate::error::{invalid, Result};
use crate::geometry::Annulus;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeCoefficients {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
    /// `ln γ⁽¹⁾`; the normalizer itself overflows long before its logarithm.
    pub log_gamma1: f64,
    /// `ln γ⁽²⁾`.
    pub log_gamma2: f64,
    /// `E = e^{-2n(L-ρ)}`.
    pub decay: f64,
}

impl ModeCoefficients {
    pub fn gamma1(&self) -> f64 {
        self.log_gamma1.exp()
    }

    pub fn gamma2(&self) -> f64 {
        self.log_gamma2.exp()
    }

    pub fn pq(&self) -> f64 {
        self.p * self.q
    }

    /// `PQ - 1 = 2E(β - α) / ((1 - βE)(1 + αE))`, resolved even where `PQ`
    /// itself rounds to one.
    pub fn pq_excess(&self) -> f64 {
        let e = self.decay;
        2.0 * e * (self.beta - self.alpha) / ((1.0 - self.beta * e) * (1.0 + self.alpha * e))
    }

    /// `P - 1 = 2βE / (1 - βE)`.
    pub fn p_excess(&self) -> f64 {
        2.0 * self.beta * self.decay / (1.0 - self.beta * self.decay)
    }

    /// `1 - Q = 2αE / (1 + αE)`.
    pub fn q_deficit(&self) -> f64 {
        2.0 * self.alpha * self.decay / (1.0 + self.alpha * self.decay)
    }

    /// `β - α`; positive exactly when `PQ > 1`.
    pub fn margin(&self) -> f64 {
        self.beta - self.alpha
    }
}

/// `T` for either family, together with `1 - T` evaluated without
/// cancellation.
pub(crate) fn transfer_ratio(p: &ModeParams, kind: ModeKind) -> (f64, f64) {
    let n = p.n() as f64;
    let s = p.inner_wavenumber(kind);
    let y = p.rho() * s;
    let tanh = y.tanh();
    let deficit = one_minus_tanh(y);
    match kind {
        ModeKind::Real => {
            let q = p.kappa() / n;
            let c = q.hypot(1.0);
            // c·tanh - 1 = (c - 1) - c(1 - tanh), c - 1 = q²/(c + 1)
            let excess = q * (q / (c + 1.0)) - c * deficit;
            (c * tanh, -excess)
        }
        ModeKind::Imag => {
            let x = (p.kappa() * n).powi(-2);
            let c = (1.0 - x).sqrt();
            (c * tanh, x / (1.0 + c) + c * deficit)
        }
    }
}

/// `((1 - E) + (1 + E)T) / ((1 + E) + (1 - E)T)` with `E = e^{-2nd}`.
fn boundary_ratio(nd: f64, t: f64) -> f64 {
    let e = (-2.0 * nd).exp();
    let one_minus_e = -(-2.0 * nd).exp_m1();
    (one_minus_e + (1.0 + e) * t) / ((1.0 + e) + one_minus_e * t)
}

/// `ln γ = n d + ρ s - ln 4 + ln((1 + E)(1 + F) + (s/n)(1 - E)(1 - F))` with
/// `F = e^{-2ρs}`.
fn log_gamma(p: &ModeParams, kind: ModeKind) -> f64 {
    let n = p.n() as f64;
    let s = p.inner_wavenumber(kind);
    let nd = n * p.gap();
    let e = (-2.0 * nd).exp();
    let f = (-2.0 * p.rho() * s).exp();
    nd + p.rho() * s - 4f64.ln() + ((1.0 + e) * (1.0 + f) + s / n * (1.0 - e) * (1.0 - f)).ln()
}

/// Closed-form coefficients of mode `n ≥ 1`.
pub fn mode_coefficients(p: &ModeParams) -> Result<ModeCoefficients> {
    if p.n() == 0 {
        return Err(invalid("mode coefficients need n >= 1"));
    }
    let nd = p.n() as f64 * p.gap();
    let (t1, t1_deficit) = transfer_ratio(p, ModeKind::Real);
    let (t2, t2_deficit) = transfer_ratio(p, ModeKind::Imag);
    Ok(ModeCoefficients {
        n: p.n(),
        p: boundary_ratio(nd, t1),
        q: boundary_ratio(nd, t2),
        alpha: t2_deficit / (1.0 + t2),
        beta: -t1_deficit / (t1 + 1.0),
        log_gamma1: log_gamma(p, ModeKind::Real),
        log_gamma2: log_gamma(p, ModeKind::Imag),
        decay: (-2.0 * nd).exp(),
    })
}

/// One row of the mode table CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeRow {
    pub n: usize,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(rename = "PQ")]
    pub pq: f64,
    pub margin: f64,
}

impl From<&ModeCoefficients> for ModeRow {
    fn from(c: &ModeCoefficients) -> Self {
        Self {
            n: c.n,
            p: c.p,
            q: c.q,
            alpha: c.alpha,
            beta: c.beta,
            pq: c.pq(),
            margin: c.margin(),
        }
    }
}

/// Coefficients for `n = 1..=n_max`.
pub fn mode_table(annulus: &Annulus, kappa: f64, n_max: usize) -> Result<Vec<ModeCoefficients>> {
    let base = ModeParams::from_annulus(annulus, kappa, 1)?;
    (1..=n_max)
        .map(|n| mode_coefficients(&base.with_n(n)))
        .collect()
}

/// Writes `n,P,Q,alpha,beta,PQ,margin`.
pub fn write_mode_table<W: Write>(rows: &[ModeCoefficients], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for c in rows {
        w.serialize(ModeRow::from(c))?;
    }
    w.flush()?;
    Ok(())
}
