//! Finite certificates that `αₙ < βₙ` (equivalently `PₙQₙ > 1`) for every
//! mode `n ≥ 1`.
//!
//! Modes up to `n_checked` are evaluated directly. Beyond that, for
//! `n ≥ m ≥ 1/ρ`, the monotone envelopes
//!
//! ```text
//! n² αₙ ≤ A(m) = [κ⁻²/(1 + c₂(m)) + 2m² e^{-2ρ s₂(m)}] / (1 + c₂(m) tanh(ρ s₂(m)))
//! n² βₙ ≥ B(m) = [κ²/(c₁(m) + 1) - 2 s₁(m)² e^{-2ρ s₁(m)}] / (c₁(m) + 1)
//! ```
//!
//! hold, with `c₁ = √(1 + κ²/m²)`, `c₂ = √(1 - (κm)⁻²)`, `s₁ = √(m² + κ²)`,
//! `s₂ = √(m² - κ⁻²)`. They follow from `1 - c₂ = (κn)⁻²/(1 + c₂)`,
//! `c₁ - 1 = (κ/n)²/(c₁ + 1)`, `1 - tanh y ≤ 2e^{-2y}`, and the fact that
//! `x² e^{-2ρx}` decreases for `x ≥ 1/ρ`. `B(m) > A(m)` settles the tail.

use serde::Serialize;

use super::{check_kappa, mode_coefficients, ModeParams};
use crate::error::{invalid, Result};
use crate::geometry::Annulus;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBound {
    /// First mode covered.
    pub from_mode: usize,
    /// Upper envelope `A` of `n² αₙ`.
    pub alpha_envelope: f64,
    /// Lower envelope `B` of `n² βₙ`.
    pub beta_envelope: f64,
}

impl TailBound {
    pub fn holds(&self) -> bool {
        self.beta_envelope > self.alpha_envelope
    }
}

/// Envelopes valid for all `n ≥ m`; requires `m ≥ 1/ρ`.
pub fn tail_bound(rho: f64, kappa: f64, m: usize) -> Result<TailBound> {
    check_kappa(kappa)?;
    let mf = m as f64;
    if !(rho > 0.0) || mf * rho < 1.0 {
        return Err(invalid("tail envelopes need m >= 1/rho"));
    }
    let k2 = kappa * kappa;
    let q = kappa / mf;
    let c1 = q.hypot(1.0);
    let c2 = (1.0 - 1.0 / (k2 * mf * mf)).sqrt();
    let s1 = mf.hypot(kappa);
    let s2 = (mf * mf - 1.0 / k2).sqrt();
    let alpha_envelope = (1.0 / (k2 * (1.0 + c2)) + 2.0 * mf * mf * (-2.0 * rho * s2).exp())
        / (1.0 + c2 * (rho * s2).tanh());
    // κ²/(c₁ + 1)² written as m²(q/(c₁ + 1))² so that huge κ stays finite
    let beta_envelope = (mf * mf) * (q / (c1 + 1.0)).powi(2)
        - 2.0 * s1 * (s1 * (-2.0 * rho * s1).exp()) / (c1 + 1.0);
    Ok(TailBound {
        from_mode: m,
        alpha_envelope,
        beta_envelope,
    })
}

/// Emitted as JSON with exactly the fields `L,rho,kappa,n_checked,margin,
/// tail_note,valid`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    #[serde(rename = "L")]
    pub half_width: f64,
    pub rho: f64,
    pub kappa: f64,
    /// Largest mode evaluated directly.
    pub n_checked: usize,
    /// `min_{n ≤ n_checked} (βₙ - αₙ)`.
    pub margin: f64,
    pub tail_note: String,
    pub valid: bool,
    /// First directly checked mode with `αₙ ≥ βₙ`.
    #[serde(skip)]
    pub failing_mode: Option<usize>,
    #[serde(skip)]
    pub tail: TailBound,
}

/// Checks `αₙ < βₙ` for `n ≤ max(N_max, ⌈1/ρ⌉)` and applies the tail
/// envelopes beyond. Requires a thick annulus (`L > 1`) and `κ > 1`.
pub fn certify_nonexistence(annulus: &Annulus, kappa: f64, n_max: usize) -> Result<Certificate> {
    let l = annulus.half_width();
    if l <= 1.0 {
        return Err(invalid("certificates need a thick annulus (L > 1)"));
    }
    if n_max < 1 {
        return Err(invalid("N_max must be at least 1"));
    }
    let base = ModeParams::from_annulus(annulus, kappa, 1)?;
    let rho = annulus.rho();
    let n_checked = n_max.max((1.0 / rho).ceil() as usize);
    let mut margin = f64::INFINITY;
    let mut failing_mode = None;
    for n in 1..=n_checked {
        let c = mode_coefficients(&base.with_n(n))?;
        let m = c.margin();
        if m <= 0.0 && failing_mode.is_none() {
            failing_mode = Some(n);
        }
        margin = margin.min(m);
    }
    let tail = tail_bound(rho, kappa, n_checked + 1)?;
    let tail_note = format!(
        "for n >= {}: n^2 alpha_n <= {:.6e} {} {:.6e} <= n^2 beta_n",
        tail.from_mode,
        tail.alpha_envelope,
        if tail.holds() { "<" } else { "is not below" },
        tail.beta_envelope
    );
    Ok(Certificate {
        half_width: l,
        rho,
        kappa,
        n_checked,
        margin,
        tail_note,
        valid: failing_mode.is_none() && margin > 0.0 && tail.holds(),
        failing_mode,
        tail,
    })
}

#[derive(Debug, Clone)]
pub struct KappaSearch {
    /// Smallest grid entry with a valid certificate, `None` if none on grid.
    pub kappa0: Option<f64>,
    /// Certificates in grid order up to and including the first valid one.
    pub certificates: Vec<Certificate>,
}

/// Scans an ascending `κ` grid for the first valid certificate.
pub fn kappa0_search(annulus: &Annulus, grid: &[f64], n_max: usize) -> Result<KappaSearch> {
    if grid.is_empty() {
        return Err(invalid("kappa grid is empty"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid("kappa grid must be strictly increasing"));
    }
    for &k in grid {
        check_kappa(k)?;
    }
    let mut certificates = Vec::new();
    for &kappa in grid {
        let cert = certify_nonexistence(annulus, kappa, n_max)?;
        let valid = cert.valid;
        certificates.push(cert);
        if valid {
            return Ok(KappaSearch {
                kappa0: Some(kappa),
                certificates,
            });
        }
    }
    Ok(KappaSearch {
        kappa0: None,
        certificates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::constrained_min;

    fn annulus() -> Annulus {
        Annulus::from_half_width(2.0)
            .unwrap()
            .with_rho(1.0)
            .unwrap()
    }

    #[test]
    fn large_kappa_is_certified() {
        let c = certify_nonexistence(&annulus(), 100.0, 200).unwrap();
        assert!(c.valid && c.margin > 0.0 && c.tail.holds());
        assert_eq!(c.n_checked, 200);
        let json = serde_json::to_value(&c).unwrap();
        let mut keys: Vec<_> = json.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(
            keys,
            [
                "L",
                "kappa",
                "margin",
                "n_checked",
                "rho",
                "tail_note",
                "valid"
            ]
        );
    }

    #[test]
    fn envelopes_survive_overflowing_kappa() {
        let c = certify_nonexistence(&annulus(), 1e300, 10).unwrap();
        assert!(c.valid && c.margin.is_finite());
        assert!(c.tail.beta_envelope.is_finite() && c.tail.alpha_envelope.is_finite());
        let t = tail_bound(1.0, 1e3, 11).unwrap();
        let m2: f64 = 121.0;
        let (c1, s1) = ((1.0 + 1e6 / m2).sqrt(), (m2 + 1e6).sqrt());
        let literal = (1e6 / (c1 + 1.0) - 2.0 * s1 * s1 * (-2.0 * s1).exp()) / (c1 + 1.0);
        assert!((t.beta_envelope / literal - 1.0).abs() < 1e-13);
    }

    #[test]
    fn near_one_kappa_fails_at_first_mode() {
        let c = certify_nonexistence(&annulus(), 1.01, 50).unwrap();
        assert!(!c.valid);
        assert_eq!(c.failing_mode, Some(1));
        assert!(c.margin < 0.0);
    }

    #[test]
    fn envelopes_bound_the_tail() {
        for kappa in [1.5, 3.0, 100.0] {
            for rho in [0.5, 1.0] {
                let m = (2.0 / rho) as usize + 3;
                let t = tail_bound(rho, kappa, m).unwrap();
                let base = ModeParams::new(1, kappa, 2.0, rho).unwrap();
                for n in (m..m + 400).chain([10 * m, 1000 * m]) {
                    let c = mode_coefficients(&base.with_n(n)).unwrap();
                    let n2 = (n * n) as f64;
                    assert!(
                        n2 * c.alpha <= t.alpha_envelope * (1.0 + 1e-12),
                        "kappa={kappa} n={n}"
                    );
                    assert!(
                        n2 * c.beta >= t.beta_envelope * (1.0 - 1e-12),
                        "kappa={kappa} n={n}"
                    );
                }
            }
        }
        assert!(tail_bound(1.0, 2.0, 0).is_err());
    }

    #[test]
    fn valid_certificate_implies_bound_above_two_pi() {
        for kappa in [5.0, 20.0, 100.0] {
            let c = certify_nonexistence(&annulus(), kappa, 50).unwrap();
            if c.valid {
                assert!(constrained_min(&annulus(), kappa, 50).unwrap().excess > 0.0);
            }
        }
    }

    #[test]
    fn search_returns_first_valid_entry() {
        let s = kappa0_search(&annulus(), &[2.0, 5.0, 10.0, 50.0, 100.0], 200).unwrap();
        let k0 = s.kappa0.expect("some entry certifies");
        let (last, earlier) = s.certificates.split_last().unwrap();
        assert!(last.valid && last.kappa == k0);
        assert!(earlier.iter().all(|c| !c.valid));
        let none = kappa0_search(&annulus(), &[1.01, 1.02], 20).unwrap();
        assert_eq!(none.kappa0, None);
        assert_eq!(none.certificates.len(), 2);
    }

    #[test]
    fn validation() {
        let thin = Annulus::from_half_width(0.8).unwrap();
        assert!(certify_nonexistence(&thin, 10.0, 10).is_err());
        assert!(certify_nonexistence(&annulus(), 1.0, 10).is_err());
        assert!(kappa0_search(&annulus(), &[5.0, 2.0], 10).is_err());
        assert!(kappa0_search(&annulus(), &[0.5, 2.0], 10).is_err());
    }
}
