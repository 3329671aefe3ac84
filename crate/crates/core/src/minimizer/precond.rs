//! Fast Poisson preconditioner. The gradient is split, node by node, into
//! its components along `u/|u|` (modulus) and `iu/|u|` (phase); each part is
//! smoothed by the inverse of the discrete Dirichlet form plus a row-averaged
//! potential curvature, inverted by FFT in `φ` and a tridiagonal sweep in `r`
//! per angular mode.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::field::ComplexField;

pub(crate) struct Preconditioner {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `2 - 2cos(2πk/N_φ)`.
    symbol: Vec<f64>,
    kappa: f64,
}

impl Preconditioner {
    pub fn new(nphi: usize, kappa: f64) -> Self {
        let mut planner = FftPlanner::new();
        let symbol = (0..nphi)
            .map(|k| 2.0 - 2.0 * (2.0 * PI * k as f64 / nphi as f64).cos())
            .collect();
        Self {
            forward: planner.plan_fft_forward(nphi),
            inverse: planner.plan_fft_inverse(nphi),
            symbol,
            kappa,
        }
    }

    /// Inverts `L + diag(shift)` row-wise on `x` in place.
    fn solve(&self, u: &ComplexField, shift: &[f64], x: &mut [Complex64]) {
        let (nr, nphi) = (u.nr(), u.nphi());
        let (cr, cphi) = (u.hphi() / u.hr(), u.hr() / u.hphi());
        for row in x.chunks_mut(nphi) {
            self.forward.process(row);
        }
        let mut c = vec![0.0; nr];
        let mut d = vec![Complex64::new(0.0, 0.0); nr];
        for k in 0..nphi {
            let lam = self.symbol[k] * cphi;
            let diag = |i: usize| {
                let radial = if u.is_boundary_row(i) { cr } else { 2.0 * cr };
                radial + u.row_weight(i) * lam + shift[i]
            };
            let mut pivot = diag(0);
            c[0] = -cr / pivot;
            d[0] = x[k] / pivot;
            for i in 1..nr {
                pivot = diag(i) + cr * c[i - 1];
                c[i] = -cr / pivot;
                d[i] = (x[i * nphi + k] + d[i - 1] * cr) / pivot;
            }
            x[(nr - 1) * nphi + k] = d[nr - 1];
            for i in (0..nr - 1).rev() {
                d[i] = d[i] - d[i + 1] * c[i];
                x[i * nphi + k] = d[i];
            }
        }
        let scale = 1.0 / nphi as f64;
        for row in x.chunks_mut(nphi) {
            self.inverse.process(row);
            for z in row.iter_mut() {
                *z *= scale;
            }
        }
    }

    /// Approximately solves `H z = g` for the Hessian `H` of the energy at
    /// `u`. Boundary entries of `g` and of the result are tangent.
    ///
    /// Two symmetric positive definite approximations are mixed per row,
    /// `B = D^½ S⁻¹ D^½ + (I - D)^½ P⁻¹ (I - D)^½`: `S` splits modulus and
    /// phase in the local frame of `u` and is accurate where the potential
    /// dominates; `P` ignores the frame, which is safer near vortex cores
    /// where the frame degenerates. `D` is the potential's share of the
    /// row's stiffness.
    pub fn apply(&self, u: &ComplexField, g: &ComplexField) -> ComplexField {
        let (nr, nphi) = (u.nr(), u.nphi());
        let (hr, hphi) = (u.hr(), u.hphi());
        let k2 = self.kappa * self.kappa * hr * hphi;
        let stiffness = 2.0 * (hphi / hr + hr / hphi);
        let base = 1e-6 * stiffness;

        // Potential curvature along u/|u| is pot (3|u|² - 1), along iu/|u| it
        // is pot (|u|² - 1); both are clipped at zero and averaged per row.
        let mut modulus_shift = vec![base; nr];
        let mut phase_shift = vec![base; nr];
        for i in 1..nr - 1 {
            let pot = k2 * (2.0 * u.r(i)).exp() / nphi as f64;
            for z in u.row(i) {
                let m = z.norm_sqr();
                modulus_shift[i] += pot * (3.0 * m - 1.0).max(0.0);
                phase_shift[i] += pot * (m - 1.0).max(0.0);
            }
        }
        let plain_shift: Vec<f64> = modulus_shift.iter().map(|s| 0.5 * s).collect();
        let share: Vec<f64> = modulus_shift.iter().map(|s| s / (s + stiffness)).collect();

        let frame: Vec<Complex64> = u
            .values()
            .iter()
            .map(|z| {
                let m = z.norm();
                if m > 0.0 {
                    z / m
                } else {
                    Complex64::new(1.0, 0.0)
                }
            })
            .collect();
        let tangent = |k: usize, z: Complex64| {
            let t = Complex64::new(-frame[k].im, frame[k].re);
            t * (t.conj() * z).re
        };

        let n = nr * nphi;
        let mut modulus = Vec::with_capacity(n);
        let mut phase = Vec::with_capacity(n);
        let mut plain = Vec::with_capacity(n);
        for (k, z) in g.values().iter().enumerate() {
            let d = share[k / nphi];
            let local = frame[k].conj() * z * d.sqrt();
            modulus.push(Complex64::new(local.re, 0.0));
            phase.push(Complex64::new(local.im, 0.0));
            plain.push(z * (1.0 - d).sqrt());
        }
        self.solve(u, &modulus_shift, &mut modulus);
        self.solve(u, &phase_shift, &mut phase);
        self.solve(u, &plain_shift, &mut plain);

        let mut out = g.clone();
        for (k, z) in out.values_mut().iter_mut().enumerate() {
            let i = k / nphi;
            let d = share[i];
            let split = frame[k] * Complex64::new(modulus[k].re, phase[k].re) * d.sqrt();
            let mixed = split + plain[k] * (1.0 - d).sqrt();
            *z = if u.is_boundary_row(i) {
                tangent(k, mixed)
            } else {
                mixed
            };
        }
        out
    }
}
