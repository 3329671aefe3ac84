//! Degrees, boundary Fourier traces, and plaquette vortex detection.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use super::{ComplexField, Side};
use crate::error::{invalid, Error, Result};

/// Samples with modulus below this have no usable phase.
pub const WINDING_MODULUS_FLOOR: f64 = 1e-12;

/// Adjacent phase jumps at or above this are flagged as under-resolved.
const RESOLVED_JUMP: f64 = 0.5 * PI;

/// Phase bookkeeping for a closed loop of samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopWinding {
    pub degree: i64,
    /// Accumulated principal-branch phase divided by 2π, before rounding.
    pub turns: f64,
    /// Largest adjacent principal-branch jump in absolute value.
    pub max_jump: f64,
    /// `max_jump < π/2`: the loop resolves the phase.
    pub resolved: bool,
}

fn principal_jump(from: Complex64, to: Complex64) -> f64 {
    (to * from.conj()).arg()
}

/// Winding of the closed loop `samples[0] → samples[1] → … → samples[0]`.
pub fn loop_winding(samples: &[Complex64], floor: f64) -> Result<LoopWinding> {
    if samples.is_empty() {
        return Err(invalid("winding of an empty loop"));
    }
    if let Some((index, z)) = samples.iter().enumerate().find(|(_, z)| z.norm() < floor) {
        return Err(Error::WindingUndefined {
            index,
            modulus: z.norm(),
            threshold: floor,
        });
    }
    let n = samples.len();
    let mut total = 0.0;
    let mut max_jump: f64 = 0.0;
    for k in 0..n {
        let d = principal_jump(samples[k], samples[(k + 1) % n]);
        total += d;
        max_jump = max_jump.max(d.abs());
    }
    let turns = total / (2.0 * PI);
    Ok(LoopWinding {
        degree: turns.round() as i64,
        turns,
        max_jump,
        resolved: max_jump < RESOLVED_JUMP,
    })
}

/// Integer winding of a closed loop of nonzero samples.
pub fn winding_number(samples: &[Complex64]) -> Result<i64> {
    loop_winding(samples, WINDING_MODULUS_FLOOR).map(|w| w.degree)
}

/// Fourier coefficients of a boundary row in the convention
/// `u(φ) = a₀ + Σ_{n≥1} (aₙ cos nφ + bₙ sin nφ)` with complex `aₙ, bₙ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    a0: Complex64,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
}

impl BoundaryTrace {
    /// `a[k]`, `b[k]` hold mode `n = k + 1`.
    pub fn new(a0: Complex64, a: Vec<Complex64>, b: Vec<Complex64>) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return Err(invalid(
                "trace needs N >= 1 cosine and sine coefficients of equal length",
            ));
        }
        let finite = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
        if !finite(&a0) || !a.iter().all(finite) || !b.iter().all(finite) {
            return Err(invalid("trace coefficients must be finite"));
        }
        Ok(Self { a0, a, b })
    }

    /// Truncation order `N`.
    pub fn order(&self) -> usize {
        self.a.len()
    }

    pub fn a0(&self) -> Complex64 {
        self.a0
    }

    /// Cosine coefficient of mode `n ≥ 1`.
    pub fn a(&self, n: usize) -> Complex64 {
        self.a[n - 1]
    }

    /// Sine coefficient of mode `n ≥ 1`.
    pub fn b(&self, n: usize) -> Complex64 {
        self.b[n - 1]
    }

    pub fn eval(&self, phi: f64) -> Complex64 {
        let mut acc = self.a0;
        for (k, (a, b)) in self.a.iter().zip(&self.b).enumerate() {
            let n = (k + 1) as f64;
            acc += a * (n * phi).cos() + b * (n * phi).sin();
        }
        acc
    }

    /// Samples the truncated series at `φ_j = 2πj/nphi`.
    pub fn synthesize(&self, nphi: usize) -> Vec<Complex64> {
        (0..nphi)
            .map(|j| self.eval(2.0 * PI * j as f64 / nphi as f64))
            .collect()
    }

    /// `Σ n (|aₙ|² + |bₙ|²)`.
    pub fn tail_energy(&self) -> f64 {
        self.a
            .iter()
            .zip(&self.b)
            .enumerate()
            .map(|(k, (a, b))| (k + 1) as f64 * (a.norm_sqr() + b.norm_sqr()))
            .sum()
    }
}

/// `Σ n (Re aₙ Im bₙ - Re bₙ Im aₙ)`; the degree of a unimodular trace.
pub fn degree_from_coefficients(trace: &BoundaryTrace) -> f64 {
    trace
        .a
        .iter()
        .zip(&trace.b)
        .enumerate()
        .map(|(k, (a, b))| (k + 1) as f64 * (a.re * b.im - b.re * a.im))
        .sum()
}

/// Discrete Fourier analysis of a boundary row up to order `n_max`.
pub fn fourier_trace(u: &ComplexField, side: Side, n_max: usize) -> Result<BoundaryTrace> {
    let nphi = u.nphi();
    if n_max < 1 || 2 * n_max >= nphi {
        return Err(invalid(format!(
            "truncation order must satisfy 1 <= N < nphi/2 (N = {n_max}, nphi = {nphi})"
        )));
    }
    let mut buf = u.boundary_row(side).to_vec();
    FftPlanner::new().plan_fft_forward(nphi).process(&mut buf);
    let scale = 1.0 / nphi as f64;
    // c_k = (1/nphi) Σ u_j e^{-ikφ_j}; aₙ = c_n + c_{-n}, bₙ = i (c_n - c_{-n})
    let c = |k: usize| buf[k] * scale;
    let i = Complex64::new(0.0, 1.0);
    let a = (1..=n_max).map(|n| c(n) + c(nphi - n)).collect();
    let b = (1..=n_max).map(|n| i * (c(n) - c(nphi - n))).collect();
    BoundaryTrace::new(c(0), a, b)
}

/// A grid plaquette with nonzero phase winding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VortexRecord {
    /// Plaquette centre.
    pub r: f64,
    pub phi: f64,
    pub charge: i64,
    /// Lower-left corner indices.
    pub i: usize,
    pub j: usize,
    /// Smallest corner modulus.
    pub min_modulus: f64,
}

/// Scans every plaquette `(i, j) → (i+1, j) → (i+1, j+1) → (i, j+1)` for
/// phase winding. Records whose plaquette has a corner below `threshold`
/// come first (ordered by corner modulus), the rest follow in grid order.
pub fn vortex_detect(u: &ComplexField, threshold: f64) -> Vec<VortexRecord> {
    let (nr, nphi) = (u.nr(), u.nphi());
    let (hr, hphi) = (u.hr(), u.hphi());
    let mut found = Vec::new();
    for i in 0..nr - 1 {
        for j in 0..nphi {
            let corners = [
                u.at(i, j),
                u.at(i + 1, j),
                u.at(i + 1, j + 1),
                u.at(i, j + 1),
            ];
            let min_modulus = corners
                .iter()
                .map(|z| z.norm())
                .fold(f64::INFINITY, f64::min);
            if min_modulus == 0.0 {
                continue;
            }
            let total: f64 = (0..4)
                .map(|k| principal_jump(corners[k], corners[(k + 1) % 4]))
                .sum();
            let charge = (total / (2.0 * PI)).round() as i64;
            if charge != 0 {
                found.push(VortexRecord {
                    r: u.r(i) + 0.5 * hr,
                    phi: (j as f64 + 0.5) * hphi,
                    charge,
                    i,
                    j,
                    min_modulus,
                });
            }
        }
    }
    let (mut cores, rest): (Vec<_>, Vec<_>) =
        found.into_iter().partition(|v| v.min_modulus < threshold);
    cores.sort_by(|a, b| a.min_modulus.total_cmp(&b.min_modulus));
    cores.extend(rest);
    cores
}
