//! The quadratic functional `F_κ`, its minimizer for a prescribed trace, and
//! the minimum of the mode decomposition under the degree constraint.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{check_kappa, mode_coefficients, mode_profile, p0_slope, ModeKind, ModeParams};
use crate::error::{invalid, Result};
use crate::field::{BoundaryTrace, ComplexField};
use crate::geometry::Annulus;

/// Composite Simpson over `f[start..=end]`; `end - start` must be even.
fn simpson(f: &[f64], start: usize, end: usize, h: f64) -> f64 {
    let mut acc = f[start] + f[end];
    for k in start + 1..end {
        acc += if (k - start) % 2 == 1 { 4.0 } else { 2.0 } * f[k];
    }
    acc * h / 3.0
}

/// Fourth-order first derivative of `f` at `k`, using only nodes inside
/// `[start, end]` (at least five of them).
fn derivative4(f: &[Complex64], k: usize, start: usize, end: usize, h: f64) -> Complex64 {
    let scale = 1.0 / (12.0 * h);
    if k >= start + 2 && k + 2 <= end {
        return (f[k - 2] - f[k - 1] * 8.0 + f[k + 1] * 8.0 - f[k + 2]) * scale;
    }
    // one-sided stencils, mirrored at the right end
    let (base, sign, offset) = if k < start + 2 {
        (start, 1.0, k - start)
    } else {
        (end, -1.0, end - k)
    };
    let at = |m: usize| {
        if sign > 0.0 {
            f[base + m]
        } else {
            f[base - m]
        }
    };
    let weights: [f64; 5] = if offset == 0 {
        [-25.0, 48.0, -36.0, 16.0, -3.0]
    } else {
        [-3.0, -10.0, 18.0, -6.0, 1.0]
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for (m, w) in weights.iter().enumerate() {
        acc += at(m) * *w;
    }
    acc * (sign * scale)
}

/// Node indices of `-ρ` and `ρ` if both fall on the grid and split `[-L, L]`
/// into three segments with even interval counts of at least four.
fn interface_nodes(nr: usize, half_width: f64, rho: f64) -> Option<(usize, usize)> {
    let intervals = (nr - 1) as f64;
    let locate = |x: f64| {
        let k = (x + half_width) / (2.0 * half_width) * intervals;
        let kr = k.round();
        ((k - kr).abs() < 1e-8).then_some(kr as usize)
    };
    let (lo, hi) = (locate(-rho)?, locate(rho)?);
    let ok = |a: usize, b: usize| b >= a + 4 && (b - a) % 2 == 0;
    (ok(0, lo) && ok(lo, hi) && ok(hi, nr - 1)).then_some((lo, hi))
}

/// Smallest radial node count `nr ≥ min_nodes` for which `f_eval` accepts
/// the grid at `(L, ρ)`. Fails when `(L - ρ)/ρ` is not a ratio of small
/// integers.
pub fn aligned_radial_nodes(half_width: f64, rho: f64, min_nodes: usize) -> Result<usize> {
    let ratio = (half_width - rho) / (2.0 * rho);
    for b in 2..=4096usize {
        let a = (b as f64 * ratio).round();
        if a >= 2.0 && (a - b as f64 * ratio).abs() < 1e-9 * b as f64 {
            let base = 4 * a as usize + 2 * b;
            let k = min_nodes.saturating_sub(1).div_ceil(base).max(1);
            let nr = k * base + 1;
            debug_assert!(interface_nodes(nr, half_width, rho).is_some());
            return Ok(nr);
        }
    }
    Err(invalid(format!(
        "no radial grid places both ±rho on nodes for L = {half_width}, rho = {rho}"
    )))
}

/// Quadrature of
///
/// ```text
/// F_κ[w] = ½∫∫|∇w|² + ∫_{-ρ}^{ρ}∫ (κ²/2 (Re w - 1)² - κ⁻²/2 (Im w)²)
/// ```
///
/// The `φ` direction is spectral (derivatives by FFT, periodic trapezoid
/// rule). In `r`, fourth-order differences and composite Simpson are applied
/// on each of `[-L, -ρ]`, `[-ρ, ρ]`, `[ρ, L]` separately, so `±ρ` must be grid
/// nodes; see [`aligned_radial_nodes`].
pub fn f_eval(w: &ComplexField, kappa: f64, rho: f64) -> Result<f64> {
    let (nr, nphi) = (w.nr(), w.nphi());
    let l = w.annulus().half_width();
    if !(rho > 0.0 && rho < l) {
        return Err(invalid(format!("rho must satisfy 0 < rho < L = {l}")));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(invalid("kappa must be positive"));
    }
    let (lo, hi) = interface_nodes(nr, l, rho).ok_or_else(|| {
        invalid("radial grid must place ±rho on nodes with even, >= 4 intervals per segment")
    })?;
    let (hr, hphi) = (w.hr(), w.hphi());
    let segments = [(0, lo), (lo, hi), (hi, nr - 1)];

    // ∫|∂_φ w|² dφ per row by Parseval
    let fft = FftPlanner::new().plan_fft_forward(nphi);
    let mut angular = vec![0.0; nr];
    for (i, slot) in angular.iter_mut().enumerate() {
        let mut buf = w.row(i).to_vec();
        fft.process(&mut buf);
        let mut acc = 0.0;
        for (k, c) in buf.iter().enumerate() {
            let m = k.min(nphi - k) as f64;
            acc += m * m * c.norm_sqr();
        }
        *slot = 2.0 * PI * acc / (nphi * nphi) as f64;
    }

    // ∫|∂_r w|² dφ per row, derivatives taken within each segment
    let mut column = vec![Complex64::new(0.0, 0.0); nr];
    let mut radial = [vec![0.0; nr], vec![0.0; nr], vec![0.0; nr]];
    for j in 0..nphi {
        for (i, slot) in column.iter_mut().enumerate() {
            *slot = w.at(i, j);
        }
        for (s, &(a, b)) in segments.iter().enumerate() {
            for k in a..=b {
                radial[s][k] += derivative4(&column, k, a, b, hr).norm_sqr() * hphi;
            }
        }
    }

    let k2 = kappa * kappa;
    let potential: Vec<f64> = (0..nr)
        .map(|i| {
            w.row(i)
                .iter()
                .map(|z| 0.5 * k2 * (z.re - 1.0).powi(2) - 0.5 / k2 * z.im * z.im)
                .sum::<f64>()
                * hphi
        })
        .collect();

    let mut total = simpson(&potential, lo, hi, hr);
    for (s, &(a, b)) in segments.iter().enumerate() {
        total += 0.5 * (simpson(&angular, a, b, hr) + simpson(&radial[s], a, b, hr));
    }
    Ok(total)
}

/// Contribution of one mode `n ≥ 1` to `F_κ[w]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeContribution {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    /// `π n Pₙ (|Re aₙ|² + |Re bₙ|²)`.
    pub real_part: f64,
    /// `π n Qₙ (|Im aₙ|² + |Im bₙ|²)`.
    pub imag_part: f64,
}

#[derive(Debug, Clone)]
pub struct LinearSolution {
    pub field: ComplexField,
    /// `2π (a₀ - 1)² w₀'(L) ≥ 0`.
    pub p0_term: f64,
    pub modes: Vec<ModeContribution>,
}

impl LinearSolution {
    /// `P₀ term + π Σ n (Pₙ(...) + Qₙ(...))`.
    pub fn decomposition(&self) -> f64 {
        self.p0_term
            + self
                .modes
                .iter()
                .map(|m| m.real_part + m.imag_part)
                .sum::<f64>()
    }
}

/// Minimizer of `F_κ` with boundary values `trace` on both `r = ±L`,
/// synthesized from the mode profiles on an `nr × nphi` grid, together with
/// the closed-form value of `F_κ` split by mode.
pub fn linear_solve(
    trace: &BoundaryTrace,
    annulus: &Annulus,
    kappa: f64,
    nr: usize,
    nphi: usize,
) -> Result<LinearSolution> {
    check_kappa(kappa)?;
    let a0 = trace.a0();
    if a0.im.abs() > 1e-12 * a0.norm().max(1.0) {
        return Err(invalid("trace average a0 must be real"));
    }
    let base = ModeParams::from_annulus(annulus, kappa, 0)?;
    let order = trace.order();

    let w0 = mode_profile(&base, ModeKind::Real)?;
    let mut real_profiles = Vec::with_capacity(order);
    let mut imag_profiles = Vec::with_capacity(order);
    let mut modes = Vec::with_capacity(order);
    for n in 1..=order {
        let p = base.with_n(n);
        let c = mode_coefficients(&p)?;
        real_profiles.push(mode_profile(&p, ModeKind::Real)?);
        imag_profiles.push(mode_profile(&p, ModeKind::Imag)?);
        let (a, b) = (trace.a(n), trace.b(n));
        let nf = n as f64;
        modes.push(ModeContribution {
            n,
            p: c.p,
            q: c.q,
            real_part: PI * nf * c.p * (a.re * a.re + b.re * b.re),
            imag_part: PI * nf * c.q * (a.im * a.im + b.im * b.im),
        });
    }

    let l = annulus.half_width();
    let hr = 2.0 * l / (nr.max(2) - 1) as f64;
    let hphi = 2.0 * PI / nphi.max(1) as f64;
    let trig: Vec<(f64, f64)> = (0..nphi)
        .flat_map(|j| (1..=order).map(move |n| (n as f64 * j as f64 * hphi).sin_cos()))
        .collect();
    let mut values = Vec::with_capacity(nr * nphi);
    for i in 0..nr {
        // exact endpoints so the trace is reproduced to rounding
        let r = if i + 1 == nr { l } else { -l + i as f64 * hr };
        let radial: Vec<(f64, f64)> = real_profiles
            .iter()
            .zip(&imag_profiles)
            .map(|(p1, p2)| (p1.value(r), p2.value(r)))
            .collect();
        let mean = 1.0 + (a0.re - 1.0) * w0.value(r);
        for j in 0..nphi {
            let mut z = Complex64::new(mean, 0.0);
            for (k, &(w1, w2)) in radial.iter().enumerate() {
                let (sin, cos) = trig[j * order + k];
                let (a, b) = (trace.a(k + 1), trace.b(k + 1));
                z.re += w1 * (a.re * cos + b.re * sin);
                z.im += w2 * (a.im * cos + b.im * sin);
            }
            values.push(z);
        }
    }
    let field = ComplexField::from_values(*annulus, nr, nphi, values)?;
    let p0_term = 2.0 * PI * (a0.re - 1.0).powi(2) * p0_slope(&base);
    Ok(LinearSolution {
        field,
        p0_term,
        modes,
    })
}

/// Minimum of the decomposed quadratic form over traces with
/// `Σ n (Re aₙ Im bₙ - Re bₙ Im aₙ) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstrainedMin {
    /// `2π min_n √(PₙQₙ)`.
    pub value: f64,
    /// `value - 2π`, computed from `PₙQₙ - 1` directly so that it stays
    /// resolved when `value` rounds to `2π`.
    pub excess: f64,
    /// Minimizing mode.
    pub mode: usize,
}

fn min_over_modes(n_max: usize, excess: impl Fn(usize) -> Result<f64>) -> Result<ConstrainedMin> {
    if n_max < 1 {
        return Err(invalid("truncation N must be at least 1"));
    }
    let mut best: Option<(usize, f64)> = None;
    for n in 1..=n_max {
        let x = excess(n)?;
        if x <= -1.0 || !x.is_finite() {
            return Err(invalid(format!("mode {n}: PQ must be positive and finite")));
        }
        if best.is_none_or(|(_, b)| x < b) {
            best = Some((n, x));
        }
    }
    let (mode, x) = best.expect("n_max >= 1");
    let root = (1.0 + x).sqrt();
    Ok(ConstrainedMin {
        value: 2.0 * PI * root,
        excess: 2.0 * PI * x / (root + 1.0),
        mode,
    })
}

/// `2π min_{n ≤ N} √(PₙQₙ)` for arbitrary per-mode `(Pₙ, Qₙ)`.
///
/// With the `n = 0` term at its minimum zero, each mode contributes
/// `π n (P|x|² + Q|y|²) ≥ 2π √(PQ) · n|x₁y₂ - x₂y₁|`, with equality for a
/// suitable single-mode trace, so the constrained minimum concentrates on the
/// mode with the smallest `PQ`.
pub fn constrained_min_with(
    n_max: usize,
    coefficients: impl Fn(usize) -> (f64, f64),
) -> Result<ConstrainedMin> {
    min_over_modes(n_max, |n| {
        let (p, q) = coefficients(n);
        if !(p > 0.0 && q > 0.0) {
            return Err(invalid(format!("mode {n}: P and Q must be positive")));
        }
        Ok(p.mul_add(q, -1.0))
    })
}

/// [`constrained_min_with`] for the closed-form coefficients at `(L, ρ, κ)`.
pub fn constrained_min(annulus: &Annulus, kappa: f64, n_max: usize) -> Result<ConstrainedMin> {
    let base = ModeParams::from_annulus(annulus, kappa, 1)?;
    min_over_modes(n_max, |n| {
        Ok(mode_coefficients(&base.with_n(n))?.pq_excess())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::mode_profile;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn annulus() -> Annulus {
        Annulus::from_half_width(2.0)
            .unwrap()
            .with_rho(1.0)
            .unwrap()
    }

    fn field(nr: usize, nphi: usize, f: impl Fn(f64, f64) -> Complex64) -> ComplexField {
        ComplexField::from_fn(annulus(), nr, nphi, f).unwrap()
    }

    #[test]
    fn alignment() {
        assert_eq!(aligned_radial_nodes(2.0, 1.0, 2).unwrap(), 17);
        assert_eq!(aligned_radial_nodes(2.0, 1.0, 1000).unwrap(), 1009);
        let nr = aligned_radial_nodes(3.0, 0.5, 100).unwrap();
        assert!(interface_nodes(nr, 3.0, 0.5).is_some() && nr >= 100);
        assert!(interface_nodes(17, 2.0, 1.0).is_some());
        assert!(interface_nodes(13, 2.0, 1.0).is_none());
        assert!(aligned_radial_nodes(2.0, 2f64.sqrt() - 0.1, 10).is_err());
        let w = field(13, 16, |_, _| Complex64::new(1.0, 0.0));
        assert!(f_eval(&w, 2.0, 1.0).is_err());
    }

    #[test]
    fn constants() {
        let one = field(17, 16, |_, _| Complex64::new(1.0, 0.0));
        assert_eq!(f_eval(&one, 5.0, 1.0).unwrap(), 0.0);
        let c = 0.3;
        let shifted = field(17, 16, |_, _| Complex64::new(1.0 + c, 0.0));
        let expected = 2.0 * PI * 1.0 * 25.0 * c * c;
        assert!((f_eval(&shifted, 5.0, 1.0).unwrap() / expected - 1.0).abs() < 1e-14);
        let imag = field(17, 16, |_, _| Complex64::new(1.0, c));
        let expected = -2.0 * PI * c * c / 25.0;
        assert!((f_eval(&imag, 5.0, 1.0).unwrap() / expected - 1.0).abs() < 1e-14);
    }

    #[test]
    fn quadrature_of_a_smooth_field() {
        // w = 1 + r² cos φ + i r sin 2φ: ½∫|∇w|² = ½·2π·(∫4r²·½ + ∫r⁴·½ + ∫1·½ + ∫4r²·½)
        let w = field(81, 16, |r, p| {
            Complex64::new(1.0 + r * r * p.cos(), r * (2.0 * p).sin())
        });
        let l: f64 = 2.0;
        let dirichlet = 0.5
            * PI
            * (4.0 * 2.0 * l.powi(3) / 3.0
                + 2.0 * l.powi(5) / 5.0
                + 2.0 * l
                + 4.0 * 2.0 * l.powi(3) / 3.0);
        let kappa: f64 = 3.0;
        let potential = PI * (0.5 * kappa * kappa * 2.0 / 5.0 - 0.5 / (kappa * kappa) * 2.0 / 3.0);
        let f = f_eval(&w, kappa, 1.0).unwrap();
        assert!((f / (dirichlet + potential) - 1.0).abs() < 1e-6, "{f}");
    }

    #[test]
    fn single_real_mode() {
        let kappa = 4.0;
        let p = ModeParams::new(1, kappa, 2.0, 1.0).unwrap();
        let prof = mode_profile(&p, ModeKind::Real).unwrap();
        let big_p = mode_coefficients(&p).unwrap().p;
        let eps = 0.2;
        let nr = aligned_radial_nodes(2.0, 1.0, 1025).unwrap();
        let w = field(nr, 16, |r, phi| {
            Complex64::new(1.0 + eps * prof.value(r) * phi.cos(), 0.0)
        });
        let f = f_eval(&w, kappa, 1.0).unwrap();
        assert!((f / (PI * big_p * eps * eps) - 1.0).abs() < 1e-8, "{f}");
    }

    #[test]
    fn cosine_trace() {
        // a₀ = 0, a₁ = 1: the mean mode contributes alongside π P₁
        let kappa = 3.0;
        let trace = BoundaryTrace::new(
            Complex64::new(0.0, 0.0),
            vec![Complex64::new(1.0, 0.0)],
            vec![Complex64::new(0.0, 0.0)],
        )
        .unwrap();
        let nr = aligned_radial_nodes(2.0, 1.0, 1025).unwrap();
        let sol = linear_solve(&trace, &annulus(), kappa, nr, 16).unwrap();
        let base = ModeParams::new(1, kappa, 2.0, 1.0).unwrap();
        let expected = 2.0 * PI * p0_slope(&base) + PI * mode_coefficients(&base).unwrap().p;
        assert!((sol.decomposition() / expected - 1.0).abs() < 1e-14);
        let f = f_eval(&sol.field, kappa, 1.0).unwrap();
        assert!((f / expected - 1.0).abs() < 1e-8);
        for j in 0..16 {
            let phi = sol.field.phi(j);
            assert!((sol.field.at(nr - 1, j) - trace.eval(phi)).norm() < 1e-14);
            assert!((sol.field.at(0, j) - trace.eval(phi)).norm() < 1e-14);
        }
    }

    #[test]
    fn unit_trace_gives_unit_field() {
        let trace = BoundaryTrace::new(
            Complex64::new(1.0, 0.0),
            vec![Complex64::new(0.0, 0.0); 3],
            vec![Complex64::new(0.0, 0.0); 3],
        )
        .unwrap();
        let sol = linear_solve(&trace, &annulus(), 2.0, 17, 16).unwrap();
        assert!(sol
            .field
            .values()
            .iter()
            .all(|z| *z == Complex64::new(1.0, 0.0)));
        assert_eq!(sol.decomposition(), 0.0);
    }

    #[test]
    fn rejects_complex_mean() {
        let trace = BoundaryTrace::new(
            Complex64::new(1.0, 0.1),
            vec![Complex64::new(0.0, 0.0)],
            vec![Complex64::new(0.0, 0.0)],
        )
        .unwrap();
        assert!(linear_solve(&trace, &annulus(), 2.0, 17, 16).is_err());
    }

    fn random_trace(rng: &mut ChaCha8Rng, order: usize) -> BoundaryTrace {
        let mut c = |n: usize| {
            let s = (n as f64).powf(-1.5);
            Complex64::new(
                rng.random_range(-1.0..1.0) * s,
                rng.random_range(-1.0..1.0) * s,
            )
        };
        let a = (1..=order).map(&mut c).collect();
        let b = (1..=order).map(&mut c).collect();
        let a0 = Complex64::new(rng.random_range(0.0..1.5), 0.0);
        BoundaryTrace::new(a0, a, b).unwrap()
    }

    #[test]
    fn decomposition_matches_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let nr = aligned_radial_nodes(2.0, 1.0, 1025).unwrap();
        for _ in 0..3 {
            let trace = random_trace(&mut rng, 6);
            let sol = linear_solve(&trace, &annulus(), 5.0, nr, 32).unwrap();
            let f = f_eval(&sol.field, 5.0, 1.0).unwrap();
            let d = sol.decomposition();
            assert!(sol.p0_term >= 0.0);
            assert!((f / d - 1.0).abs() < 1e-7, "{f} vs {d}");
        }
    }

    #[test]
    fn solution_beats_perturbed_competitors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let trace = random_trace(&mut rng, 4);
        let nr = aligned_radial_nodes(2.0, 1.0, 257).unwrap();
        let sol = linear_solve(&trace, &annulus(), 5.0, nr, 32).unwrap();
        let f = f_eval(&sol.field, 5.0, 1.0).unwrap();
        for k in 1..4 {
            let bump = Complex64::new(0.05, -0.03 * k as f64);
            let mut v = sol.field.clone();
            for i in 0..nr {
                let r = v.r(i);
                for j in 0..32 {
                    let z = v.at(i, j) + bump * (4.0 - r * r) * (k as f64 * v.phi(j)).cos();
                    v.set(i, j, z);
                }
            }
            assert!(f_eval(&v, 5.0, 1.0).unwrap() > f);
        }
    }

    #[test]
    fn am_gm_stub_is_exactly_two_pi() {
        let m = constrained_min_with(10, |_| (1.0, 1.0)).unwrap();
        assert_eq!(m.value, 2.0 * PI);
        assert_eq!(m.excess, 0.0);
        let m = constrained_min_with(3, |n| (2.0, 1.0 / n as f64)).unwrap();
        assert_eq!(m.mode, 3);
        assert!((m.value - 2.0 * PI * (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(constrained_min_with(0, |_| (1.0, 1.0)).is_err());
    }

    #[test]
    fn large_kappa_minimum_exceeds_two_pi() {
        let m = constrained_min(&annulus(), 100.0, 200).unwrap();
        assert!(m.excess > 0.0);
        let m = constrained_min(&annulus(), 100.0, 8).unwrap();
        assert!(m.value > 2.0 * PI && m.excess > 0.0);
        assert!((m.value - 2.0 * PI - m.excess).abs() < 1e-12);
    }
}
