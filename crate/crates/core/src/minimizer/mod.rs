//! Minimization of the discrete energy over fields whose boundary rows are
//! unimodular with winding one, and κ-continuation scans.
//!
//! Interior samples move freely; boundary samples only rotate, so `|u| = 1`
//! and the boundary degree hold exactly along every iterate.

mod init;
mod precond;
mod scan;

pub use init::{initial_field, InitKind, VORTEX_PAIR_OFFSET};
pub use scan::{kappa_scan, write_scan_csv, ScanConfig, ScanRow};

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::field::{
    energy, energy_change, energy_gradient, gl_residual, residual_from_raw, vortex_detect,
    winding_number, ComplexField, GlResidual, Side, VortexRecord,
};
use crate::geometry::Annulus;
use precond::Preconditioner;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StepRule {
    /// Constant trial step, halved (for good) whenever it fails to descend.
    Fixed(f64),
    /// Armijo backtracking from the previous accepted step.
    Backtracking,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimizeConfig {
    pub max_iters: usize,
    /// Stop once the combined [`GlResidual`] drops to this value.
    pub grad_tol: f64,
    pub step_rule: StepRule,
    /// Conjugate directions are reset to steepest descent this often.
    pub restart_period: usize,
    /// Seeds the perturbations applied when the line search stalls.
    pub seed: u64,
    /// Amplitude of those perturbations.
    pub perturbation: f64,
    /// Give up after this many stalls.
    pub max_perturbations: usize,
    /// Modulus below which a winding plaquette counts as a resolved core.
    pub vortex_threshold: f64,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            grad_tol: 1e-6,
            step_rule: StepRule::Backtracking,
            restart_period: 50,
            seed: 0,
            perturbation: 1e-3,
            max_perturbations: 3,
            vortex_threshold: 0.5,
        }
    }
}

impl MinimizeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(invalid("max_iters must be at least 1"));
        }
        if !(self.grad_tol > 0.0) {
            return Err(invalid("grad_tol must be positive"));
        }
        if self.restart_period < 1 {
            return Err(invalid("restart period must be at least 1"));
        }
        if let StepRule::Fixed(t) = self.step_rule {
            if !(t > 0.0 && t.is_finite()) {
                return Err(invalid("fixed step must be positive"));
            }
        }
        if !(self.perturbation >= 0.0) {
            return Err(invalid("perturbation amplitude must be nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MinimizeResult {
    pub field: ComplexField,
    pub energy: f64,
    /// Combined residual of `field`.
    pub grad_norm: f64,
    pub residual: GlResidual,
    pub iterations: usize,
    pub vortices: Vec<VortexRecord>,
    pub min_modulus: f64,
    pub converged: bool,
    /// Random restarts used after stalls.
    pub perturbations: usize,
}

/// What the observer sees after every accepted step.
pub struct IterationState<'a> {
    pub iteration: usize,
    /// Random restarts so far; energy may rise only when this changes.
    pub perturbations: usize,
    pub energy: f64,
    pub field: &'a ComplexField,
}

/// A boundary link whose phase jump is this close to `π` is saturated.
const SATURATION: f64 = 1e-3;

/// Directions that would push a saturated boundary link past `π`, where the
/// lattice winding would drop, are modified so the two ends of that link
/// rotate together. This is how a vortex pressed against the boundary
/// shows up on the grid; without it the line search stalls on the winding
/// check.
fn hold_saturated_links(u: &ComplexField, d: &mut ComplexField) {
    let nphi = u.nphi();
    for i in [0, u.nr() - 1] {
        let row = u.row(i).to_vec();
        let mut rate: Vec<f64> = (0..nphi)
            .map(|j| (row[j].conj() * d.at(i, j)).im / row[j].norm_sqr())
            .collect();
        let mut held = false;
        for j in 0..nphi {
            let k = (j + 1) % nphi;
            let jump = (row[k] * row[j].conj()).arg();
            if PI - jump.abs() < SATURATION && jump * (rate[k] - rate[j]) > 0.0 {
                let mean = 0.5 * (rate[j] + rate[k]);
                rate[j] = mean;
                rate[k] = mean;
                held = true;
            }
        }
        if held {
            for j in 0..nphi {
                d.set(i, j, row[j] * Complex64::new(0.0, rate[j]));
            }
        }
    }
}

fn windings(u: &ComplexField) -> Option<(i64, i64)> {
    let inner = winding_number(u.boundary_row(Side::Inner)).ok()?;
    let outer = winding_number(u.boundary_row(Side::Outer)).ok()?;
    Some((inner, outer))
}

fn combine(a: &ComplexField, s: f64, b: &ComplexField, t: f64) -> ComplexField {
    let vals: Vec<Complex64> = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| x * s + y * t)
        .collect();
    let mut out = a.clone();
    out.values_mut().copy_from_slice(&vals);
    out
}

fn check_init(annulus: &Annulus, init: &ComplexField) -> Result<ComplexField> {
    if (annulus.half_width() - init.annulus().half_width()).abs() > 1e-12 * annulus.half_width() {
        return Err(invalid("initial field grid does not match the annulus"));
    }
    if init.boundary_modulus_defect() > 1e-8 {
        return Err(invalid("initial boundary rows must be unimodular"));
    }
    let mut u = init.clone().with_annulus(*annulus)?;
    for i in [0, u.nr() - 1] {
        for j in 0..u.nphi() {
            let z = u.at(i, j);
            u.set(i, j, z / z.norm());
        }
    }
    if windings(&u) != Some((1, 1)) {
        return Err(invalid("initial boundary rows must have winding 1"));
    }
    Ok(u)
}

/// Sufficient decrease along the retraction, `ΔE ≤ c t ⟨g, d⟩`.
const ARMIJO: f64 = 1e-4;

/// Trial at `t`, or `None` if the step changes a boundary winding.
fn trial(u: &ComplexField, d: &ComplexField, kappa: f64, t: f64) -> Option<(ComplexField, f64)> {
    let v = u.retract(d, t);
    if windings(&v) != Some((1, 1)) {
        return None;
    }
    let de = energy_change(u, &v, kappa);
    Some((v, de))
}

/// Backtracking search. With [`StepRule::Backtracking`] each trial is
/// refined once by the minimizer of the quadratic through `ΔE(0)`, the
/// slope, and `ΔE(t)`, which keeps the conjugate directions useful. On
/// success `t` holds the accepted step.
fn line_search(
    u: &ComplexField,
    d: &ComplexField,
    kappa: f64,
    slope: f64,
    t: &mut f64,
    rule: StepRule,
) -> Option<ComplexField> {
    if !(slope < 0.0) {
        return None;
    }
    let armijo = |t: f64, de: f64| de <= ARMIJO * t * slope;
    while *t > 1e-14 {
        let Some((v, de)) = trial(u, d, kappa, *t) else {
            *t *= 0.5;
            continue;
        };
        if rule != StepRule::Backtracking {
            if armijo(*t, de) {
                return Some(v);
            }
            *t *= 0.5;
            continue;
        }
        let curvature = (de - slope * *t) / (*t * *t);
        let tq = if curvature > 0.0 {
            (-slope / (2.0 * curvature)).clamp(0.1 * *t, 4.0 * *t)
        } else {
            4.0 * *t
        };
        if (tq / *t - 1.0).abs() > 0.1 {
            if let Some((vq, dq)) = trial(u, d, kappa, tq) {
                if armijo(tq, dq) && !(armijo(*t, de) && de <= dq) {
                    *t = tq;
                    return Some(vq);
                }
            }
        }
        if armijo(*t, de) {
            return Some(v);
        }
        *t = tq.min(0.5 * *t);
    }
    None
}

/// [`minimize_observed`] without an observer.
pub fn minimize(
    annulus: &Annulus,
    kappa: f64,
    init: &ComplexField,
    cfg: &MinimizeConfig,
) -> Result<MinimizeResult> {
    minimize_observed(annulus, kappa, init, cfg, |_| {})
}

/// Preconditioned Polak-Ribière+ conjugate gradients with backtracking along
/// the boundary-preserving retraction.
///
/// Trial points that change a boundary winding are rejected like any failed
/// descent step. When the search stalls the best iterate is perturbed by a
/// seeded random interior field and the descent restarts. An unconverged run
/// returns the lowest-energy iterate visited.
pub fn minimize_observed<F>(
    annulus: &Annulus,
    kappa: f64,
    init: &ComplexField,
    cfg: &MinimizeConfig,
    mut observer: F,
) -> Result<MinimizeResult>
where
    F: FnMut(&IterationState),
{
    cfg.validate()?;
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(invalid("kappa must be positive"));
    }
    let mut u = check_init(annulus, init)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut e = energy(&u, kappa);
    let mut g = energy_gradient(&u, kappa);
    let pc = Preconditioner::new(u.nphi(), kappa);
    let prec = |u: &ComplexField, g: &ComplexField| pc.apply(u, g);
    let mut z = prec(&u, &g);
    let mut d = z.scaled(Complex64::new(-1.0, 0.0));
    let mut gz = g.dot(&z);
    let mut step = match cfg.step_rule {
        StepRule::Fixed(t) => t,
        StepRule::Backtracking => 1.0,
    };
    let mut since_restart = 0;
    let mut perturbations = 0;
    let mut best = (u.clone(), e);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        if residual_from_raw(&u, g.values()).combined() <= cfg.grad_tol {
            converged = true;
            break;
        }
        hold_saturated_links(&u, &mut d);
        let mut slope = g.dot(&d);
        if !(slope < 0.0) {
            if !(gz > 0.0) {
                // the preconditioner lost definiteness; fall back to the gradient
                z = g.clone();
                gz = g.dot(&z);
            }
            d = z.scaled(Complex64::new(-1.0, 0.0));
            hold_saturated_links(&u, &mut d);
            slope = g.dot(&d);
            if !(slope < 0.0) {
                // holding links is a Euclidean projection, so the plain
                // gradient always survives it as a descent direction
                d = g.scaled(Complex64::new(-1.0, 0.0));
                hold_saturated_links(&u, &mut d);
                slope = g.dot(&d);
            }
            since_restart = 0;
        }

        let mut t = match cfg.step_rule {
            StepRule::Fixed(t0) => t0.min(step),
            StepRule::Backtracking => 1.0,
        };
        let accepted = line_search(&u, &d, kappa, slope, &mut t, cfg.step_rule);
        iterations += 1;

        let Some(v) = accepted else {
            if since_restart > 0 {
                // retry from steepest descent before declaring a stall
                d = z.scaled(Complex64::new(-1.0, 0.0));
                since_restart = 0;
                continue;
            }
            if perturbations >= cfg.max_perturbations || cfg.perturbation == 0.0 {
                break;
            }
            perturbations += 1;
            u = best.0.clone();
            let nphi = u.nphi();
            for i in 1..u.nr() - 1 {
                for j in 0..nphi {
                    let kick =
                        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                            * cfg.perturbation;
                    let w = u.at(i, j) + kick;
                    u.set(i, j, w);
                }
            }
            e = energy(&u, kappa);
            g = energy_gradient(&u, kappa);
            z = prec(&u, &g);
            gz = g.dot(&z);
            d = z.scaled(Complex64::new(-1.0, 0.0));
            step = 1.0;
            since_restart = 0;
            continue;
        };

        step = t;
        u = v;
        e = energy(&u, kappa);
        if e < best.1 {
            best = (u.clone(), e);
        }
        observer(&IterationState {
            iteration: iterations,
            perturbations,
            energy: e,
            field: &u,
        });

        let g_new = energy_gradient(&u, kappa);
        let z_new = prec(&u, &g_new);
        let gz_new = g_new.dot(&z_new);
        since_restart += 1;
        let beta = if since_restart >= cfg.restart_period {
            since_restart = 0;
            0.0
        } else {
            // Polak-Ribière+ in the preconditioned metric
            ((gz_new - z_new.dot(&g)) / gz).max(0.0)
        };
        d = combine(&z_new, -1.0, &d, beta);
        g = g_new;
        z = z_new;
        gz = gz_new;
    }

    // a converged run ends on a critical point; otherwise report the best
    // iterate seen
    let (field, energy) = if converged { (u, e) } else { best };
    let residual = gl_residual(&field, kappa);
    let grad_norm = residual.combined();
    Ok(MinimizeResult {
        vortices: vortex_detect(&field, cfg.vortex_threshold),
        min_modulus: field.min_modulus(),
        converged: converged || grad_norm <= cfg.grad_tol,
        field,
        energy,
        grad_norm,
        residual,
        iterations,
        perturbations,
    })
}
