//! Circular annuli `{1/R < |x| < R}`, their H¹-capacity, and the thick/thin
//! classification.
//!
//! Under `x = e^{r + iφ}` the annulus becomes the rectangle
//! `[-L, L] × [0, 2π)` with `L = ln R`. Every grid in this crate lives on
//! that rectangle.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::numerics::preconditioned_cg;

/// Capacity at which the existence picture changes.
pub const CRITICAL_CAPACITY: f64 = PI;

/// A circular annulus `{1/R < |x| < R}` together with the half-width `ρ` of
/// the potential strip used by the linear reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Annulus {
    outer_radius: f64,
    half_width: f64,
    rho: f64,
}

impl Annulus {
    /// Annulus with outer radius `R` (inner radius `1/R`), `ρ = L/2`.
    pub fn from_outer_radius(outer_radius: f64) -> Result<Self> {
        if !outer_radius.is_finite() || outer_radius <= 1.0 {
            return Err(invalid("outer radius must exceed 1"));
        }
        let half_width = outer_radius.ln();
        Ok(Self {
            outer_radius,
            half_width,
            rho: 0.5 * half_width,
        })
    }

    /// Annulus with half log-width `L = ln R`, `ρ = L/2`.
    pub fn from_half_width(half_width: f64) -> Result<Self> {
        if !half_width.is_finite() || half_width <= 0.0 {
            return Err(invalid("half log-width L must be positive"));
        }
        Ok(Self {
            outer_radius: half_width.exp(),
            half_width,
            rho: 0.5 * half_width,
        })
    }

    /// Replaces the potential half-width; requires `0 < ρ < L`.
    pub fn with_rho(self, rho: f64) -> Result<Self> {
        if !rho.is_finite() || rho <= 0.0 || rho >= self.half_width {
            return Err(invalid(format!(
                "rho must satisfy 0 < rho < L = {}",
                self.half_width
            )));
        }
        Ok(Self { rho, ..self })
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer_radius
    }

    pub fn inner_radius(&self) -> f64 {
        1.0 / self.outer_radius
    }

    /// `L = ln R`.
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

/// Thick domains have capacity below π, thin ones at or above it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    Thick,
    Thin,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Classification::Thick => f.write_str("Thick"),
            Classification::Thin => f.write_str("Thin"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CapacityMethod {
    ClosedForm,
    Numeric,
}

/// Grid counts `nr × nphi` on the log-polar rectangle (`nr` includes both
/// boundary rows).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CapacityMesh {
    pub nr: usize,
    pub nphi: usize,
}

impl CapacityMesh {
    pub fn new(nr: usize, nphi: usize) -> Self {
        Self { nr, nphi }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityReport {
    pub value: f64,
    pub classification: Classification,
    pub method: CapacityMethod,
    pub mesh: Option<CapacityMesh>,
}

/// Exact capacity of the circular annulus, `π / L`.
pub fn capacity_closed_form(annulus: &Annulus) -> f64 {
    PI / annulus.half_width()
}

pub fn closed_form_report(annulus: &Annulus) -> CapacityReport {
    let value = capacity_closed_form(annulus);
    CapacityReport {
        value,
        classification: classify_capacity(value),
        method: CapacityMethod::ClosedForm,
        mesh: None,
    }
}

/// Thin iff `cap ≥ π`.
pub fn classify_capacity(cap: f64) -> Classification {
    if cap >= CRITICAL_CAPACITY {
        Classification::Thin
    } else {
        Classification::Thick
    }
}

/// The circular annulus `{e^{-π/cap} < |x| < e^{π/cap}}` with the given
/// capacity.
pub fn equivalent_annulus(cap: f64) -> Result<Annulus> {
    if !cap.is_finite() || cap <= 0.0 {
        return Err(invalid("capacity must be positive"));
    }
    Annulus::from_half_width(PI / cap)
}

/// Discretization used by the numerical capacity solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityScheme {
    /// Conservative polar-coordinate finite differences in the physical
    /// plane, on the image of the uniform rectangle grid. Midpoint radii
    /// make the scheme second order in the log spacing.
    PlanePolar,
    /// Five-point stencil on the log-polar rectangle. Conformal, so the
    /// radial problem is reproduced exactly for circular annuli.
    LogPolar,
}

/// Discrete capacity potential and its Dirichlet integral.
#[derive(Debug, Clone)]
pub struct CapacitySolution {
    pub nr: usize,
    pub nphi: usize,
    /// Row-major samples `v[i * nphi + j]`, `v = 1` on `r = -L`, `v = 0` on `r = L`.
    pub potential: Vec<f64>,
    pub energy: f64,
    pub iterations: usize,
    pub residual: f64,
}

impl CapacitySolution {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.potential[i * self.nphi + j]
    }
}

const CAPACITY_CG_TOL: f64 = 1e-13;

/// Solves the capacity problem numerically (plane-polar scheme).
pub fn capacity_numeric(annulus: &Annulus, mesh: CapacityMesh) -> Result<CapacityReport> {
    let sol = solve_capacity_potential(annulus, mesh, CapacityScheme::PlanePolar)?;
    Ok(CapacityReport {
        value: sol.energy,
        classification: classify_capacity(sol.energy),
        method: CapacityMethod::Numeric,
        mesh: Some(mesh),
    })
}

/// Edge weights of the discrete Dirichlet integral
/// `Σ radial[i] (v[i+1,j] - v[i,j])² + Σ angular[i] (v[i,j+1] - v[i,j])²`.
struct EdgeWeights {
    radial: Vec<f64>,
    angular: Vec<f64>,
}

fn edge_weights(annulus: &Annulus, mesh: CapacityMesh, scheme: CapacityScheme) -> EdgeWeights {
    let l = annulus.half_width();
    let nr = mesh.nr;
    let hr = 2.0 * l / (nr - 1) as f64;
    let hphi = 2.0 * PI / mesh.nphi as f64;
    match scheme {
        CapacityScheme::LogPolar => {
            let mut angular = vec![hr / hphi; nr];
            angular[0] *= 0.5;
            angular[nr - 1] *= 0.5;
            EdgeWeights {
                radial: vec![hphi / hr; nr - 1],
                angular,
            }
        }
        CapacityScheme::PlanePolar => {
            let radius: Vec<f64> = (0..nr).map(|i| (-l + i as f64 * hr).exp()).collect();
            let radial = (0..nr - 1)
                .map(|i| {
                    let mid = 0.5 * (radius[i] + radius[i + 1]);
                    mid * hphi / (radius[i + 1] - radius[i])
                })
                .collect();
            let angular = (0..nr)
                .map(|i| {
                    let lo = if i > 0 { radius[i - 1] } else { radius[i] };
                    let hi = if i + 1 < nr { radius[i + 1] } else { radius[i] };
                    0.5 * (hi - lo) / (radius[i] * hphi)
                })
                .collect();
            EdgeWeights { radial, angular }
        }
    }
}

/// Solves the discrete Laplace problem with `v = 0` on the outer circle and
/// `v = 1` on the inner one, and returns the potential and its Dirichlet
/// integral.
pub fn solve_capacity_potential(
    annulus: &Annulus,
    mesh: CapacityMesh,
    scheme: CapacityScheme,
) -> Result<CapacitySolution> {
    if mesh.nr < 16 || mesh.nphi < 16 {
        return Err(invalid("capacity mesh sizes must be at least 16"));
    }
    let (nr, nphi) = (mesh.nr, mesh.nphi);
    let w = edge_weights(annulus, mesh, scheme);
    let interior = nr - 2;
    let n = interior * nphi;

    // Unknowns are rows 1..nr-1; the inner boundary row (i = 0) carries v = 1.
    let mut diag = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for k in 0..interior {
        let i = k + 1;
        let d = w.radial[i - 1] + w.radial[i] + 2.0 * w.angular[i];
        for j in 0..nphi {
            diag[k * nphi + j] = d;
        }
        if i == 1 {
            for j in 0..nphi {
                rhs[k * nphi + j] = w.radial[0];
            }
        }
    }
    let apply = |x: &[f64], out: &mut [f64]| {
        for k in 0..interior {
            let i = k + 1;
            let (wl, wr, wa) = (w.radial[i - 1], w.radial[i], w.angular[i]);
            for j in 0..nphi {
                let idx = k * nphi + j;
                let jp = k * nphi + (j + 1) % nphi;
                let jm = k * nphi + (j + nphi - 1) % nphi;
                let down = if k > 0 { x[idx - nphi] } else { 0.0 };
                let up = if k + 1 < interior { x[idx + nphi] } else { 0.0 };
                out[idx] = diag[idx] * x[idx] - wl * down - wr * up - wa * (x[jp] + x[jm]);
            }
        }
    };
    let cg = preconditioned_cg(apply, &diag, &rhs, CAPACITY_CG_TOL, 20 * n.max(1000))?;

    let mut potential = vec![0.0; nr * nphi];
    potential[..nphi].fill(1.0);
    potential[nphi..(nr - 1) * nphi].copy_from_slice(&cg.x);

    let mut energy = 0.0;
    for i in 0..nr - 1 {
        for j in 0..nphi {
            let dv = potential[(i + 1) * nphi + j] - potential[i * nphi + j];
            energy += w.radial[i] * dv * dv;
        }
    }
    for i in 0..nr {
        for j in 0..nphi {
            let dv = potential[i * nphi + (j + 1) % nphi] - potential[i * nphi + j];
            energy += w.angular[i] * dv * dv;
        }
    }
    Ok(CapacitySolution {
        nr,
        nphi,
        potential,
        energy,
        iterations: cg.iterations,
        residual: cg.residual,
    })
}
