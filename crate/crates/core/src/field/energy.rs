//! Discrete Ginzburg-Landau energy on the rectangle and its first variation.
//!
//! ```text
//! E = ½ (h_φ/h_r) Σ_edges |u[i+1,j] - u[i,j]|²
//!   + ½ (h_r/h_φ) Σ_i w_i Σ_j |u[i,j+1] - u[i,j]|²
//!   + κ²/4 h_r h_φ Σ_i w_i e^{2 r_i} Σ_j (|u[i,j]|² - 1)²
//! ```
//!
//! with trapezoid weights `w_i` (½ on the boundary rows). The Dirichlet part
//! is conformally invariant; only the potential carries the Jacobian `e^{2r}`.

use num_complex::Complex64;

use super::ComplexField;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParts {
    pub dirichlet: f64,
    pub potential: f64,
}

impl EnergyParts {
    pub fn total(&self) -> f64 {
        self.dirichlet + self.potential
    }
}

/// Per-row building blocks of the discrete energy, unweighted.
pub(crate) struct RowSums {
    /// `Σ_j |u[i+1,j] - u[i,j]|²` for `i = 0..nr-1`.
    pub radial: Vec<f64>,
    /// `Σ_j |u[i,j+1] - u[i,j]|²` for every row.
    pub angular: Vec<f64>,
    /// `Σ_j (|u[i,j]|² - 1)²` for every row.
    pub potential: Vec<f64>,
}

pub(crate) fn row_sums(u: &ComplexField) -> RowSums {
    let (nr, nphi) = (u.nr(), u.nphi());
    let mut radial = vec![0.0; nr - 1];
    let mut angular = vec![0.0; nr];
    let mut potential = vec![0.0; nr];
    for i in 0..nr {
        let row = u.row(i);
        let mut a = 0.0;
        let mut p = 0.0;
        for j in 0..nphi {
            a += (row[(j + 1) % nphi] - row[j]).norm_sqr();
            let m = row[j].norm_sqr() - 1.0;
            p += m * m;
        }
        angular[i] = a;
        potential[i] = p;
        if i + 1 < nr {
            let next = u.row(i + 1);
            radial[i] = row.iter().zip(next).map(|(x, y)| (y - x).norm_sqr()).sum();
        }
    }
    RowSums {
        radial,
        angular,
        potential,
    }
}

fn parts_with_weight<W: Fn(usize) -> f64>(u: &ComplexField, weight: W) -> EnergyParts {
    let (hr, hphi) = (u.hr(), u.hphi());
    let sums = row_sums(u);
    let mut dirichlet = 0.5 * hphi / hr * sums.radial.iter().sum::<f64>();
    let mut potential = 0.0;
    for i in 0..u.nr() {
        let w = u.row_weight(i);
        dirichlet += 0.5 * hr / hphi * w * sums.angular[i];
        potential += w * weight(i) * sums.potential[i];
    }
    EnergyParts {
        dirichlet,
        potential: potential * hr * hphi,
    }
}

/// Dirichlet and potential parts of `E_κ[u]`.
pub fn energy_parts(u: &ComplexField, kappa: f64) -> EnergyParts {
    let k2 = 0.25 * kappa * kappa;
    parts_with_weight(u, |i| k2 * (2.0 * u.r(i)).exp())
}

/// Discrete `E_κ[u]`.
pub fn energy(u: &ComplexField, kappa: f64) -> f64 {
    energy_parts(u, kappa).total()
}

/// Energy with the Jacobian replaced by its minimum `1/R²`, i.e.
/// `½∫|∇u|² + κ²/(4R²) ∫(|u|² - 1)²` over the rectangle. Bounded above by
/// `E_κ[u]`.
pub fn bound_energy(u: &ComplexField, kappa: f64) -> f64 {
    let big_r = u.annulus().outer_radius();
    let w = 0.25 * kappa * kappa / (big_r * big_r);
    parts_with_weight(u, |_| w).total()
}

/// `E_κ[v] - E_κ[u]` summed term by term from `v - u`, so the difference
/// keeps its relative accuracy when it is far below the round-off of
/// either energy.
pub(crate) fn energy_change(u: &ComplexField, v: &ComplexField, kappa: f64) -> f64 {
    let (nr, nphi) = (u.nr(), u.nphi());
    let (hr, hphi) = (u.hr(), u.hphi());
    let (cr, cphi) = (hphi / hr, hr / hphi);
    let k2 = 0.25 * kappa * kappa * hr * hphi;
    // |b|² - |a|² with b - a = db
    let sq = |a: Complex64, db: Complex64| (db * (2.0 * a + db).conj()).re;
    let mut total = 0.0;
    for i in 0..nr {
        let (ru, rv) = (u.row(i), v.row(i));
        let w = u.row_weight(i);
        let pot = k2 * w * (2.0 * u.r(i)).exp();
        let (mut radial, mut angular, mut potential) = (0.0, 0.0, 0.0);
        for j in 0..nphi {
            let jn = (j + 1) % nphi;
            let dj = rv[j] - ru[j];
            angular += sq(ru[jn] - ru[j], (rv[jn] - ru[jn]) - dj);
            let dm = sq(ru[j], dj);
            let mu = ru[j].norm_sqr() - 1.0;
            potential += dm * (2.0 * mu + dm);
            if i + 1 < nr {
                let (nu, nv) = (u.row(i + 1), v.row(i + 1));
                radial += sq(nu[j] - ru[j], (nv[j] - nu[j]) - dj);
            }
        }
        total += 0.5 * cr * radial + 0.5 * cphi * w * angular + pot * potential;
    }
    total
}

/// Raw partial derivatives `∂E/∂Re u + i ∂E/∂Im u` at every sample.
fn raw_gradient(u: &ComplexField, kappa: f64) -> Vec<Complex64> {
    let (nr, nphi) = (u.nr(), u.nphi());
    let (hr, hphi) = (u.hr(), u.hphi());
    let cr = hphi / hr;
    let cphi = hr / hphi;
    let k2 = kappa * kappa * hr * hphi;
    let mut g = vec![Complex64::new(0.0, 0.0); nr * nphi];
    for i in 0..nr {
        let w = u.row_weight(i);
        let pot = k2 * w * (2.0 * u.r(i)).exp();
        let row = u.row(i);
        let below = if i > 0 { Some(u.row(i - 1)) } else { None };
        let above = if i + 1 < nr { Some(u.row(i + 1)) } else { None };
        let out = &mut g[i * nphi..(i + 1) * nphi];
        for j in 0..nphi {
            let z = row[j];
            let mut acc = (2.0 * z - row[(j + 1) % nphi] - row[(j + nphi - 1) % nphi]) * (w * cphi);
            if let Some(b) = below {
                acc += (z - b[j]) * cr;
            }
            if let Some(a) = above {
                acc += (z - a[j]) * cr;
            }
            acc += z * (pot * (z.norm_sqr() - 1.0));
            out[j] = acc;
        }
    }
    g
}

/// Unit tangent `i u / |u|` of a boundary sample.
fn tangent(z: Complex64) -> Complex64 {
    let m = z.norm();
    if m > 0.0 {
        Complex64::new(-z.im / m, z.re / m)
    } else {
        Complex64::new(0.0, 0.0)
    }
}

/// First variation of the discrete energy.
///
/// Interior entries are `∂E/∂Re u + i ∂E/∂Im u`. Boundary rows carry only
/// phase freedom, so their entries are the projection onto the tangent
/// `i u/|u|`; for a unimodular row the real coefficient of that tangent is
/// `∂E/∂θ_j`. Pairing with [`ComplexField::dot`] gives the directional
/// derivative along any admissible perturbation.
pub fn energy_gradient(u: &ComplexField, kappa: f64) -> ComplexField {
    let mut g = raw_gradient(u, kappa);
    let (nr, nphi) = (u.nr(), u.nphi());
    for i in [0, nr - 1] {
        for j in 0..nphi {
            let t = tangent(u.at(i, j));
            let k = i * nphi + j;
            g[k] = t * (t.conj() * g[k]).re;
        }
    }
    let mut out = u.clone();
    out.values_mut().copy_from_slice(&g);
    out
}

/// Discrete Ginzburg-Landau residuals of a field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlResidual {
    /// L² norm over interior nodes of `-Δu + κ² e^{2r}(|u|² - 1)u`.
    pub interior: f64,
    /// L² norm over both boundary rows of the natural condition
    /// `Im(ū ∂u/∂ν)`, in its discrete flux-balance form.
    pub boundary: f64,
}

impl GlResidual {
    pub fn combined(&self) -> f64 {
        self.interior.hypot(self.boundary)
    }
}

/// Residuals vanish exactly at critical points of the discrete energy over
/// fields with unimodular boundary rows.
pub fn gl_residual(u: &ComplexField, kappa: f64) -> GlResidual {
    let g = raw_gradient(u, kappa);
    residual_from_raw(u, &g)
}

/// Interior density `-Δ_h u + κ² e^{2r}(|u|² - 1) u` at every interior node.
#[cfg(test)]
pub(crate) fn interior_density(u: &ComplexField, kappa: f64) -> Vec<Complex64> {
    let g = raw_gradient(u, kappa);
    let area = u.hr() * u.hphi();
    let nphi = u.nphi();
    g[nphi..(u.nr() - 1) * nphi]
        .iter()
        .map(|z| z / area)
        .collect()
}

pub(crate) fn residual_from_raw(u: &ComplexField, g: &[Complex64]) -> GlResidual {
    let (nr, nphi) = (u.nr(), u.nphi());
    let (hr, hphi) = (u.hr(), u.hphi());
    let area = hr * hphi;
    let interior: f64 = g[nphi..(nr - 1) * nphi]
        .iter()
        .map(|z| z.norm_sqr() / area)
        .sum();
    let mut boundary = 0.0;
    for i in [0, nr - 1] {
        for j in 0..nphi {
            let z = u.at(i, j);
            let flux = (z.conj() * g[i * nphi + j]).im / hphi;
            boundary += flux * flux * hphi;
        }
    }
    GlResidual {
        interior: interior.sqrt(),
        boundary: boundary.sqrt(),
    }
}
