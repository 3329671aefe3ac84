//! Complex order-parameter fields on the log-polar rectangle.
//!
//! A [`ComplexField`] samples `u(r_i, φ_j)` on the uniform grid
//! `r_i = -L + i h_r` (`i = 0..nr`, both boundary rows included) and
//! `φ_j = j h_φ` (`j = 0..nphi`, periodic, the seam is never stored twice).
//! Row `0` is the inner circle `|x| = 1/R`, row `nr - 1` the outer circle.

mod energy;
mod snapshot;
mod transforms;
mod winding;

pub use energy::{
    bound_energy, energy, energy_gradient, energy_parts, gl_residual, EnergyParts, GlResidual,
};
pub(crate) use energy::{energy_change, residual_from_raw};
pub use snapshot::{read_snapshot, read_snapshot_file, write_snapshot, write_snapshot_file};
pub use transforms::{boundary_identity_residual, phase_normalize, symmetrize, Symmetrized};
pub use winding::{
    degree_from_coefficients, fourier_trace, loop_winding, vortex_detect, winding_number,
    BoundaryTrace, LoopWinding, VortexRecord, WINDING_MODULUS_FLOOR,
};

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::geometry::Annulus;

/// Which boundary row of the rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Side {
    /// `r = +L`, the circle `|x| = R`.
    Outer,
    /// `r = -L`, the circle `|x| = 1/R`.
    Inner,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    annulus: Annulus,
    nr: usize,
    nphi: usize,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn from_values(
        annulus: Annulus,
        nr: usize,
        nphi: usize,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        if nr < 3 || nphi < 8 {
            return Err(invalid(format!(
                "field grid must have nr >= 3 and nphi >= 8 (got {nr} x {nphi})"
            )));
        }
        if values.len() != nr * nphi {
            return Err(invalid(format!(
                "expected {} samples, got {}",
                nr * nphi,
                values.len()
            )));
        }
        if let Some(k) = values
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(invalid(format!("non-finite sample at index {k}")));
        }
        Ok(Self {
            annulus,
            nr,
            nphi,
            values,
        })
    }

    /// Samples `f(r, φ)` on the grid.
    pub fn from_fn<F>(annulus: Annulus, nr: usize, nphi: usize, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Complex64,
    {
        if nr < 3 || nphi < 8 {
            return Err(invalid(format!(
                "field grid must have nr >= 3 and nphi >= 8 (got {nr} x {nphi})"
            )));
        }
        let l = annulus.half_width();
        let hr = 2.0 * l / (nr - 1) as f64;
        let hphi = 2.0 * PI / nphi as f64;
        let mut values = Vec::with_capacity(nr * nphi);
        for i in 0..nr {
            let r = -l + i as f64 * hr;
            for j in 0..nphi {
                values.push(f(r, j as f64 * hphi));
            }
        }
        Self::from_values(annulus, nr, nphi, values)
    }

    /// Same grid, every sample set to `value`.
    pub fn constant(annulus: Annulus, nr: usize, nphi: usize, value: Complex64) -> Result<Self> {
        Self::from_values(annulus, nr, nphi, vec![value; nr * nphi])
    }

    pub fn annulus(&self) -> &Annulus {
        &self.annulus
    }

    /// Same samples, different annulus parameters (only `ρ` may differ in
    /// practice; `L` must match).
    pub fn with_annulus(mut self, annulus: Annulus) -> Result<Self> {
        if (annulus.half_width() - self.annulus.half_width()).abs()
            > 1e-12 * self.annulus.half_width()
        {
            return Err(invalid("annulus half-width does not match field grid"));
        }
        self.annulus = annulus;
        Ok(self)
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    pub fn nphi(&self) -> usize {
        self.nphi
    }

    pub fn hr(&self) -> f64 {
        2.0 * self.annulus.half_width() / (self.nr - 1) as f64
    }

    pub fn hphi(&self) -> f64 {
        2.0 * PI / self.nphi as f64
    }

    pub fn r(&self, i: usize) -> f64 {
        -self.annulus.half_width() + i as f64 * self.hr()
    }

    pub fn phi(&self, j: usize) -> f64 {
        j as f64 * self.hphi()
    }

    /// Sample at `(i, j)`; `j` wraps around.
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.nphi + j % self.nphi]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        let nphi = self.nphi;
        self.values[i * nphi + j % nphi] = value;
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.values[i * self.nphi..(i + 1) * self.nphi]
    }

    pub fn boundary_row(&self, side: Side) -> &[Complex64] {
        self.row(self.boundary_index(side))
    }

    pub fn boundary_index(&self, side: Side) -> usize {
        match side {
            Side::Outer => self.nr - 1,
            Side::Inner => 0,
        }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn is_boundary_row(&self, i: usize) -> bool {
        i == 0 || i + 1 == self.nr
    }

    /// Trapezoid weight of row `i` in `r`.
    pub(crate) fn row_weight(&self, i: usize) -> f64 {
        if self.is_boundary_row(i) {
            0.5
        } else {
            1.0
        }
    }

    /// Multiplies every sample by `c`.
    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            values: self.values.iter().map(|z| z * c).collect(),
            ..self.clone()
        }
    }

    /// Euclidean pairing `Σ Re(conj(a) b)` over all samples.
    pub fn dot(&self, other: &ComplexField) -> f64 {
        debug_assert_eq!(self.values.len(), other.values.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn min_modulus(&self) -> f64 {
        self.values
            .iter()
            .map(|z| z.norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest deviation of the boundary rows from modulus one.
    pub fn boundary_modulus_defect(&self) -> f64 {
        [Side::Inner, Side::Outer]
            .iter()
            .flat_map(|&s| self.boundary_row(s).iter())
            .map(|z| (z.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Moves along `direction` by `t`: interior samples additively, boundary
    /// samples by rotating their phase with the tangential component of the
    /// direction. Boundary moduli are preserved exactly.
    pub fn retract(&self, direction: &ComplexField, t: f64) -> ComplexField {
        let mut out = self.clone();
        let nphi = self.nphi;
        for (k, (u, d)) in out.values.iter_mut().zip(&direction.values).enumerate() {
            let i = k / nphi;
            if self.is_boundary_row(i) {
                let m2 = u.norm_sqr();
                if m2 > 0.0 {
                    let dtheta = (u.conj() * d).im / m2;
                    *u *= Complex64::from_polar(1.0, t * dtheta);
                }
            } else {
                *u += d * t;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn annulus() -> Annulus {
        Annulus::from_half_width(1.0).unwrap()
    }

    #[test]
    fn grid_coordinates() {
        let u = ComplexField::constant(annulus(), 5, 8, Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(u.r(0), -1.0);
        assert!((u.r(4) - 1.0).abs() < 1e-15);
        assert!((u.hphi() - PI / 4.0).abs() < 1e-15);
        assert_eq!(u.boundary_index(Side::Outer), 4);
        assert_eq!(u.at(2, 9), u.at(2, 1));
    }

    #[test]
    fn rejects_bad_grids_and_samples() {
        let one = Complex64::new(1.0, 0.0);
        assert!(ComplexField::constant(annulus(), 2, 8, one).is_err());
        assert!(ComplexField::constant(annulus(), 3, 7, one).is_err());
        assert!(ComplexField::from_values(annulus(), 3, 8, vec![one; 23]).is_err());
        let mut v = vec![one; 24];
        v[5] = Complex64::new(f64::NAN, 0.0);
        assert!(ComplexField::from_values(annulus(), 3, 8, v).is_err());
    }

    #[test]
    fn retract_keeps_boundary_unimodular() {
        let u = ComplexField::from_fn(annulus(), 6, 16, |_, phi| Complex64::from_polar(1.0, phi))
            .unwrap();
        let d = ComplexField::from_fn(annulus(), 6, 16, |r, phi| {
            Complex64::new(r.sin() + phi.cos(), 0.3 * r)
        })
        .unwrap();
        let v = u.retract(&d, 0.7);
        assert!(v.boundary_modulus_defect() < 1e-14);
        assert_eq!(v.at(2, 3), u.at(2, 3) + d.at(2, 3) * 0.7);
    }
}
