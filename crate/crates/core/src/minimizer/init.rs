//! Initial fields with degree one on both boundary circles.

use std::path::PathBuf;

use num_complex::Complex64;

use crate::error::Result;
use crate::field::{read_snapshot_file, ComplexField};
use crate::geometry::Annulus;

/// Default distance (in `r`) of the vortex-pair initializer's vortices from
/// their boundary.
pub const VORTEX_PAIR_OFFSET: f64 = 0.05;

/// The raw Möbius product is far from unimodular over a region comparable to
/// the vortex distance, which the potential punishes heavily near `r = L`.
/// Its modulus `m` is replaced by `tanh(m / CORE_SATURATION)`.
const CORE_SATURATION: f64 = 0.3;

#[derive(Debug, Clone, PartialEq)]
pub enum InitKind {
    /// `u = e^{iφ}` everywhere.
    Harmonic,
    /// A `+1` vortex at distance `offset` from `r = L` and a `-1` vortex at
    /// the same distance from `r = -L`, at antipodal angles, with cores
    /// sharpened toward unit modulus.
    VortexPair { offset: f64 },
    /// A stored snapshot.
    File(PathBuf),
}

impl InitKind {
    pub fn vortex_pair() -> Self {
        Self::VortexPair {
            offset: VORTEX_PAIR_OFFSET,
        }
    }
}

/// Möbius factor `s (z - a) / (s² - ā z)`, unimodular on `|z| = s`.
fn mobius(z: Complex64, a: Complex64, s: f64) -> Complex64 {
    (z - a) * s / (s * s - a.conj() * z)
}

/// Field on an `nr × nphi` grid. Snapshots keep their own grid; their `L`
/// must match the annulus.
pub fn initial_field(
    annulus: &Annulus,
    nr: usize,
    nphi: usize,
    kind: &InitKind,
) -> Result<ComplexField> {
    match kind {
        InitKind::Harmonic => {
            ComplexField::from_fn(*annulus, nr, nphi, |_, phi| Complex64::from_polar(1.0, phi))
        }
        InitKind::VortexPair { offset } => {
            let l = annulus.half_width();
            let offset = offset.clamp(1e-3 * l, l);
            let big_r = annulus.outer_radius();
            let small_r = annulus.inner_radius();
            // +1 zero near |z| = R at φ = 0, -1 zero near |z| = 1/R at φ = π
            let a = Complex64::new((l - offset).exp(), 0.0);
            let b = Complex64::new(-(offset - l).exp(), 0.0);
            let mut u = ComplexField::from_fn(*annulus, nr, nphi, |r, phi| {
                let z = Complex64::from_polar(r.exp(), phi);
                let m = mobius(z, a, big_r) * mobius(z, b, small_r).conj();
                let modulus = m.norm();
                if modulus > 0.0 {
                    m * ((modulus / CORE_SATURATION).tanh() / modulus)
                } else {
                    m
                }
            })?;
            for i in [0, nr - 1] {
                for j in 0..nphi {
                    let z = u.at(i, j);
                    u.set(i, j, z / z.norm());
                }
            }
            Ok(u)
        }
        InitKind::File(path) => read_snapshot_file(path)?.with_annulus(*annulus),
    }
}
