//! κ-continuation.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use super::{initial_field, minimize, InitKind, MinimizeConfig, MinimizeResult};
use crate::error::{invalid, Result};
use crate::field::ComplexField;
use crate::geometry::Annulus;

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub minimize: MinimizeConfig,
    pub init: InitKind,
    pub nr: usize,
    pub nphi: usize,
    /// Sweep the grid from the largest κ down (hysteresis check).
    pub reverse: bool,
    /// Start every κ from `init` independently, in parallel.
    pub cold_parallel: bool,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            minimize: MinimizeConfig::default(),
            init: InitKind::vortex_pair(),
            nr: 128,
            nphi: 512,
            reverse: false,
            cold_parallel: false,
        }
    }
}

/// One CSV row; the minimizer output rides along unserialized.
#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub kappa: f64,
    pub energy: f64,
    /// `2π - energy`.
    pub gap_2pi: f64,
    pub n_vortices: usize,
    pub min_modulus: f64,
    /// Smallest `L - r` over detected vortices (NaN if none).
    pub vortex_dist_outer: f64,
    /// Smallest `r + L` over detected vortices (NaN if none).
    pub vortex_dist_inner: f64,
    pub iterations: usize,
    pub converged: bool,
    #[serde(skip)]
    pub result: MinimizeResult,
}

impl ScanRow {
    fn new(kappa: f64, l: f64, result: MinimizeResult) -> Self {
        let dist = |f: &dyn Fn(f64) -> f64| {
            result
                .vortices
                .iter()
                .map(|v| f(v.r))
                .fold(f64::NAN, f64::min)
        };
        Self {
            kappa,
            energy: result.energy,
            gap_2pi: 2.0 * PI - result.energy,
            n_vortices: result.vortices.len(),
            min_modulus: result.min_modulus,
            vortex_dist_outer: dist(&|r| l - r),
            vortex_dist_inner: dist(&|r| r + l),
            iterations: result.iterations,
            converged: result.converged,
            result,
        }
    }
}

/// Minimizes along an increasing κ grid. By default each point starts from
/// the previous minimizer; rows are returned in sweep order.
pub fn kappa_scan(annulus: &Annulus, grid: &[f64], cfg: &ScanConfig) -> Result<Vec<ScanRow>> {
    if grid.is_empty() {
        return Err(invalid("kappa grid is empty"));
    }
    if grid.iter().any(|k| !(*k > 0.0 && k.is_finite())) {
        return Err(invalid("kappa values must be positive"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid("kappa grid must be strictly increasing"));
    }
    cfg.minimize.validate()?;
    let start = initial_field(annulus, cfg.nr, cfg.nphi, &cfg.init)?;
    let l = annulus.half_width();
    let mut order: Vec<f64> = grid.to_vec();
    if cfg.reverse {
        order.reverse();
    }

    if cfg.cold_parallel {
        let results: Vec<Result<MinimizeResult>> = std::thread::scope(|s| {
            let handles: Vec<_> = order
                .iter()
                .map(|&k| {
                    let start = &start;
                    s.spawn(move || minimize(annulus, k, start, &cfg.minimize))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("minimizer thread panicked"))
                .collect()
        });
        return order
            .iter()
            .zip(results)
            .map(|(&k, r)| Ok(ScanRow::new(k, l, r?)))
            .collect();
    }

    let mut rows = Vec::with_capacity(order.len());
    let mut current: ComplexField = start;
    for &kappa in &order {
        let result = minimize(annulus, kappa, &current, &cfg.minimize)?;
        current = result.field.clone();
        rows.push(ScanRow::new(kappa, l, result));
    }
    Ok(rows)
}

/// Writes `kappa,energy,gap_2pi,n_vortices,min_modulus,vortex_dist_outer,
/// vortex_dist_inner,iterations,converged`.
pub fn write_scan_csv<W: Write>(rows: &[ScanRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
