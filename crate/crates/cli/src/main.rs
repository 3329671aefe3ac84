//! `glcap` command-line front end.
//!
//! Every subcommand prints a one-line summary. Tables and reports go to
//! `--output` when given, otherwise to stdout (the summary then moves to
//! stderr). Exit codes: 0 success, 1 numerical failure, 2 invalid input,
//! 3 I/O failure.

mod settings;

use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use glcap::field::{write_snapshot_file, BoundaryTrace};
use glcap::geometry::{capacity_numeric, closed_form_report, CapacityMesh};
use glcap::minimizer::{
    initial_field, kappa_scan, minimize, write_scan_csv, InitKind, MinimizeConfig, ScanConfig,
    StepRule,
};
use glcap::spectral::{
    aligned_radial_nodes, bvp_cross_check, certify_nonexistence, constrained_min, f_eval,
    linear_solve, mode_table, write_mode_table, BvpScheme, ModeKind, ModeParams,
};
use glcap::{Annulus, Classification, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use settings::Settings;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Numerical(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) | CliError::Io(m) => m,
        }
    }
}

impl From<glcap::Error> for CliError {
    fn from(e: glcap::Error) -> Self {
        use glcap::Error as E;
        let msg = e.to_string();
        match e {
            E::InvalidParameter(_) => CliError::Usage(msg),
            E::Io(_) | E::Csv(_) | E::Snapshot { .. } => CliError::Io(msg),
            _ => CliError::Numerical(msg),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "glcap",
    version,
    about = "Ginzburg-Landau on annuli: capacity, minimization, mode certificates"
)]
struct Cli {
    /// `key = value` file supplying any flag; explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// H¹-capacity of the annulus and its thick/thin classification.
    Capacity {
        #[command(flatten)]
        annulus: AnnulusArgs,
        /// `closed` (π/L) or `numeric`.
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        nr: Option<usize>,
        #[arg(long)]
        nphi: Option<usize>,
        /// JSON report.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Minimize the Ginzburg-Landau energy at one κ.
    Minimize {
        #[command(flatten)]
        annulus: AnnulusArgs,
        #[arg(long)]
        kappa: Option<f64>,
        #[command(flatten)]
        run: RunArgs,
        /// Field snapshot of the result.
        #[arg(long)]
        save: Option<PathBuf>,
        /// JSON summary.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// κ-continuation; writes the scan table as CSV.
    Scan {
        #[command(flatten)]
        annulus: AnnulusArgs,
        /// Comma-separated, strictly increasing.
        #[arg(long)]
        kappas: Option<String>,
        #[command(flatten)]
        run: RunArgs,
        /// Sweep from the largest κ down.
        #[arg(long)]
        reverse: bool,
        /// Start every κ from the initial field, in parallel.
        #[arg(long)]
        cold_parallel: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Mode coefficients table (CSV) for n = 1..=nmax.
    Modes {
        #[command(flatten)]
        annulus: AnnulusArgs,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        nmax: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Nonexistence certificate (JSON).
    Certify {
        #[command(flatten)]
        annulus: AnnulusArgs,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        nmax: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Closed-form Pₙ / Qₙ against a finite-difference boundary-value solve.
    BvpCheck {
        #[command(flatten)]
        annulus: AnnulusArgs,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        /// `real` (Pₙ) or `imag` (Qₙ).
        #[arg(long)]
        kind: Option<String>,
        /// Fine mesh intervals; the coarse mesh has half as many.
        #[arg(long)]
        mesh: Option<usize>,
        /// `fitted` or `central`.
        #[arg(long)]
        scheme: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Minimum of the linearized energy over degree-one traces; optionally
    /// checks the mode decomposition on random traces.
    LinearMin {
        #[command(flatten)]
        annulus: AnnulusArgs,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        nmax: Option<usize>,
        /// Random traces for the decomposition check.
        #[arg(long)]
        trials: Option<usize>,
        /// Truncation order of those traces.
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct AnnulusArgs {
    /// Outer radius R > 1 (inner radius 1/R).
    #[arg(long = "R")]
    outer_radius: Option<f64>,
    /// Half log-width L = ln R.
    #[arg(long = "L")]
    half_width: Option<f64>,
    /// Half-width of the potential strip (default L/2).
    #[arg(long)]
    rho: Option<f64>,
}

const ANNULUS_KEYS: [&str; 3] = ["R", "L", "rho"];

impl AnnulusArgs {
    fn resolve(&self, s: &Settings) -> CliResult<Annulus> {
        let r = s.get(self.outer_radius, "R")?;
        let l = s.get(self.half_width, "L")?;
        let annulus = match (r, l) {
            (Some(_), Some(_)) => {
                return Err(CliError::Usage("give either --R or --L, not both".into()))
            }
            (Some(r), None) => Annulus::from_outer_radius(r)?,
            (None, Some(l)) => Annulus::from_half_width(l)?,
            (None, None) => return Err(CliError::Usage("missing --R or --L".into())),
        };
        Ok(match s.get(self.rho, "rho")? {
            Some(rho) => annulus.with_rho(rho)?,
            None => annulus,
        })
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    nr: Option<usize>,
    #[arg(long)]
    nphi: Option<usize>,
    /// `vortex-pair`, `harmonic`, or a snapshot path (default: harmonic on
    /// thin annuli, vortex pair on thick ones).
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    grad_tol: Option<f64>,
    /// `backtracking` or `fixed:<t>`.
    #[arg(long)]
    step: Option<String>,
    #[arg(long)]
    restart_period: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    perturbation: Option<f64>,
}

const RUN_KEYS: [&str; 9] = [
    "nr",
    "nphi",
    "init",
    "max-iters",
    "grad-tol",
    "step",
    "restart-period",
    "seed",
    "perturbation",
];

struct Run {
    nr: usize,
    nphi: usize,
    init: InitKind,
    cfg: MinimizeConfig,
}

impl RunArgs {
    /// The default start is `e^{iφ}` on thin annuli and the vortex pair on
    /// thick ones.
    fn resolve(&self, s: &Settings, annulus: &Annulus) -> CliResult<Run> {
        let d = MinimizeConfig::default();
        let step = match s.get(self.step.clone(), "step")? {
            None => d.step_rule,
            Some(text) => parse_step(&text)?,
        };
        let init = match s.get(self.init.clone(), "init")? {
            None => match closed_form_report(annulus).classification {
                Classification::Thin => InitKind::Harmonic,
                Classification::Thick => InitKind::vortex_pair(),
            },
            Some(text) => match text.as_str() {
                "vortex-pair" => InitKind::vortex_pair(),
                "harmonic" => InitKind::Harmonic,
                path if Path::new(path).is_file() => InitKind::File(PathBuf::from(path)),
                path => return Err(CliError::Io(format!("cannot read snapshot {path}"))),
            },
        };
        let cfg = MinimizeConfig {
            max_iters: s.or(self.max_iters, "max-iters", d.max_iters)?,
            grad_tol: s.or(self.grad_tol, "grad-tol", d.grad_tol)?,
            step_rule: step,
            restart_period: s.or(self.restart_period, "restart-period", d.restart_period)?,
            seed: s.or(self.seed, "seed", 0)?,
            perturbation: s.or(self.perturbation, "perturbation", d.perturbation)?,
            ..d
        };
        cfg.validate()?;
        let nr = s.or(self.nr, "nr", 128)?;
        let nphi = s.or(self.nphi, "nphi", 512)?;
        if nr < 3 || nphi < 4 {
            return Err(CliError::Usage("grid needs nr >= 3 and nphi >= 4".into()));
        }
        Ok(Run {
            nr,
            nphi,
            init,
            cfg,
        })
    }
}

fn parse_step(text: &str) -> CliResult<StepRule> {
    if text == "backtracking" {
        return Ok(StepRule::Backtracking);
    }
    text.strip_prefix("fixed:")
        .and_then(|t| t.parse().ok())
        .map(StepRule::Fixed)
        .ok_or_else(|| {
            CliError::Usage(format!(
                "step must be `backtracking` or `fixed:<t>`, got `{text}`"
            ))
        })
}

fn parse_kappas(text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|k| {
            k.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("bad kappa value `{}`", k.trim())))
        })
        .collect()
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn json_bytes(value: &impl serde::Serialize) -> CliResult<Vec<u8>> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    Ok(text.into_bytes())
}

/// Data to `output`, or to stdout with the summary on stderr.
fn emit(output: Option<&Path>, data: &[u8], summary: &str) -> CliResult<()> {
    match output {
        Some(path) => {
            write_file(path, data)?;
            println!("{summary}");
        }
        None => {
            std::io::stdout()
                .write_all(data)
                .map_err(|e| CliError::Io(e.to_string()))?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn fmt_opt(x: f64) -> String {
    if x.is_nan() {
        "-".into()
    } else {
        format!("{x:.4}")
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let s = match &cli.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    let keys = |extra: &[&'static str]| -> Vec<&'static str> {
        ANNULUS_KEYS.iter().chain(extra).copied().collect()
    };

    match cli.command {
        Command::Capacity {
            annulus,
            method,
            nr,
            nphi,
            output,
        } => {
            s.check_keys(&keys(&["method", "nr", "nphi"]))?;
            let a = annulus.resolve(&s)?;
            let report = match s.or(method, "method", "closed".to_string())?.as_str() {
                "closed" => closed_form_report(&a),
                "numeric" => {
                    let mesh = CapacityMesh::new(s.or(nr, "nr", 256)?, s.or(nphi, "nphi", 256)?);
                    capacity_numeric(&a, mesh)?
                }
                other => {
                    return Err(CliError::Usage(format!(
                        "method must be `closed` or `numeric`, got `{other}`"
                    )))
                }
            };
            if let Some(path) = &output {
                write_file(path, &json_bytes(&report)?)?;
            }
            println!(
                "capacity = {:.10} ({}, pi/L = {:.10}, L = {:.6})",
                report.value,
                report.classification,
                PI / a.half_width(),
                a.half_width()
            );
        }

        Command::Minimize {
            annulus,
            kappa,
            run,
            save,
            output,
        } => {
            s.check_keys(&keys(
                &[&RUN_KEYS[..], &["kappa", "save", "output"]].concat(),
            ))?;
            let a = annulus.resolve(&s)?;
            let kappa: f64 = s.require(kappa, "kappa")?;
            let run = run.resolve(&s, &a)?;
            let start = initial_field(&a, run.nr, run.nphi, &run.init)?;
            let res = minimize(&a, kappa, &start, &run.cfg)?;
            if let Some(path) = s.get(save, "save")? {
                write_snapshot_file(&res.field, &path)?;
            }
            let report = json!({
                "L": a.half_width(),
                "kappa": kappa,
                "nr": res.field.nr(),
                "nphi": res.field.nphi(),
                "energy": res.energy,
                "gap_2pi": 2.0 * PI - res.energy,
                "grad_norm": res.grad_norm,
                "iterations": res.iterations,
                "converged": res.converged,
                "perturbations": res.perturbations,
                "min_modulus": res.min_modulus,
                "seed": run.cfg.seed,
                "vortices": res.vortices,
            });
            if let Some(path) = s.get(output, "output")? {
                write_file(&path, &json_bytes(&report)?)?;
            }
            println!(
                "energy = {:.8} (2pi - E = {:.3e}), vortices = {}, iterations = {}, converged = {}",
                res.energy,
                2.0 * PI - res.energy,
                res.vortices.len(),
                res.iterations,
                res.converged
            );
        }

        Command::Scan {
            annulus,
            kappas,
            run,
            reverse,
            cold_parallel,
            output,
        } => {
            s.check_keys(&keys(
                &[
                    &RUN_KEYS[..],
                    &["kappas", "reverse", "cold-parallel", "output"],
                ]
                .concat(),
            ))?;
            let a = annulus.resolve(&s)?;
            let grid = parse_kappas(&s.or(kappas, "kappas", "1,2,5,10,20,50".to_string())?)?;
            let run = run.resolve(&s, &a)?;
            let cfg = ScanConfig {
                minimize: run.cfg,
                init: run.init,
                nr: run.nr,
                nphi: run.nphi,
                reverse: s.switch(reverse, "reverse")?,
                cold_parallel: s.switch(cold_parallel, "cold-parallel")?,
            };
            let rows = kappa_scan(&a, &grid, &cfg)?;
            let mut csv = Vec::new();
            write_scan_csv(&rows, &mut csv)?;
            let last = rows.last().expect("nonempty grid");
            let summary = format!(
                "{} kappa values, final kappa = {}: energy = {:.8}, vortices = {}, outer distance = {}",
                rows.len(),
                last.kappa,
                last.energy,
                last.n_vortices,
                fmt_opt(last.vortex_dist_outer)
            );
            emit(s.get(output, "output")?.as_deref(), &csv, &summary)?;
        }

        Command::Modes {
            annulus,
            kappa,
            nmax,
            output,
        } => {
            s.check_keys(&keys(&["kappa", "nmax", "output"]))?;
            let a = annulus.resolve(&s)?;
            let kappa: f64 = s.require(kappa, "kappa")?;
            let nmax = s.or(nmax, "nmax", 200)?;
            let rows = mode_table(&a, kappa, nmax)?;
            if let Some(c) = rows
                .iter()
                .find(|c| ![c.p, c.q, c.alpha, c.beta].iter().all(|v| v.is_finite()))
            {
                return Err(CliError::Numerical(format!(
                    "mode {}: coefficients are not finite",
                    c.n
                )));
            }
            let mut csv = Vec::new();
            write_mode_table(&rows, &mut csv)?;
            let worst = rows
                .iter()
                .min_by(|x, y| x.pq_excess().total_cmp(&y.pq_excess()))
                .ok_or_else(|| CliError::Usage("nmax must be at least 1".into()))?;
            let summary = format!(
                "{} modes, min PQ - 1 = {:.6e} at n = {}, min beta - alpha = {:.6e}",
                rows.len(),
                worst.pq_excess(),
                worst.n,
                rows.iter()
                    .map(|c| c.margin())
                    .fold(f64::INFINITY, f64::min)
            );
            emit(s.get(output, "output")?.as_deref(), &csv, &summary)?;
        }

        Command::Certify {
            annulus,
            kappa,
            nmax,
            output,
        } => {
            s.check_keys(&keys(&["kappa", "nmax", "output"]))?;
            let a = annulus.resolve(&s)?;
            let kappa: f64 = s.require(kappa, "kappa")?;
            let cert = certify_nonexistence(&a, kappa, s.or(nmax, "nmax", 200)?)?;
            if !cert.margin.is_finite() {
                return Err(CliError::Numerical(
                    "certificate margin is not finite".into(),
                ));
            }
            match s.get(output, "output")? {
                Some(path) => {
                    write_file(&path, &json_bytes(&cert)?)?;
                    println!(
                        "valid = {}, margin = {:.6e}, n_checked = {}",
                        cert.valid, cert.margin, cert.n_checked
                    );
                }
                None => println!(
                    "{}",
                    serde_json::to_string(&cert).map_err(|e| CliError::Io(e.to_string()))?
                ),
            }
        }

        Command::BvpCheck {
            annulus,
            kappa,
            n,
            kind,
            mesh,
            scheme,
            output,
        } => {
            s.check_keys(&keys(&["kappa", "n", "kind", "mesh", "scheme", "output"]))?;
            let a = annulus.resolve(&s)?;
            let kappa: f64 = s.require(kappa, "kappa")?;
            let n: usize = s.require(n, "n")?;
            if n == 0 {
                return Err(CliError::Usage("n must be at least 1".into()));
            }
            let kind = match s.or(kind, "kind", "real".to_string())?.as_str() {
                "real" => ModeKind::Real,
                "imag" => ModeKind::Imag,
                other => {
                    return Err(CliError::Usage(format!(
                        "kind must be `real` or `imag`, got `{other}`"
                    )))
                }
            };
            let scheme = match s.or(scheme, "scheme", "fitted".to_string())?.as_str() {
                "fitted" => BvpScheme::Fitted,
                "central" => BvpScheme::Central,
                other => {
                    return Err(CliError::Usage(format!(
                        "scheme must be `fitted` or `central`, got `{other}`"
                    )))
                }
            };
            let mesh = s.or(mesh, "mesh", 2048)?;
            let p = ModeParams::from_annulus(&a, kappa, n)?;
            let check = bvp_cross_check(&p, kind, mesh, scheme)?;
            let report = json!({
                "L": a.half_width(),
                "rho": a.rho(),
                "kappa": kappa,
                "n": n,
                "kind": if kind == ModeKind::Real { "real" } else { "imag" },
                "mesh": mesh,
                "coarse": check.coarse,
                "fine": check.fine,
                "numeric": check.numeric,
                "closed_form": check.closed_form,
                "discrepancy": check.discrepancy,
            });
            if let Some(path) = s.get(output, "output")? {
                write_file(&path, &json_bytes(&report)?)?;
            }
            println!(
                "closed form = {:.12e}, extrapolated = {:.12e}, relative discrepancy = {:.3e}",
                check.closed_form, check.numeric, check.discrepancy
            );
        }

        Command::LinearMin {
            annulus,
            kappa,
            nmax,
            trials,
            order,
            seed,
            output,
        } => {
            s.check_keys(&keys(&[
                "kappa", "nmax", "trials", "order", "seed", "output",
            ]))?;
            let a = annulus.resolve(&s)?;
            let kappa: f64 = s.require(kappa, "kappa")?;
            let min = constrained_min(&a, kappa, s.or(nmax, "nmax", 200)?)?;
            let trials = s.or(trials, "trials", 0)?;
            let order = s.or(order, "order", 16)?;
            let mut rng = ChaCha8Rng::seed_from_u64(s.or(seed, "seed", 0)?);
            let mut worst = 0.0f64;
            let mut min_p0 = f64::INFINITY;
            if trials > 0 {
                if order < 1 {
                    return Err(CliError::Usage("order must be at least 1".into()));
                }
                // the real profiles turn over on a 1/κ layer at ±ρ
                let min_nodes = 1025usize.max((16.0 * a.half_width() * kappa).ceil() as usize + 1);
                let nr = aligned_radial_nodes(a.half_width(), a.rho(), min_nodes)?;
                let nphi = (4 * order + 4).next_power_of_two();
                for _ in 0..trials {
                    let trace = random_trace(&mut rng, order)?;
                    let sol = linear_solve(&trace, &a, kappa, nr, nphi)?;
                    let f = f_eval(&sol.field, kappa, a.rho())?;
                    let d = sol.decomposition();
                    worst = worst.max(((f - d) / d).abs());
                    min_p0 = min_p0.min(sol.p0_term);
                }
            }
            let report = json!({
                "L": a.half_width(),
                "rho": a.rho(),
                "kappa": kappa,
                "value": min.value,
                "excess": min.excess,
                "mode": min.mode,
                "trials": trials,
                "max_decomposition_error": worst,
                "min_p0_term": if trials > 0 { Some(min_p0) } else { None },
            });
            if let Some(path) = s.get(output, "output")? {
                write_file(&path, &json_bytes(&report)?)?;
            }
            let mut summary = format!(
                "min = {:.12} (minus 2pi = {:.6e}) at n = {}",
                min.value, min.excess, min.mode
            );
            if trials > 0 {
                summary += &format!(", {trials} traces: max decomposition error = {worst:.3e}");
            }
            println!("{summary}");
        }
    }
    Ok(())
}

/// Coefficients decaying like `n^{-3/2}`, real mean in `[0, 1.5)`.
fn random_trace(rng: &mut ChaCha8Rng, order: usize) -> CliResult<BoundaryTrace> {
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
    Ok(BoundaryTrace::new(a0, a, b)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_classes_map_to_exit_codes() {
        let numeric = glcap::Error::NoConvergence {
            iterations: 3,
            residual: 1.0,
        };
        assert_eq!(CliError::from(numeric).code(), 1);
        assert_eq!(
            CliError::from(glcap::Error::SingularSystem { row: 0 }).code(),
            1
        );
        assert_eq!(
            CliError::from(glcap::Error::InvalidParameter("x".into())).code(),
            2
        );
        let io = std::io::Error::new(std::io::ErrorKind::NotFound, "gone");
        assert_eq!(CliError::from(glcap::Error::Io(io)).code(), 3);
    }

    #[test]
    fn step_and_kappa_parsing() {
        assert_eq!(parse_step("backtracking").unwrap(), StepRule::Backtracking);
        assert_eq!(parse_step("fixed:0.5").unwrap(), StepRule::Fixed(0.5));
        assert!(parse_step("fixed:").is_err());
        assert!(parse_step("newton").is_err());
        assert_eq!(parse_kappas("1, 2,5").unwrap(), [1.0, 2.0, 5.0]);
        assert!(parse_kappas("1,,2").is_err());
    }
}
