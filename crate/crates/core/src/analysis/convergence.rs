//! Convergence study over a sequence of mesh levels.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::manufactured::{manufactured_case, ManufacturedCase};
use super::norms::{error_norms, ErrorNorms};
use crate::error::{FsiError, Result};
use crate::fem::{assemble, build_space, interpolate, FieldTarget, MaterialParams};
use crate::mesh::{generate, hypotenuse_length};
use crate::solver::{FsiState, ResolventData, ResolventSolver};

/// Errors below this floor get no rate.
pub const RATE_FLOOR: f64 = 1e-15;

/// How the discrete state of each level is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StudyMode {
    /// Full resolvent solve.
    Solve,
    /// Nodal interpolant of the exact solution, no solve.
    Interpolant,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub level: u32,
    pub elements: usize,
    pub hypotenuse: f64,
    pub norms: Option<ErrorNorms>,
    pub failure: Option<String>,
}

/// Rates between two rows; `None` where an error is below the floor or a
/// level failed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateRow {
    pub coarse: u32,
    pub fine: u32,
    pub fluid_h1: Option<f64>,
    pub pressure_l2: Option<f64>,
    pub solid_h1: Option<f64>,
    pub fluid_eps: Option<f64>,
    pub solid_h1_full: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub params: MaterialParams,
    pub rows: Vec<ConvergenceRow>,
    pub rates: Vec<RateRow>,
}

/// `log(e_c / e_f) / (log 2 · (fine − coarse))`.
pub fn rate(coarse_err: f64, fine_err: f64, levels_apart: u32) -> Option<f64> {
    if coarse_err > RATE_FLOOR && fine_err > RATE_FLOOR && levels_apart > 0 {
        Some((coarse_err / fine_err).ln() / (std::f64::consts::LN_2 * levels_apart as f64))
    } else {
        None
    }
}

/// Rates between adjacent rows.
pub fn compute_rates(rows: &[(u32, Option<ErrorNorms>)]) -> Vec<RateRow> {
    rows.windows(2)
        .map(|p| {
            let (c, f) = (p[0].0, p[1].0);
            let r = |g: fn(&ErrorNorms) -> f64| match (&p[0].1, &p[1].1) {
                (Some(a), Some(b)) => rate(g(a), g(b), f.saturating_sub(c)),
                _ => None,
            };
            RateRow {
                coarse: c,
                fine: f,
                fluid_h1: r(|n| n.eu_h1),
                pressure_l2: r(|n| n.epi_l2),
                solid_h1: r(|n| n.ew_energy),
                fluid_eps: r(|n| n.eu_eps),
                solid_h1_full: r(|n| n.ew_h1_full),
            }
        })
        .collect()
}

fn run_level(level: u32, params: &MaterialParams, case: &ManufacturedCase, mode: StudyMode) -> Result<ErrorNorms> {
    let mesh = generate(level)?;
    let space = build_space(&mesh);
    match mode {
        StudyMode::Solve => {
            let solver = ResolventSolver::new(&space, params)?;
            let data = ResolventData::from_function(&space, |x, y| case.data(x, y));
            let sol = solver.solve(&data)?;
            error_norms(&space, &sol.state, &sol.pressure, case, &solver.mats)
        }
        StudyMode::Interpolant => {
            let mats = assemble(&space, params);
            let mut state = FsiState::zeros(&space);
            state.u = interpolate(&space, FieldTarget::Velocity, |x, y| case.velocity(x, y));
            let pi = vec![0.0; space.n_pressure()];
            error_norms(&space, &state, &pi, case, &mats)
        }
    }
}

/// Solves the manufactured problem on every level and tabulates errors
/// and rates.
pub fn convergence_study(levels: &[u32], params: &MaterialParams) -> Result<ConvergenceReport> {
    convergence_study_with(levels, params, StudyMode::Solve)
}

/// As [`convergence_study`]; a level that fails is recorded in its row and
/// the remaining levels still run.
pub fn convergence_study_with(levels: &[u32], params: &MaterialParams, mode: StudyMode) -> Result<ConvergenceReport> {
    params.validate()?;
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(FsiError::InvalidParams(format!(
            "levels must be strictly ascending, got {levels:?}"
        )));
    }
    let case = manufactured_case(params.shift)?;
    let rows: Vec<ConvergenceRow> = levels
        .par_iter()
        .map(|&level| {
            let out = run_level(level, params, &case, mode);
            let elements = crate::mesh::cells_per_side(level)
                .and_then(|n| n.checked_mul(n)?.checked_mul(2))
                .unwrap_or(0);
            ConvergenceRow {
                level,
                elements,
                hypotenuse: hypotenuse_length(level),
                norms: out.as_ref().ok().copied(),
                failure: out.err().map(|e| {
                    FsiError::Level {
                        level,
                        source: Box::new(e),
                    }
                    .to_string()
                }),
            }
        })
        .collect();
    let keyed: Vec<_> = rows.iter().map(|r| (r.level, r.norms)).collect();
    Ok(ConvergenceReport {
        params: *params,
        rates: compute_rates(&keyed),
        rows,
    })
}

pub const CONVERGENCE_HEADER: &str = "level,elements,hypotenuse,eu_h1,epi_l2,ew_h1,eu_eps,ew_h1_full,status";
pub const RATES_HEADER: &str = "meshes,fluid_h1,pressure_l2,solid_h1,fluid_eps,solid_h1_full";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "\u{2014}".to_string(), |x| format!("{x:e}"))
}

impl ConvergenceReport {
    pub fn all_succeeded(&self) -> bool {
        self.rows.iter().all(|r| r.norms.is_some())
    }

    pub fn convergence_csv(&self) -> String {
        let mut s = String::from(CONVERGENCE_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = write!(s, "{},{},{:e},", r.level, r.elements, r.hypotenuse);
            match (&r.norms, &r.failure) {
                (Some(n), _) => {
                    let _ = writeln!(
                        s,
                        "{:e},{:e},{:e},{:e},{:e},ok",
                        n.eu_h1, n.epi_l2, n.ew_energy, n.eu_eps, n.ew_h1_full
                    );
                }
                (None, f) => {
                    let msg = f.as_deref().unwrap_or("failed").replace([',', '\n'], ";");
                    let _ = writeln!(s, ",,,,,failed: {msg}");
                }
            }
        }
        s
    }

    pub fn rates_csv(&self) -> String {
        let mut s = String::from(RATES_HEADER);
        s.push('\n');
        for r in &self.rates {
            let _ = writeln!(
                s,
                "{}/{},{},{},{},{},{}",
                r.coarse + 1,
                r.fine + 1,
                opt(r.fluid_h1),
                opt(r.pressure_l2),
                opt(r.solid_h1),
                opt(r.fluid_eps),
                opt(r.solid_h1_full)
            );
        }
        s
    }

    /// Writes `convergence.csv` and `rates.csv` into `dir`.
    pub fn write_csv(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| FsiError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let a = dir.join("convergence.csv");
        let b = dir.join("rates.csv");
        std::fs::write(&a, self.convergence_csv()).map_err(io(&a))?;
        std::fs::write(&b, self.rates_csv()).map_err(io(&b))?;
        Ok(vec![a, b])
    }
}

/// Parses `convergence.csv` back into `(level, norms)` rows.
pub fn parse_convergence_csv(text: &str) -> Result<Vec<(u32, Option<ErrorNorms>)>> {
    let err = |line: usize, reason: String| FsiError::Parse {
        path: PathBuf::from("convergence.csv"),
        line,
        reason,
    };
    let mut lines = text.lines().enumerate();
    if lines.next().map(|(_, l)| l) != Some(CONVERGENCE_HEADER) {
        return Err(err(1, "unexpected header".into()));
    }
    lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 9 {
                return Err(err(i + 1, format!("expected 9 fields, found {}", f.len())));
            }
            let level = f[0].parse().map_err(|_| err(i + 1, format!("bad level {:?}", f[0])))?;
            if f[8] != "ok" {
                return Ok((level, None));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| err(i + 1, format!("bad number {s:?}")));
            Ok((
                level,
                Some(ErrorNorms {
                    eu_h1: num(f[3])?,
                    epi_l2: num(f[4])?,
                    ew_energy: num(f[5])?,
                    eu_eps: num(f[6])?,
                    ew_h1_full: num(f[7])?,
                }),
            ))
        })
        .collect()
}
