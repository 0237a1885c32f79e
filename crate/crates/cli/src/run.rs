//! Mode dispatch.

use std::fmt::Write as _;
use std::path::PathBuf;

use fsi_core::analysis::{convergence_study, infsup_study, kernel_coercivity, manufactured_case, verify_data_identity};
use fsi_core::fem::build_space;
use fsi_core::mesh::generate;
use fsi_core::semigroup::{energy_identity_check, evolve, EvolutionConfig};
use fsi_core::solver::conditions::check_domain_conditions;
use fsi_core::solver::export::{write_json, write_state_csv};
use fsi_core::solver::monolithic::monolithic_solve;
use fsi_core::solver::pressure::{decompose_pressure, recover_c0};
use fsi_core::solver::{FsiState, ResolventData, ResolventSolver};
use fsi_core::{FsiError, Result};

use crate::config::{Mode, RunConfig};

pub const IDENTITY_SAMPLES: usize = 50;
pub const IDENTITY_TOL: f64 = 1e-8;
pub const COERCIVITY_SAMPLES: usize = 100;
pub const ORACLE_TOL: f64 = 1e-10;
pub const DATA_IDENTITY_TOL: f64 = 1e-12;
pub const BALANCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: String,
    pub passed: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, measured: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            tolerance: format!("<= {tol:.0e}"),
            passed: measured.is_finite() && measured <= tol,
        }
    }

    fn positive(name: impl Into<String>, measured: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            tolerance: "> 0".into(),
            passed: measured > 0.0,
        }
    }
}

/// Report text, checks and files written by one run.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub report: String,
    pub checks: Vec<Check>,
    pub artifacts: Vec<PathBuf>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn table(&mut self) {
        let _ = writeln!(
            self.report,
            "{:<34} {:>12} {:>10}  status",
            "check", "measured", "tolerance"
        );
        for c in &self.checks {
            let _ = writeln!(
                self.report,
                "{:<34} {:>12.3e} {:>10}  {}",
                c.name,
                c.measured,
                c.tolerance,
                if c.passed { "pass" } else { "FAIL" }
            );
        }
        let verdict = if self.passed() {
            "all checks passed"
        } else {
            "some checks FAILED"
        };
        let _ = writeln!(self.report, "{verdict}");
    }
}

fn create_out(cfg: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.out_dir).map_err(|source| FsiError::Io {
        path: cfg.out_dir.clone(),
        source,
    })
}

fn write_text(path: PathBuf, text: &str, out: &mut Outcome) -> Result<()> {
    std::fs::write(&path, text).map_err(|source| FsiError::Io {
        path: path.clone(),
        source,
    })?;
    out.artifacts.push(path);
    Ok(())
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    create_out(cfg)?;
    let mut out = Outcome::default();
    let _ = writeln!(
        out.report,
        "mode {} levels {:?} lambda {} lame_lambda {} mu {} seed {}",
        cfg.mode.name(),
        cfg.levels,
        cfg.params.shift,
        cfg.params.lame_lambda,
        cfg.params.lame_mu,
        cfg.seed
    );
    match cfg.mode {
        Mode::Resolvent => resolvent(cfg, &mut out)?,
        Mode::Convergence => convergence(cfg, &mut out)?,
        Mode::Infsup => infsup(cfg, &mut out)?,
        Mode::Evolve => evolution(cfg, &mut out)?,
        Mode::Certify => certify(cfg, &mut out)?,
    }
    out.table();
    Ok(out)
}

fn resolvent(cfg: &RunConfig, out: &mut Outcome) -> Result<()> {
    let case = manufactured_case(cfg.params.shift)?;
    for &level in &cfg.levels {
        let space = build_space(&generate(level)?);
        let solver = ResolventSolver::new(&space, &cfg.params)?;
        let data = ResolventData::from_function(&space, |x, y| case.data(x, y));
        let sol = solver.solve(&data)?;
        let report = check_domain_conditions(&solver, &sol.state, &sol.pressure, &data)?;
        let (q0, c0) = decompose_pressure(&space, &sol.pressure);
        let c0_flux = recover_c0(&solver, &sol.state, &sol.pressure, &q0, &data)?;
        let _ = writeln!(
            out.report,
            "level {level}: saddle residual {:.3e}, c0 {:.6e}, c0 from interface tractions {:.6e}",
            sol.report.relative_residual, c0, c0_flux
        );
        out.checks.push(Check::at_most(
            format!("L{level} solve residual"),
            sol.report.relative_residual,
            fsi_core::sparse::SOLVE_TOLERANCE,
        ));
        for c in &report.checks {
            out.checks.push(Check {
                name: format!("L{level} {}", c.name),
                measured: c.residual,
                tolerance: format!("<= {:.2e}", c.tolerance),
                passed: c.passed,
            });
        }
        let state_path = cfg.out_dir.join(format!("state_L{level}.csv"));
        write_state_csv(&sol.state, &state_path)?;
        out.artifacts.push(state_path);
        let report_path = cfg.out_dir.join(format!("domain_L{level}.json"));
        write_json(&report, &report_path)?;
        out.artifacts.push(report_path);
    }
    Ok(())
}

fn convergence(cfg: &RunConfig, out: &mut Outcome) -> Result<()> {
    let case = manufactured_case(cfg.params.shift)?;
    let identity = verify_data_identity(&case);
    out.checks.push(Check::at_most(
        "data identity (relative)",
        identity.relative,
        DATA_IDENTITY_TOL,
    ));
    let report = convergence_study(&cfg.levels, &cfg.params)?;
    out.report.push_str(&report.convergence_csv());
    out.report.push_str(&report.rates_csv());
    for row in &report.rows {
        out.checks.push(Check {
            name: format!("L{} solved", row.level),
            measured: row.norms.map_or(f64::NAN, |n| n.eu_h1),
            tolerance: "finite".into(),
            passed: row.norms.is_some(),
        });
    }
    out.artifacts.extend(report.write_csv(&cfg.out_dir)?);
    Ok(())
}

fn infsup(cfg: &RunConfig, out: &mut Outcome) -> Result<()> {
    let report = infsup_study(&cfg.levels)?;
    out.report.push_str(&report.csv());
    let _ = writeln!(
        out.report,
        "velocity gram: {}; spread {:.4}",
        report.gram,
        report.spread()
    );
    for r in &report.rows {
        out.checks.push(Check::positive(format!("L{} beta_h", r.level), r.beta));
    }
    out.artifacts.push(report.write_csv(&cfg.out_dir)?);
    Ok(())
}

fn evolution(cfg: &RunConfig, out: &mut Outcome) -> Result<()> {
    let level = cfg.levels[0];
    let space = build_space(&generate(level)?);
    let initial = FsiState::random(&space, cfg.seed);
    let ec = EvolutionConfig::new(cfg.t_final, cfg.n_steps, 1)?;
    let (trace, _) = evolve(&space, &cfg.params, &initial, &ec)?;
    let path = cfg.out_dir.join("energy.csv");
    trace.write_csv(&path)?;
    out.artifacts.push(path);
    let _ = writeln!(
        out.report,
        "E(0)^2 {:.6e}  E(T)^2 {:.6e}  viscous {:.6e}  numerical {:.6e}",
        trace.energies[0],
        trace.energies[trace.energies.len() - 1],
        trace.cumulative_dissipation(),
        trace.cumulative_numerical_dissipation()
    );
    let worst_increase = trace
        .energies
        .windows(2)
        .map(|w| (w[1].sqrt() - w[0].sqrt()) / w[0].sqrt().max(f64::MIN_POSITIVE))
        .fold(f64::NEG_INFINITY, f64::max);
    out.checks.push(Check {
        name: "H-norm nonincreasing".into(),
        measured: worst_increase,
        tolerance: "<= 1e-12".into(),
        passed: trace.is_monotone(1e-12),
    });
    out.checks.push(Check::at_most(
        "energy balance (relative)",
        trace.balance_residual(),
        BALANCE_TOL,
    ));
    Ok(())
}

/// `‖a − b‖_∞ / max(‖b‖_∞, tiny)`.
fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let den = b.iter().map(|y| y.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    num / den
}

fn certify(cfg: &RunConfig, out: &mut Outcome) -> Result<()> {
    let level = cfg.levels[0];
    let space = build_space(&generate(level)?);
    let solver = ResolventSolver::new(&space, &cfg.params)?;

    let mut worst = 0.0f64;
    let mut max_ayy = f64::NEG_INFINITY;
    for k in 0..IDENTITY_SAMPLES {
        let data = ResolventData::random(&space, &solver.mats, cfg.seed.wrapping_mul(1000).wrapping_add(k as u64));
        let id = energy_identity_check(&solver, &data)?;
        worst = worst.max(id.residual / id.strain.max(1.0));
        max_ayy = max_ayy.max(id.a_yy);
    }
    out.checks.push(Check::at_most(
        format!("L{level} energy identity ({IDENTITY_SAMPLES} data)"),
        worst,
        IDENTITY_TOL,
    ));
    out.checks.push(Check {
        name: format!("L{level} (AY,Y)_H max"),
        measured: max_ayy,
        tolerance: "<= 0".into(),
        passed: max_ayy <= 0.0,
    });

    let kc = kernel_coercivity(&solver, COERCIVITY_SAMPLES, cfg.seed)?;
    out.checks
        .push(Check::positive(format!("L{level} Korn constant alpha"), kc.alpha));
    out.checks.push(Check {
        name: format!("L{level} a_lambda - |eps|^2 (min rel)"),
        measured: kc.min_excess,
        tolerance: ">= -1e-12".into(),
        passed: kc.min_excess >= -1e-12,
    });
    out.checks.push(Check {
        name: format!("L{level} |eps|^2 / (alpha |.|_1^2) min"),
        measured: kc.min_korn_ratio,
        tolerance: ">= 1".into(),
        passed: kc.min_korn_ratio >= 1.0 - 1e-8,
    });
    out.checks.push(Check::at_most(
        format!("L{level} kernel samples |B phi|"),
        kc.max_divergence,
        1e-10,
    ));

    let space0 = build_space(&generate(0)?);
    let solver0 = ResolventSolver::new(&space0, &cfg.params)?;
    let data0 = ResolventData::random(&space0, &solver0.mats, cfg.seed);
    let schur = solver0.solve(&data0)?;
    let dense = monolithic_solve(&space0, &cfg.params, &data0)?;
    let dense_pi = dense.pi.clone().unwrap_or_default();
    out.checks.push(Check::at_most(
        "L0 oracle u",
        rel_diff(&schur.state.u, &dense.u),
        ORACLE_TOL,
    ));
    out.checks.push(Check::at_most(
        "L0 oracle pi",
        rel_diff(&schur.pressure, &dense_pi),
        ORACLE_TOL,
    ));
    out.checks.push(Check::at_most(
        "L0 oracle w",
        rel_diff(&schur.state.w, &dense.w),
        ORACLE_TOL,
    ));
    let report = check_domain_conditions(&solver0, &schur.state, &schur.pressure, &data0)?;
    for c in &report.checks {
        out.checks.push(Check {
            name: format!("L0 {}", c.name),
            measured: c.residual,
            tolerance: format!("<= {:.2e}", c.tolerance),
            passed: c.passed,
        });
    }
    let mut text = String::new();
    for c in &out.checks {
        let _ = writeln!(text, "{},{:e},{},{}", c.name, c.measured, c.tolerance, c.passed);
    }
    write_text(
        cfg.out_dir.join("certify.csv"),
        &format!("check,measured,tolerance,passed\n{text}"),
        out,
    )
}
