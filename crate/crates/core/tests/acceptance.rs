//! Acceptance suite: one line per criterion, nonzero exit on any failure.

use std::time::{Duration, Instant};

use fsi_core::analysis::manufactured::{
    d2phi_printed, d3phi_printed, dphi_printed, phi_expanded, phi_printed, poly_derivative, ManufacturedCase,
};
use fsi_core::analysis::{convergence_study, infsup_dense, infsup_study, manufactured_case, verify_data_identity};
use fsi_core::fem::{build_space, MaterialParams};
use fsi_core::mesh::generate;
use fsi_core::semigroup::{energy_identity_check, evolve_with, EvolutionConfig, Stepper};
use fsi_core::solver::conditions::check_domain_conditions;
use fsi_core::solver::monolithic::monolithic_solve;
use fsi_core::solver::{FsiState, ResolventData, ResolventSolver};
use fsi_core::Result;

const ELEMENTS: [usize; 4] = [72, 288, 1152, 4608];
const HYPOTENUSE: [f64; 4] = [0.235702, 0.117851, 0.0589256, 0.0294628];
const MESH_TIME: Duration = Duration::from_secs(1);
const STUDY_TIME: Duration = Duration::from_secs(300);
const FLUID_RATE: (f64, f64) = (1.85, 2.10);
const RATE_SLACK: f64 = 0.05;
const REFERENCE_L0_FLUID_H1: f64 = 5.855e-8;
const MAGNITUDE_FACTOR: f64 = 100.0;
const PRESSURE_RATE_MIN: f64 = 2.0;
const SOLID_RATE_MIN: f64 = 3.0;
const INFSUP_SPREAD: f64 = 0.20;
const INFSUP_ORACLE_TOL: f64 = 1e-6;
const IDENTITY_SAMPLES: u64 = 50;
const IDENTITY_TOL: f64 = 1e-8;
const CONTRACTION_STATES: u64 = 10;
const CONTRACTION_STEPS: usize = 100;
const CONTRACTION_DT: f64 = 0.01;
const BALANCE_TOL: f64 = 1e-6;
const ORACLE_TOL: f64 = 1e-10;
const DATA_IDENTITY_TOL: f64 = 1e-12;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

fn round_sig(x: f64, digits: usize) -> f64 {
    format!("{:.*e}", digits - 1, x).parse().unwrap()
}

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let den = b.iter().map(|y| y.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    num / den
}

fn mesh_fidelity() -> Result<Verdict> {
    let start = Instant::now();
    let meshes = (0..4).map(generate).collect::<Result<Vec<_>>>()?;
    let elapsed = start.elapsed();
    let mut ok = elapsed < MESH_TIME;
    let mut detail = Vec::new();
    for (k, m) in meshes.iter().enumerate() {
        let h = round_sig(m.hypotenuse, 6);
        ok &= m.triangles.len() == ELEMENTS[k] && h == HYPOTENUSE[k];
        detail.push(format!("{}/{h}", m.triangles.len()));
    }
    Ok(verdict(
        ok,
        format!("elements/hypotenuse {} in {elapsed:.2?}", detail.join(", ")),
    ))
}

struct Study {
    report: fsi_core::analysis::ConvergenceReport,
    elapsed: Duration,
}

fn study() -> Result<Study> {
    let start = Instant::now();
    let report = convergence_study(&[0, 1, 2, 3], &MaterialParams::default())?;
    Ok(Study {
        report,
        elapsed: start.elapsed(),
    })
}

fn fluid_rates(s: &Study) -> Verdict {
    let rates: Vec<Option<f64>> = s.report.rates.iter().map(|r| r.fluid_h1).collect();
    let Some(all) = rates.iter().copied().collect::<Option<Vec<f64>>>() else {
        return verdict(false, format!("missing rates {rates:?}"));
    };
    let last = *all.last().unwrap();
    let in_band = (FLUID_RATE.0..=FLUID_RATE.1).contains(&last);
    let nondecreasing = all.windows(2).all(|w| w[1] >= w[0] - RATE_SLACK);
    let timely = s.elapsed < STUDY_TIME;
    verdict(
        s.report.all_succeeded() && in_band && nondecreasing && timely,
        format!(
            "H1 rates {} (last in [{}, {}]: {in_band}, nondecreasing: {nondecreasing}) in {:.2?}",
            all.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join(", "),
            FLUID_RATE.0,
            FLUID_RATE.1,
            s.elapsed
        ),
    )
}

fn magnitude(s: &Study) -> Verdict {
    match s.report.rows[0].norms {
        Some(n) => {
            let ratio = n.eu_h1 / REFERENCE_L0_FLUID_H1;
            verdict(
                (1.0 / MAGNITUDE_FACTOR..=MAGNITUDE_FACTOR).contains(&ratio),
                format!("level-0 fluid H1 error {:.4e}, ratio to reference {ratio:.3}", n.eu_h1),
            )
        }
        None => verdict(false, "level 0 failed".into()),
    }
}

fn auxiliary_rates(s: &Study) -> Verdict {
    let last = s.report.rates.last().unwrap();
    let p = last.pressure_l2.unwrap_or(f64::NAN);
    let w = last.solid_h1.unwrap_or(f64::NAN);
    let norms: Vec<_> = s.report.rows.iter().filter_map(|r| r.norms).collect();
    let columns: [fn(&fsi_core::analysis::ErrorNorms) -> f64; 5] = [
        |n| n.eu_h1,
        |n| n.epi_l2,
        |n| n.ew_energy,
        |n| n.eu_eps,
        |n| n.ew_h1_full,
    ];
    let decreasing = norms.len() == 4 && columns.iter().all(|c| norms.windows(2).all(|w| c(&w[1]) < c(&w[0])));
    verdict(
        p >= PRESSURE_RATE_MIN && w >= SOLID_RATE_MIN && decreasing,
        format!("final pressure rate {p:.3}, solid rate {w:.3}, columns strictly decreasing: {decreasing}"),
    )
}

fn infsup() -> Result<Verdict> {
    let report = infsup_study(&[0, 1, 2, 3])?;
    let dense = infsup_dense(&build_space(&generate(0)?))?;
    let diff = (report.rows[0].beta - dense).abs();
    let betas: Vec<String> = report.rows.iter().map(|r| format!("{:.5}", r.beta)).collect();
    Ok(verdict(
        report.all_positive() && report.spread() <= INFSUP_SPREAD && diff <= INFSUP_ORACLE_TOL,
        format!(
            "beta {} spread {:.4}, level-0 vs dense {diff:.1e}",
            betas.join(", "),
            report.spread()
        ),
    ))
}

fn dissipativity() -> Result<Verdict> {
    let space = build_space(&generate(1)?);
    let solver = ResolventSolver::new(&space, &MaterialParams::default())?;
    let mut worst = 0.0f64;
    let mut max_ayy = f64::NEG_INFINITY;
    for seed in 0..IDENTITY_SAMPLES {
        let id = energy_identity_check(&solver, &ResolventData::random(&space, &solver.mats, seed))?;
        worst = worst.max(id.residual / id.strain.max(1.0));
        max_ayy = max_ayy.max(id.a_yy);
    }
    Ok(verdict(
        worst <= IDENTITY_TOL && max_ayy <= 0.0,
        format!("{IDENTITY_SAMPLES} data at level 1: worst scaled residual {worst:.2e}, max (AY,Y) {max_ayy:.3e}"),
    ))
}

fn contraction() -> Result<Verdict> {
    let space = build_space(&generate(1)?);
    let params = MaterialParams::default();
    let cfg = EvolutionConfig::new(
        CONTRACTION_DT * CONTRACTION_STEPS as f64,
        CONTRACTION_STEPS,
        CONTRACTION_STEPS,
    )?;
    let stepper = Stepper::new(&space, &params, cfg.dt())?;
    let mut monotone = true;
    let mut worst = 0.0f64;
    let mut viscous_share = f64::INFINITY;
    for seed in 0..CONTRACTION_STATES {
        let (trace, _) = evolve_with(&stepper, &FsiState::random(&space, seed), &cfg)?;
        monotone &= trace.is_monotone(0.0);
        worst = worst.max(trace.balance_residual());
        viscous_share = viscous_share.min(trace.cumulative_dissipation() / trace.energy_drop());
    }
    Ok(verdict(
        monotone && worst <= BALANCE_TOL,
        format!(
            "{CONTRACTION_STATES} states x {CONTRACTION_STEPS} steps: monotone {monotone}, balance {worst:.2e}, viscous share >= {viscous_share:.3}"
        ),
    ))
}

fn oracle() -> Result<Verdict> {
    let space = build_space(&generate(0)?);
    let params = MaterialParams::default();
    let solver = ResolventSolver::new(&space, &params)?;
    let mut worst = [0.0f64; 3];
    for seed in 0..5 {
        let data = ResolventData::random(&space, &solver.mats, seed);
        let sol = solver.solve(&data)?;
        let mono = monolithic_solve(&space, &params, &data)?;
        let pi = mono.pi.clone().unwrap_or_default();
        worst[0] = worst[0].max(rel_diff(&sol.state.u, &mono.u));
        worst[1] = worst[1].max(rel_diff(&sol.pressure, &pi));
        worst[2] = worst[2].max(rel_diff(&sol.state.w, &mono.w));
    }
    Ok(verdict(
        worst.iter().all(|&d| d <= ORACLE_TOL),
        format!("u {:.1e}, pi {:.1e}, w {:.1e}", worst[0], worst[1], worst[2]),
    ))
}

fn domain_conditions() -> Result<Verdict> {
    let case = manufactured_case(1.0)?;
    let mut ok = true;
    let mut worst = [0.0f64; 4];
    let mut solves = 0;
    for level in 0..=2 {
        let space = build_space(&generate(level)?);
        for lam in [0.1, 1.0, 10.0] {
            let solver = ResolventSolver::new(&space, &MaterialParams::default().with_shift(lam))?;
            let mut data_sets = vec![ResolventData::from_function(&space, |x, y| case.data(x, y))];
            data_sets.extend((0..2).map(|s| ResolventData::random(&space, &solver.mats, s)));
            for data in &data_sets {
                let sol = solver.solve(data)?;
                let rep = check_domain_conditions(&solver, &sol.state, &sol.pressure, data)?;
                ok &= rep.all_passed();
                for (w, c) in worst.iter_mut().zip(&rep.checks) {
                    *w = w.max(c.residual / rep.scale);
                }
                solves += 1;
            }
        }
    }
    Ok(verdict(
        ok,
        format!(
            "{solves} solves: no-slip {:.1e}, interface velocity {:.1e}, divergence {:.1e}, traction {:.1e} (scaled)",
            worst[0], worst[1], worst[2], worst[3]
        ),
    ))
}

fn manufactured_integrity() -> Result<Verdict> {
    let identity = verify_data_identity(&manufactured_case(1.0)?);
    let printed = [phi_printed(), dphi_printed(), d2phi_printed(), d3phi_printed()];
    let mut formal = phi_expanded();
    let mut lists_ok = formal == printed[0];
    for p in &printed[1..] {
        formal = poly_derivative(&formal);
        lists_ok &= &formal == p;
    }
    let checked = ManufacturedCase::from_printed(1.0, &printed[0], &printed[1], &printed[2], &printed[3]);
    Ok(verdict(
        identity.relative <= DATA_IDENTITY_TOL && lists_ok && checked.is_ok(),
        format!(
            "data identity {:.1e} (relative), printed lists exact: {lists_ok}",
            identity.relative
        ),
    ))
}

fn main() {
    let study = study().map_err(|e| e.to_string());
    let on_study = |f: fn(&Study) -> Verdict| study.as_ref().map(f).map_err(|e| e.clone());
    let own = |r: Result<Verdict>| r.map_err(|e| e.to_string());
    let results: Vec<std::result::Result<Verdict, String>> = vec![
        own(mesh_fidelity()),
        on_study(fluid_rates),
        on_study(magnitude),
        on_study(auxiliary_rates),
        own(infsup()),
        own(dissipativity()),
        own(contraction()),
        own(oracle()),
        own(domain_conditions()),
        own(manufactured_integrity()),
    ];
    let mut failures = 0;
    for (k, r) in results.into_iter().enumerate() {
        let (passed, detail) = match r {
            Ok(v) => (v.passed, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failures += 1;
        }
        println!("criterion {}: {} {detail}", k + 1, if passed { "PASS" } else { "FAIL" });
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}
