//! Discrete domain conditions of the generator.

use serde::Serialize;

use super::pressure::{interface_flux, solid_flux};
use super::{FsiState, ResolventData, ResolventSolver};
use crate::error::{FsiError, Result};

pub const TOL_GAMMA_F: f64 = 1e-12;
pub const TOL_TRACE: f64 = 1e-12;
pub const TOL_DIVERGENCE: f64 = 1e-10;
pub const TOL_FLUX: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainReport {
    /// Tolerances are multiplied by this (at least 1).
    pub scale: f64,
    pub checks: Vec<ConditionCheck>,
}

impl DomainReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn check(name: &str, residual: f64, tolerance: f64) -> ConditionCheck {
    ConditionCheck {
        name: name.to_string(),
        residual,
        tolerance,
        passed: residual.is_finite() && residual <= tolerance,
    }
}

/// Checks, on a resolvent solution:
/// - `gamma_f_noslip`: `u` vanishes on `Γ_f`;
/// - `interface_velocity`: `z = u` on `Γ_s`;
/// - `divergence`: `b(u, μ) = 0` for every pressure basis function;
/// - `interface_traction`: fluid and solid tractions agree on every interface basis trace.
///
/// Tolerances are relative to `max(1, max|u|, max|w|, max|z|, max|π|)`.
pub fn check_domain_conditions(
    solver: &ResolventSolver,
    state: &FsiState,
    pi: &[f64],
    data: &ResolventData,
) -> Result<DomainReport> {
    let space = &solver.space;
    if state.u.len() != space.n_velocity()
        || state.w.len() != space.n_solid()
        || state.z.len() != space.n_solid()
        || pi.len() != space.n_pressure()
    {
        return Err(FsiError::Contract(
            "state or pressure does not match the solver's space".into(),
        ));
    }
    let scale = pi.iter().fold(state.max_abs().max(1.0), |m, v| m.max(v.abs()));

    let gamma_f = space
        .gamma_f_dofs()
        .iter()
        .map(|&d| state.u[d].abs())
        .fold(0.0, f64::max);

    let trace = space
        .interface_fluid_dofs()
        .iter()
        .zip(space.interface_solid_dofs())
        .map(|(&f, &s)| (state.z[s] - state.u[f]).abs())
        .fold(0.0, f64::max);

    let divergence = solver
        .mats
        .divergence
        .mul_vec(&state.u)
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max);

    let ng = space.n_interface();
    let mut flux: f64 = 0.0;
    let mut e = vec![0.0; ng];
    for g in 0..ng {
        e[g] = 1.0;
        let ff = interface_flux(solver, state, pi, data, &e, None)?;
        let fs = solid_flux(solver, state, data, &e, None)?;
        flux = flux.max((ff - fs).abs());
        e[g] = 0.0;
    }

    Ok(DomainReport {
        scale,
        checks: vec![
            check("gamma_f_noslip", gamma_f, TOL_GAMMA_F * scale),
            check("interface_velocity", trace, TOL_TRACE * scale),
            check("divergence", divergence, TOL_DIVERGENCE * scale),
            check("interface_traction", flux, TOL_FLUX * scale),
        ],
    })
}
