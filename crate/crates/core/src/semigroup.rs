//! Backward-Euler evolution `Y_k = (I − dt 𝒜_h)⁻¹ Y_{k−1}` and the energy
//! bookkeeping of the contraction semigroup.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{FsiError, Result};
use crate::fem::{GlobalMatrices, MaterialParams, TaylorHoodSpace};
use crate::solver::{FsiState, ResolventData, ResolventSolver};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolutionConfig {
    pub t_final: f64,
    pub n_steps: usize,
    pub record_every: usize,
}

impl EvolutionConfig {
    pub fn new(t_final: f64, n_steps: usize, record_every: usize) -> Result<Self> {
        if !(t_final.is_finite() && t_final > 0.0) || n_steps == 0 || record_every == 0 {
            return Err(FsiError::InvalidParams(format!(
                "evolution needs t_final > 0, n_steps > 0, record_every > 0 (got {t_final}, {n_steps}, {record_every})"
            )));
        }
        Ok(EvolutionConfig {
            t_final,
            n_steps,
            record_every,
        })
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.n_steps as f64
    }
}

/// Squared energy components of a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyParts {
    /// `‖u‖²_{0,Ω_f}`
    pub fluid: f64,
    /// `(σ(w), ε(w)) + ‖w‖²_{0,Ω_s}`
    pub solid_potential: f64,
    /// `‖z‖²_{0,Ω_s}`
    pub solid_kinetic: f64,
}

impl EnergyParts {
    pub fn total(&self) -> f64 {
        self.fluid + self.solid_potential + self.solid_kinetic
    }
}

pub fn energy_parts(mats: &GlobalMatrices, state: &FsiState) -> EnergyParts {
    EnergyParts {
        fluid: mats.fluid_mass.bilinear(&state.u, &state.u),
        solid_potential: mats.solid_stiffness.bilinear(&state.w, &state.w)
            + mats.solid_mass.bilinear(&state.w, &state.w),
        solid_kinetic: mats.solid_mass.bilinear(&state.z, &state.z),
    }
}

/// `(a, b)_H`
pub fn h_inner(mats: &GlobalMatrices, a: &FsiState, b: &FsiState) -> f64 {
    mats.fluid_mass.bilinear(&a.u, &b.u)
        + mats.solid_stiffness.bilinear(&a.w, &b.w)
        + mats.solid_mass.bilinear(&a.w, &b.w)
        + mats.solid_mass.bilinear(&a.z, &b.z)
}

/// `‖Y‖_H`
pub fn h_norm(mats: &GlobalMatrices, state: &FsiState) -> f64 {
    energy_parts(mats, state).total().max(0.0).sqrt()
}

/// Same as [`h_norm`], assembling the matrices for `space`.
pub fn h_norm_of(space: &TaylorHoodSpace, params: &MaterialParams, state: &FsiState) -> f64 {
    h_norm(&crate::fem::assemble(space, params), state)
}

/// `‖ε(u)‖²_{0,Ω_f}`
pub fn strain_energy(mats: &GlobalMatrices, u: &[f64]) -> f64 {
    mats.fluid_strain.bilinear(u, u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyRow {
    pub step: usize,
    pub time: f64,
    pub e_total: f64,
    pub e_fluid: f64,
    pub e_solid_potential: f64,
    pub e_solid_kinetic: f64,
    /// `‖ε(u_k)‖²_{0,Ω_f}`
    pub dissipation: f64,
}

impl EnergyRow {
    fn new(step: usize, time: f64, parts: EnergyParts, dissipation: f64) -> Self {
        EnergyRow {
            step,
            time,
            e_total: parts.total(),
            e_fluid: parts.fluid,
            e_solid_potential: parts.solid_potential,
            e_solid_kinetic: parts.solid_kinetic,
            dissipation,
        }
    }
}

/// Recorded energies plus the full per-step balance terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyTrace {
    pub dt: f64,
    pub rows: Vec<EnergyRow>,
    /// `‖Y_k‖²_H` for every step `k = 0..=n`.
    pub energies: Vec<f64>,
    /// `2 dt ‖ε(u_k)‖²` for every step `k = 1..=n`.
    pub viscous: Vec<f64>,
    /// `‖Y_k − Y_{k−1}‖²_H` for every step `k = 1..=n`.
    pub numerical: Vec<f64>,
}

impl EnergyTrace {
    /// `Σ 2 dt ‖ε(u_k)‖²`
    pub fn cumulative_dissipation(&self) -> f64 {
        self.viscous.iter().sum()
    }

    pub fn cumulative_numerical_dissipation(&self) -> f64 {
        self.numerical.iter().sum()
    }

    /// `E(0)² − E(T)²`
    pub fn energy_drop(&self) -> f64 {
        self.energies.first().copied().unwrap_or(0.0) - self.energies.last().copied().unwrap_or(0.0)
    }

    /// `|E(0)² − E(T)² − Σ(2dt‖ε(u_k)‖² + ‖Y_k − Y_{k−1}‖²)|` relative to
    /// `max(E(0)², tiny)`.
    pub fn balance_residual(&self) -> f64 {
        let lhs = self.energy_drop();
        let rhs = self.cumulative_dissipation() + self.cumulative_numerical_dissipation();
        let scale = self.energies.first().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
        (lhs - rhs).abs() / scale
    }

    /// H-norms are nonincreasing, up to `rel_tol · ‖Y_{k−1}‖`.
    pub fn is_monotone(&self, rel_tol: f64) -> bool {
        self.energies
            .windows(2)
            .all(|w| w[1].max(0.0).sqrt() <= w[0].max(0.0).sqrt() * (1.0 + rel_tol))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let err = |source| FsiError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut f = BufWriter::new(File::create(path).map_err(err)?);
        writeln!(
            f,
            "step,time,E_total,E_fluid,E_solid_potential,E_solid_kinetic,dissipation"
        )
        .map_err(err)?;
        for r in &self.rows {
            writeln!(
                f,
                "{},{:?},{:?},{:?},{:?},{:?},{:?}",
                r.step, r.time, r.e_total, r.e_fluid, r.e_solid_potential, r.e_solid_kinetic, r.dissipation
            )
            .map_err(err)?;
        }
        f.flush().map_err(err)
    }
}

/// Backward-Euler stepper with one factorization for a fixed `dt`.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub solver: ResolventSolver,
}

impl Stepper {
    pub fn new(space: &TaylorHoodSpace, params: &MaterialParams, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(FsiError::InvalidParams(format!("time step must be > 0, got {dt}")));
        }
        Ok(Stepper {
            solver: ResolventSolver::new(space, &params.with_shift(1.0 / dt))?,
        })
    }

    pub fn from_solver(solver: ResolventSolver) -> Self {
        Stepper { solver }
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.solver.shift()
    }

    /// Solves `(λI − 𝒜_h) Y' = λY` with `λ = 1/dt`; returns the new state
    /// (its pressure attached) and `‖ε(u')‖²`.
    pub fn step(&self, state: &FsiState) -> Result<(FsiState, f64)> {
        let lam = self.solver.shift();
        let data = ResolventData::from_state(&self.solver.mats, state, lam);
        let sol = self.solver.solve(&data)?;
        let eps = strain_energy(&self.solver.mats, &sol.state.u);
        Ok((sol.state, eps))
    }
}

/// Runs `n_steps` backward-Euler steps from `initial`.
pub fn evolve(
    space: &TaylorHoodSpace,
    params: &MaterialParams,
    initial: &FsiState,
    config: &EvolutionConfig,
) -> Result<(EnergyTrace, FsiState)> {
    let stepper = Stepper::new(space, params, config.dt())?;
    evolve_with(&stepper, initial, config)
}

pub fn evolve_with(stepper: &Stepper, initial: &FsiState, config: &EvolutionConfig) -> Result<(EnergyTrace, FsiState)> {
    let mats = &stepper.solver.mats;
    let dt = config.dt();
    let p0 = energy_parts(mats, initial);
    let mut trace = EnergyTrace {
        dt,
        rows: vec![EnergyRow::new(0, 0.0, p0, strain_energy(mats, &initial.u))],
        energies: vec![p0.total()],
        viscous: Vec::with_capacity(config.n_steps),
        numerical: Vec::with_capacity(config.n_steps),
    };
    let mut state = initial.clone();
    for k in 1..=config.n_steps {
        let (next, eps) = stepper.step(&state)?;
        let diff = FsiState {
            u: next.u.iter().zip(&state.u).map(|(a, b)| a - b).collect(),
            w: next.w.iter().zip(&state.w).map(|(a, b)| a - b).collect(),
            z: next.z.iter().zip(&state.z).map(|(a, b)| a - b).collect(),
            pi: None,
        };
        let parts = energy_parts(mats, &next);
        trace.energies.push(parts.total());
        trace.viscous.push(2.0 * dt * eps);
        trace.numerical.push(energy_parts(mats, &diff).total());
        if k % config.record_every == 0 || k == config.n_steps {
            trace.rows.push(EnergyRow::new(k, k as f64 * dt, parts, eps));
        }
        state = next;
    }
    Ok((trace, state))
}

/// Outcome of the dissipativity check for one right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyIdentity {
    /// `(𝒜_h Y, Y)_H = (λY − Y*, Y)_H`
    pub a_yy: f64,
    /// `‖ε(u_h)‖²_{0,Ω_f}`
    pub strain: f64,
    /// `|(𝒜_h Y, Y)_H + ‖ε(u_h)‖²|`
    pub residual: f64,
}

impl EnergyIdentity {
    pub fn passes(&self, tol: f64) -> bool {
        self.residual <= tol * self.strain.max(1.0) && self.a_yy <= 0.0
    }
}

/// Solves the resolvent for `Y*` and compares `(𝒜_h Y, Y)_H` against
/// `−‖ε(u_h)‖²`.
pub fn energy_identity_check(solver: &ResolventSolver, data: &ResolventData) -> Result<EnergyIdentity> {
    let sol = solver.solve(data)?;
    let y = &sol.state;
    let mats = &solver.mats;
    let lam = solver.shift();
    let data_dot_y = data.fluid_load.iter().zip(&y.u).map(|(a, b)| a * b).sum::<f64>()
        + mats.solid_stiffness.bilinear(&data.w_star, &y.w)
        + mats.solid_mass.bilinear(&data.w_star, &y.w)
        + mats.solid_mass.bilinear(&data.z_star, &y.z);
    let a_yy = lam * h_inner(mats, y, y) - data_dot_y;
    let strain = strain_energy(mats, &y.u);
    Ok(EnergyIdentity {
        a_yy,
        strain,
        residual: (a_yy + strain).abs(),
    })
}
