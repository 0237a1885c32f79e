//! Static resolvent problem `(λI − 𝒜) Y = Y*` for the coupled system.
//!
//! The solid is eliminated through its Dirichlet map, which leaves a saddle
//! system in the fluid velocity and pressure:
//!
//! ```text
//! [ λM_f + K_f + P_Γᵀ C P_Γ   Bᵀ ] [u]   [F]
//! [ B                          0 ] [π] = [0]
//! ```
//!
//! with `C = (1/λ) Eᵀ S_s E` and `S_s = A_s + (λ² + 1) M_s`. Rows and
//! columns of velocity DOFs on `Γ_f` are removed. After the solve the solid
//! displacement and velocity are recovered from the interface trace.

pub mod conditions;
pub mod dirichlet;
pub mod export;
pub mod monolithic;
pub mod pressure;

use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FsiError, Result};
use crate::fem::quadrature::{QuadratureRule, LOAD_DEGREE};
use crate::fem::{assemble, element::p2_values, ElementGeometry, GlobalMatrices, MaterialParams, TaylorHoodSpace};
use crate::mesh::Region;
use crate::sparse::{
    check_residual, relative_residual, LinearSolveReport, LuFactorization, SparseMatrix, TripletBuilder,
};

pub use conditions::{check_domain_conditions, ConditionCheck, DomainReport};
pub use dirichlet::{dirichlet_map, solid_resolvent_inverse, DirichletMap, SolidOperator};
pub use monolithic::monolithic_solve;
pub use pressure::{decompose_pressure, interface_flux, interface_normal_trace, recover_c0, solid_flux};

/// Fluid velocity, solid displacement, solid velocity and pressure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FsiState {
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    pub z: Vec<f64>,
    pub pi: Option<Vec<f64>>,
}

impl FsiState {
    pub fn zeros(space: &TaylorHoodSpace) -> Self {
        FsiState {
            u: vec![0.0; space.n_velocity()],
            w: vec![0.0; space.n_solid()],
            z: vec![0.0; space.n_solid()],
            pi: None,
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let sc = |v: &Vec<f64>| v.iter().map(|x| s * x).collect::<Vec<_>>();
        FsiState {
            u: sc(&self.u),
            w: sc(&self.w),
            z: sc(&self.z),
            pi: self.pi.as_ref().map(sc),
        }
    }

    /// Largest absolute coefficient of `u`, `w`, `z`.
    pub fn max_abs(&self) -> f64 {
        self.u
            .iter()
            .chain(&self.w)
            .chain(&self.z)
            .fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    /// Random state with `u` zero on `Γ_f` and `z` matching `u` on the
    /// interface.
    pub fn random(space: &TaylorHoodSpace, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = FsiState::zeros(space);
        for v in s.u.iter_mut().chain(s.w.iter_mut()).chain(s.z.iter_mut()) {
            *v = rng.random_range(-1.0..1.0);
        }
        for &d in space.gamma_f_dofs() {
            s.u[d] = 0.0;
        }
        for (&fd, &sd) in space.interface_fluid_dofs().iter().zip(space.interface_solid_dofs()) {
            s.z[sd] = s.u[fd];
        }
        s
    }
}

/// Right-hand side `Y* = (u*, w*, z*)`.
///
/// The fluid part is stored as the load functional `(u*, φ_i)` over every
/// fluid velocity DOF; `w*` and `z*` are solid coefficient vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolventData {
    pub fluid_load: Vec<f64>,
    pub w_star: Vec<f64>,
    pub z_star: Vec<f64>,
}

impl ResolventData {
    pub fn zero(space: &TaylorHoodSpace) -> Self {
        ResolventData {
            fluid_load: vec![0.0; space.n_velocity()],
            w_star: vec![0.0; space.n_solid()],
            z_star: vec![0.0; space.n_solid()],
        }
    }

    /// `scale · Y` for a discrete state `Y`.
    pub fn from_state(mats: &GlobalMatrices, state: &FsiState, scale: f64) -> Self {
        ResolventData {
            fluid_load: mats.fluid_mass.mul_vec(&state.u).iter().map(|v| scale * v).collect(),
            w_star: state.w.iter().map(|v| scale * v).collect(),
            z_star: state.z.iter().map(|v| scale * v).collect(),
        }
    }

    /// Fluid forcing `u*` given in closed form; `w* = z* = 0`.
    pub fn from_function(space: &TaylorHoodSpace, f: impl Fn(f64, f64) -> [f64; 2] + Sync) -> Self {
        let rule = QuadratureRule::of_degree(LOAD_DEGREE);
        let mut load = vec![0.0; space.n_velocity()];
        for t in space.triangles_in(Region::Fluid) {
            let geo = ElementGeometry::of_triangle(&space.mesh, t);
            let dofs = space.fluid_tri_dofs(t);
            for (l, &w) in rule.points.iter().zip(&rule.weights) {
                let [x, y] = geo.map(l);
                let fv = f(x, y);
                let phi = p2_values(l);
                let wq = w * 2.0 * geo.area;
                for a in 0..6 {
                    load[dofs[2 * a]] += wq * phi[a] * fv[0];
                    load[dofs[2 * a + 1]] += wq * phi[a] * fv[1];
                }
            }
        }
        let mut d = Self::zero(space);
        d.fluid_load = load;
        d
    }

    /// Uniform random coefficients in `[−1, 1]` for `u*`, `w*`, `z*`.
    pub fn random(space: &TaylorHoodSpace, mats: &GlobalMatrices, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |n: usize| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>();
        let u = draw(space.n_velocity());
        let w_star = draw(space.n_solid());
        let z_star = draw(space.n_solid());
        ResolventData {
            fluid_load: mats.fluid_mass.mul_vec(&u),
            w_star,
            z_star,
        }
    }

    fn check(&self, space: &TaylorHoodSpace) -> Result<()> {
        if self.fluid_load.len() != space.n_velocity()
            || self.w_star.len() != space.n_solid()
            || self.z_star.len() != space.n_solid()
        {
            return Err(FsiError::Contract(format!(
                "data sizes ({}, {}, {}) do not match the space ({}, {}, {})",
                self.fluid_load.len(),
                self.w_star.len(),
                self.z_star.len(),
                space.n_velocity(),
                space.n_solid(),
                space.n_solid()
            )));
        }
        Ok(())
    }
}

/// Assembled saddle system for one right-hand side.
#[derive(Debug, Clone)]
pub struct SaddleSystem {
    /// Velocity block on the free DOFs.
    pub a_lambda: SparseMatrix,
    /// Divergence block, pressure rows by free velocity columns.
    pub b: SparseMatrix,
    pub rhs_velocity: Vec<f64>,
    pub rhs_pressure: Vec<f64>,
    /// Free position → fluid velocity DOF.
    pub free_dofs: Vec<usize>,
}

/// Resolvent solution with its solver diagnostics.
#[derive(Debug, Clone)]
pub struct ResolventSolution {
    pub state: FsiState,
    pub pressure: Vec<f64>,
    pub report: LinearSolveReport,
}

/// Everything that depends on the mesh and parameters but not on the data:
/// global matrices, the factorized solid operator, the Dirichlet map and
/// the factorized saddle matrix.
#[derive(Debug, Clone)]
pub struct ResolventSolver {
    pub space: TaylorHoodSpace,
    pub params: MaterialParams,
    pub mats: GlobalMatrices,
    pub solid: SolidOperator,
    pub dirichlet: DirichletMap,
    /// Interface Schur block `C`.
    pub schur: DMatrix<f64>,
    a_lambda: SparseMatrix,
    b_free: SparseMatrix,
    saddle: SparseMatrix,
    lu: LuFactorization,
    free_pos: Vec<usize>,
}

impl ResolventSolver {
    pub fn new(space: &TaylorHoodSpace, params: &MaterialParams) -> Result<Self> {
        params.validate()?;
        let mats = assemble(space, params);
        Self::with_matrices(space, params, mats)
    }

    pub fn with_matrices(space: &TaylorHoodSpace, params: &MaterialParams, mats: GlobalMatrices) -> Result<Self> {
        params.validate()?;
        let lam = params.shift;
        let solid = SolidOperator::new(space, &mats, params)?;
        let dirichlet = DirichletMap::from_operator(&solid);
        let schur = schur_block(&mats, &dirichlet, lam);

        let free = space.free_velocity_dofs().to_vec();
        let mut free_pos = vec![usize::MAX; space.n_velocity()];
        for (k, &d) in free.iter().enumerate() {
            free_pos[d] = k;
        }
        let nf = free.len();
        let np = space.n_pressure();

        let full = mats.fluid_strain.add_scaled(&mats.fluid_mass, lam);
        let mut ab = TripletBuilder::new(nf, nf);
        for (i, j, v) in full.iter() {
            if free_pos[i] != usize::MAX && free_pos[j] != usize::MAX {
                ab.add(free_pos[i], free_pos[j], v);
            }
        }
        let iface = space.interface_fluid_dofs();
        for (g, &di) in iface.iter().enumerate() {
            for (h, &dj) in iface.iter().enumerate() {
                ab.add(free_pos[di], free_pos[dj], schur[(g, h)]);
            }
        }
        let a_lambda = ab.build();
        let b_free = mats.divergence.submatrix(&(0..np).collect::<Vec<_>>(), &free);

        let mut sb = TripletBuilder::new(nf + np, nf + np);
        sb.add_block(0, 0, &a_lambda);
        for (q, j, v) in b_free.iter() {
            sb.add(nf + q, j, v);
            sb.add(j, nf + q, v);
        }
        let saddle = sb.build();
        let lu = LuFactorization::new(&saddle)?;

        Ok(ResolventSolver {
            space: space.clone(),
            params: *params,
            mats,
            solid,
            dirichlet,
            schur,
            a_lambda,
            b_free,
            saddle,
            lu,
            free_pos,
        })
    }

    pub fn shift(&self) -> f64 {
        self.params.shift
    }

    /// Full saddle matrix `[A_λ Bᵀ; B 0]` on free velocity and pressure DOFs.
    pub fn saddle_matrix(&self) -> &SparseMatrix {
        &self.saddle
    }

    /// Position of a fluid DOF among the free DOFs.
    pub fn free_position(&self, dof: usize) -> Option<usize> {
        Some(self.free_pos[dof]).filter(|&k| k != usize::MAX)
    }

    /// `λw* + z*`.
    fn solid_forcing(&self, data: &ResolventData) -> Vec<f64> {
        let lam = self.shift();
        data.w_star.iter().zip(&data.z_star).map(|(w, z)| lam * w + z).collect()
    }

    /// `w₀ = (1/λ) E(w*|Γ) + ℒ⁻¹(λw* + z*)` and `M_s(λw* + z*)`.
    fn data_displacement(&self, data: &ResolventData) -> (Vec<f64>, Vec<f64>) {
        let lam = self.shift();
        let msf = self.mats.solid_mass.mul_vec(&self.solid_forcing(data));
        let trace: Vec<f64> = self.space.solid_trace(&data.w_star).iter().map(|v| v / lam).collect();
        let ext = self.dirichlet.apply(&trace);
        let inner = self.solid.solve_interior(&msf);
        let w0 = ext.iter().zip(&inner).map(|(a, b)| a + b).collect();
        (w0, msf)
    }

    pub fn assemble_system(&self, data: &ResolventData) -> Result<SaddleSystem> {
        data.check(&self.space)?;
        let (w0, msf) = self.data_displacement(data);
        let sw0 = self.solid.matrix.mul_vec(&w0);
        let diff: Vec<f64> = msf.iter().zip(&sw0).map(|(a, b)| a - b).collect();
        let h = self.dirichlet.apply_transpose(&diff);
        let free = self.space.free_velocity_dofs().to_vec();
        let mut rhs_velocity: Vec<f64> = free.iter().map(|&d| data.fluid_load[d]).collect();
        for (g, &d) in self.space.interface_fluid_dofs().iter().enumerate() {
            rhs_velocity[self.free_pos[d]] += h[g];
        }
        Ok(SaddleSystem {
            a_lambda: self.a_lambda.clone(),
            b: self.b_free.clone(),
            rhs_velocity,
            rhs_pressure: vec![0.0; self.space.n_pressure()],
            free_dofs: free,
        })
    }

    /// Right-hand side of the saddle matrix.
    pub fn saddle_rhs(&self, data: &ResolventData) -> Result<Vec<f64>> {
        let sys = self.assemble_system(data)?;
        let mut rhs = sys.rhs_velocity;
        rhs.extend(sys.rhs_pressure);
        Ok(rhs)
    }

    pub fn solve(&self, data: &ResolventData) -> Result<ResolventSolution> {
        let start = Instant::now();
        let rhs = self.saddle_rhs(data)?;
        let mut x = self.lu.solve(&rhs);
        // one step of iterative refinement
        let ax = self.saddle.mul_vec(&x);
        let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        if r.iter().any(|&v| v != 0.0) {
            let dx = self.lu.solve(&r);
            x.iter_mut().zip(&dx).for_each(|(a, b)| *a += b);
        }
        let residual = relative_residual(&self.saddle, &x, &rhs);
        check_residual(residual)?;

        let lam = self.shift();
        let nf = self.space.free_velocity_dofs().len();
        let mut u = vec![0.0; self.space.n_velocity()];
        for (k, &d) in self.space.free_velocity_dofs().iter().enumerate() {
            u[d] = x[k];
        }
        let pressure = x[nf..].to_vec();

        let (w0, _) = self.data_displacement(data);
        let trace: Vec<f64> = self.space.fluid_trace(&u).iter().map(|v| v / lam).collect();
        let ext = self.dirichlet.apply(&trace);
        let w: Vec<f64> = ext.iter().zip(&w0).map(|(a, b)| a + b).collect();
        let z: Vec<f64> = w.iter().zip(&data.w_star).map(|(w, ws)| lam * w - ws).collect();
        Ok(ResolventSolution {
            state: FsiState {
                u,
                w,
                z,
                pi: Some(pressure.clone()),
            },
            pressure,
            report: LinearSolveReport {
                relative_residual: residual,
                pivot_growth: self.lu.pivot_growth(),
                elapsed: start.elapsed(),
            },
        })
    }

    /// Fluid momentum residual `K_f u + λ M_f u + Bᵀπ − ℓ` over every fluid DOF.
    pub fn fluid_residual(&self, u: &[f64], pi: &[f64], data: &ResolventData) -> Vec<f64> {
        let lam = self.shift();
        let ku = self.mats.fluid_strain.mul_vec(u);
        let mu = self.mats.fluid_mass.mul_vec(u);
        let bp = self.mats.divergence.mul_vec_transpose(pi);
        (0..u.len())
            .map(|i| ku[i] + lam * mu[i] + bp[i] - data.fluid_load[i])
            .collect()
    }

    /// Solid residual `S_s w − M_s(λw* + z*)` over every solid DOF.
    pub fn solid_residual(&self, w: &[f64], data: &ResolventData) -> Vec<f64> {
        let msf = self.mats.solid_mass.mul_vec(&self.solid_forcing(data));
        self.solid
            .matrix
            .mul_vec(w)
            .iter()
            .zip(&msf)
            .map(|(a, b)| a - b)
            .collect()
    }
}

/// `C = (1/λ) EᵀA_sE + ((λ² + 1)/λ) EᵀM_sE`.
fn schur_block(mats: &GlobalMatrices, e: &DirichletMap, lam: f64) -> DMatrix<f64> {
    let ng = e.n_interface();
    let ns = e.columns.nrows();
    let mut ae = DMatrix::zeros(ns, ng);
    let mut me = DMatrix::zeros(ns, ng);
    for g in 0..ng {
        let col: Vec<f64> = e.columns.column(g).iter().copied().collect();
        ae.set_column(g, &nalgebra::DVector::from_vec(mats.solid_stiffness.mul_vec(&col)));
        me.set_column(g, &nalgebra::DVector::from_vec(mats.solid_mass.mul_vec(&col)));
    }
    let et = e.columns.transpose();
    (&et * ae) / lam + (&et * me) * ((lam * lam + 1.0) / lam)
}

/// Builds the solver and solves once.
pub fn solve_resolvent(
    space: &TaylorHoodSpace,
    params: &MaterialParams,
    data: &ResolventData,
) -> Result<(FsiState, LinearSolveReport)> {
    let solver = ResolventSolver::new(space, params)?;
    let sol = solver.solve(data)?;
    Ok((sol.state, sol.report))
}
