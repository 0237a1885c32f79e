//! Discrete inf-sup constant and kernel coercivity of the Taylor-Hood pair.
//!
//! The velocity Gram is `K = (ε(u), ε(v))_{Ω_f}` on the free velocity
//! DOFs. `β_h² ` is the smallest eigenvalue of `B K⁻¹ Bᵀ q = β² M_p q`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::norms::gradient_gram;
use crate::error::{FsiError, Result};
use crate::fem::{assemble, build_space, MaterialParams, TaylorHoodSpace};
use crate::mesh::{generate, hypotenuse_length, Region};
use crate::solver::{ResolventData, ResolventSolver};
use crate::sparse::dense::dense_generalized_eigen;
use crate::sparse::{
    smallest_gen_eig, smallest_gen_eig_with, EigenOptions, InverseOperator, LuFactorization, SparseMatrix,
    TripletBuilder,
};

/// Name of the velocity Gram convention.
pub const VELOCITY_GRAM: &str = "strain: |v|_1 = ||eps(v)||_0,Omega_f";

/// `K`, `B` restricted to free velocity DOFs, and `M_p`.
#[derive(Debug, Clone)]
pub struct InfSupOperators {
    pub gram: SparseMatrix,
    pub divergence: SparseMatrix,
    pub pressure_mass: SparseMatrix,
}

impl InfSupOperators {
    pub fn new(space: &TaylorHoodSpace) -> Self {
        let mats = assemble(space, &MaterialParams::default());
        let free = space.free_velocity_dofs();
        let all_p: Vec<usize> = (0..space.n_pressure()).collect();
        InfSupOperators {
            gram: mats.fluid_strain.submatrix(free, free),
            divergence: mats.divergence.submatrix(&all_p, free),
            pressure_mass: mats.pressure_mass,
        }
    }

    /// `[K Bᵀ; B 0]`.
    pub fn saddle(&self) -> SparseMatrix {
        let nv = self.gram.nrows();
        let np = self.divergence.nrows();
        let mut tb = TripletBuilder::new(nv + np, nv + np);
        for (i, j, v) in self.gram.iter() {
            tb.add(i, j, v);
        }
        for (q, j, v) in self.divergence.iter() {
            tb.add(nv + q, j, v);
            tb.add(j, nv + q, v);
        }
        tb.build()
    }
}

/// `q ↦ (B K⁻¹ Bᵀ)⁻¹ q` through one saddle solve.
pub struct PressureSchurInverse {
    saddle: SparseMatrix,
    lu: LuFactorization,
    nv: usize,
    np: usize,
}

impl PressureSchurInverse {
    pub fn new(ops: &InfSupOperators) -> Result<Self> {
        let saddle = ops.saddle();
        let lu = LuFactorization::new(&saddle)?;
        Ok(PressureSchurInverse {
            saddle,
            lu,
            nv: ops.gram.nrows(),
            np: ops.divergence.nrows(),
        })
    }

    /// Solves `[K Bᵀ; B 0] x = rhs` with one refinement step.
    pub fn solve_saddle(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = self.lu.solve(rhs);
        let ax = self.saddle.mul_vec(&x);
        let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let dx = self.lu.solve(&r);
        x.iter_mut().zip(&dx).for_each(|(a, b)| *a += b);
        x
    }
}

impl InverseOperator for PressureSchurInverse {
    fn dim(&self) -> usize {
        self.np
    }

    fn apply_inverse(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.np {
            return Err(FsiError::DimensionMismatch(format!(
                "pressure vector has {} entries, expected {}",
                y.len(),
                self.np
            )));
        }
        let mut rhs = vec![0.0; self.nv];
        rhs.extend(y.iter().map(|v| -v));
        Ok(self.solve_saddle(&rhs)[self.nv..].to_vec())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfSupRow {
    pub level: u32,
    pub h: f64,
    pub beta: f64,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfSupReport {
    pub gram: &'static str,
    pub rows: Vec<InfSupRow>,
}

impl InfSupReport {
    /// `(max β − min β) / max β`.
    pub fn spread(&self) -> f64 {
        let max = self.rows.iter().map(|r| r.beta).fold(f64::MIN, f64::max);
        let min = self.rows.iter().map(|r| r.beta).fold(f64::MAX, f64::min);
        if self.rows.is_empty() || max <= 0.0 {
            return 0.0;
        }
        (max - min) / max
    }

    pub fn all_positive(&self) -> bool {
        self.rows.iter().all(|r| r.beta > 0.0)
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("level,h,beta_h\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{:e},{:e}", r.level, r.h, r.beta);
        }
        s
    }

    /// Writes `infsup.csv` into `dir`.
    pub fn write_csv(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|source| FsiError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = dir.join("infsup.csv");
        std::fs::write(&path, self.csv()).map_err(|source| FsiError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    }
}

/// `β_h` on one space by inverse subspace iteration.
pub fn infsup_constant(space: &TaylorHoodSpace) -> Result<(f64, usize, f64)> {
    let ops = InfSupOperators::new(space);
    let op = PressureSchurInverse::new(&ops)?;
    let pair = smallest_gen_eig_with(&op, &ops.pressure_mass, EigenOptions::default())?;
    Ok((pair.value.max(0.0).sqrt(), pair.iterations, pair.residual))
}

/// `β_h` from a dense generalized eigensolve of `B K⁻¹ Bᵀ` against `M_p`.
pub fn infsup_dense(space: &TaylorHoodSpace) -> Result<f64> {
    let ops = InfSupOperators::new(space);
    let s = dense_schur(&ops)?;
    let (vals, _) = dense_generalized_eigen(&s, &ops.pressure_mass.to_dense())?;
    Ok(vals[0].max(0.0).sqrt())
}

/// Dense `B K⁻¹ Bᵀ`.
pub fn dense_schur(ops: &InfSupOperators) -> Result<DMatrix<f64>> {
    let k = ops.gram.to_dense();
    let b = ops.divergence.to_dense();
    let chol = k
        .cholesky()
        .ok_or_else(|| FsiError::Contract("velocity Gram is not positive definite".into()))?;
    let kib = chol.solve(&b.transpose());
    let s = &b * kib;
    Ok((&s + s.transpose()) * 0.5)
}

/// `β` restricted to constant pressures: `√(cᵀ B K⁻¹ Bᵀ c / cᵀ M_p c)`.
pub fn constant_mode_beta(space: &TaylorHoodSpace) -> Result<f64> {
    let ops = InfSupOperators::new(space);
    let ones = vec![1.0; ops.divergence.nrows()];
    let bt1 = ops.divergence.mul_vec_transpose(&ones);
    let lu = LuFactorization::new(&ops.gram)?;
    let x = lu.solve(&bt1);
    let num: f64 = bt1.iter().zip(&x).map(|(a, b)| a * b).sum();
    Ok((num / ops.pressure_mass.bilinear(&ones, &ones)).sqrt())
}

/// Inf-sup constants on every level.
pub fn infsup_study(levels: &[u32]) -> Result<InfSupReport> {
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(FsiError::InvalidParams(format!(
            "levels must be strictly ascending, got {levels:?}"
        )));
    }
    let rows = levels
        .par_iter()
        .map(|&level| {
            let tag = |e| FsiError::Level {
                level,
                source: Box::new(e),
            };
            let mesh = generate(level).map_err(tag)?;
            let space = build_space(&mesh);
            let (beta, iterations, residual) = infsup_constant(&space).map_err(tag)?;
            Ok(InfSupRow {
                level,
                h: hypotenuse_length(level),
                beta,
                iterations,
                residual,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InfSupReport {
        gram: VELOCITY_GRAM,
        rows,
    })
}

/// Outcome of sampling `a_λ` on random discretely divergence-free fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelCoercivity {
    pub samples: usize,
    /// Korn/Poincaré constant: smallest `‖ε(v)‖² / ‖v‖²_1` over free `v`.
    pub alpha: f64,
    /// Smallest `(a_λ(φ,φ) − ‖ε(φ)‖²) / ‖ε(φ)‖²` over the samples.
    pub min_excess: f64,
    /// Smallest `‖ε(φ)‖² / (α‖φ‖²_1)` over the samples.
    pub min_korn_ratio: f64,
    /// Largest `‖Bφ‖ / ‖φ‖` over the samples.
    pub max_divergence: f64,
}

impl KernelCoercivity {
    pub fn passed(&self) -> bool {
        self.alpha > 0.0
            && self.min_excess >= -1e-12
            && self.min_korn_ratio >= 1.0 - 1e-8
            && self.max_divergence <= 1e-10
    }
}

/// Draws `samples` random vectors, projects them onto `ker B` and checks
/// `a_λ(φ,φ) ≥ ‖ε(φ)‖² ≥ α‖φ‖²_1`.
pub fn kernel_coercivity(solver: &ResolventSolver, samples: usize, seed: u64) -> Result<KernelCoercivity> {
    let space = &solver.space;
    let ops = InfSupOperators::new(space);
    let inv = PressureSchurInverse::new(&ops)?;
    let free = space.free_velocity_dofs();
    let mass = solver.mats.fluid_mass.submatrix(free, free);
    let grad = gradient_gram(space, Region::Fluid).submatrix(free, free);
    let h1 = mass.add_scaled(&grad, 1.0);
    let alpha = smallest_gen_eig(&ops.gram, &h1)?.value;
    let a_lambda = solver.assemble_system(&ResolventData::zero(space))?.a_lambda;

    let nv = free.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = KernelCoercivity {
        samples,
        alpha,
        min_excess: f64::INFINITY,
        min_korn_ratio: f64::INFINITY,
        max_divergence: 0.0,
    };
    for _ in 0..samples {
        let v: Vec<f64> = (0..nv).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut rhs = ops.gram.mul_vec(&v);
        rhs.extend(std::iter::repeat_n(0.0, ops.divergence.nrows()));
        let phi = inv.solve_saddle(&rhs)[..nv].to_vec();
        let eps = ops.gram.bilinear(&phi, &phi);
        let a = a_lambda.bilinear(&phi, &phi);
        let norm1 = h1.bilinear(&phi, &phi);
        let div = crate::sparse::norm2(&ops.divergence.mul_vec(&phi)) / crate::sparse::norm2(&phi);
        out.min_excess = out.min_excess.min((a - eps) / eps);
        out.min_korn_ratio = out.min_korn_ratio.min(eps / (alpha * norm1));
        out.max_divergence = out.max_divergence.max(div);
    }
    Ok(out)
}
