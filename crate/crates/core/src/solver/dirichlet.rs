//! Shifted elastostatic operator on the solid, its Dirichlet map and the
//! zero-trace resolvent.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::Result;
use crate::fem::{GlobalMatrices, MaterialParams, TaylorHoodSpace};
use crate::sparse::{LuFactorization, SparseMatrix};

/// `S_s = A_s + (λ² + 1) M_s`, split into interior and interface blocks,
/// with the interior block factorized once.
#[derive(Debug, Clone)]
pub struct SolidOperator {
    pub matrix: SparseMatrix,
    interior: Vec<usize>,
    interface: Vec<usize>,
    s_ig: SparseMatrix,
    lu: LuFactorization,
}

impl SolidOperator {
    pub fn new(space: &TaylorHoodSpace, mats: &GlobalMatrices, params: &MaterialParams) -> Result<Self> {
        let lam = params.shift;
        let matrix = mats.solid_stiffness.add_scaled(&mats.solid_mass, lam * lam + 1.0);
        let interior = space.solid_interior_dofs().to_vec();
        let interface = space.interface_solid_dofs().to_vec();
        let s_ii = matrix.submatrix(&interior, &interior);
        let s_ig = matrix.submatrix(&interior, &interface);
        let lu = LuFactorization::new(&s_ii)?;
        Ok(SolidOperator {
            matrix,
            interior,
            interface,
            s_ig,
            lu,
        })
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    /// Solid vector with interior values `S_II⁻¹ r` and zero trace.
    pub fn solve_interior(&self, load: &[f64]) -> Vec<f64> {
        let r: Vec<f64> = self.interior.iter().map(|&d| load[d]).collect();
        let x = self.lu.solve(&r);
        let mut out = vec![0.0; self.n()];
        for (k, &d) in self.interior.iter().enumerate() {
            out[d] = x[k];
        }
        out
    }

    /// Discrete extension of interface values: trace `g`, interior rows of
    /// `S_s` annihilated.
    pub fn extend(&self, g: &[f64]) -> Vec<f64> {
        let rhs: Vec<f64> = self.s_ig.mul_vec(g).iter().map(|v| -v).collect();
        let x = self.lu.solve(&rhs);
        let mut out = vec![0.0; self.n()];
        for (k, &d) in self.interior.iter().enumerate() {
            out[d] = x[k];
        }
        for (k, &d) in self.interface.iter().enumerate() {
            out[d] = g[k];
        }
        out
    }

    /// Largest interior row of `S_s w`, relative to `max(1, max|w|)`.
    pub fn interior_residual(&self, w: &[f64]) -> f64 {
        let sw = self.matrix.mul_vec(w);
        let scale = w.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        self.interior.iter().map(|&d| sw[d].abs()).fold(0.0, f64::max) / scale
    }

    pub fn interior_dofs(&self) -> &[usize] {
        &self.interior
    }
}

/// Extension columns `E_g` for every interface DOF `g`.
#[derive(Debug, Clone)]
pub struct DirichletMap {
    /// `n_solid × n_interface`; column `g` is the extension of the `g`-th
    /// interface basis trace.
    pub columns: DMatrix<f64>,
    /// Worst interior residual over all columns.
    pub interior_residual: f64,
}

impl DirichletMap {
    pub fn from_operator(op: &SolidOperator) -> Self {
        let ng = op.interface.len();
        let cols: Vec<(Vec<f64>, f64)> = (0..ng)
            .into_par_iter()
            .map(|g| {
                let mut e = vec![0.0; ng];
                e[g] = 1.0;
                let col = op.extend(&e);
                let res = op.interior_residual(&col);
                (col, res)
            })
            .collect();
        let mut columns = DMatrix::zeros(op.n(), ng);
        let mut interior_residual: f64 = 0.0;
        for (g, (col, res)) in cols.into_iter().enumerate() {
            columns.set_column(g, &nalgebra::DVector::from_vec(col));
            interior_residual = interior_residual.max(res);
        }
        DirichletMap {
            columns,
            interior_residual,
        }
    }

    pub fn n_interface(&self) -> usize {
        self.columns.ncols()
    }

    /// `E g` for interface values `g`.
    pub fn apply(&self, g: &[f64]) -> Vec<f64> {
        (&self.columns * nalgebra::DVector::from_column_slice(g))
            .as_slice()
            .to_vec()
    }

    /// `Eᵀ v` for a solid vector `v`.
    pub fn apply_transpose(&self, v: &[f64]) -> Vec<f64> {
        (self.columns.transpose() * nalgebra::DVector::from_column_slice(v))
            .as_slice()
            .to_vec()
    }
}

/// Builds the Dirichlet map of the shifted solid operator.
pub fn dirichlet_map(space: &TaylorHoodSpace, params: &MaterialParams) -> Result<DirichletMap> {
    params.validate()?;
    let mats = crate::fem::assemble(space, params);
    let op = SolidOperator::new(space, &mats, params)?;
    Ok(DirichletMap::from_operator(&op))
}

/// `ℒ_λ⁻¹ f`: the zero-trace solid field with `(S_s x, ψ) = (f, ψ)` for all
/// zero-trace `ψ`; `f` is given by its nodal coefficients.
pub fn solid_resolvent_inverse(space: &TaylorHoodSpace, params: &MaterialParams, f: &[f64]) -> Result<Vec<f64>> {
    params.validate()?;
    let mats = crate::fem::assemble(space, params);
    let op = SolidOperator::new(space, &mats, params)?;
    Ok(op.solve_interior(&mats.solid_mass.mul_vec(f)))
}
