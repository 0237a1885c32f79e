//! Smallest eigenpair of `S q = θ M q` by block inverse subspace iteration.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LuFactorization, SparseMatrix};
use crate::error::{FsiError, Result};

/// Action of `S⁻¹` for a symmetric positive definite `S`.
pub trait InverseOperator: Sync {
    fn dim(&self) -> usize;
    fn apply_inverse(&self, y: &[f64]) -> Result<Vec<f64>>;
}

impl InverseOperator for LuFactorization {
    fn dim(&self) -> usize {
        LuFactorization::dim(self)
    }

    fn apply_inverse(&self, y: &[f64]) -> Result<Vec<f64>> {
        Ok(self.solve(y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    pub block: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            block: 4,
            max_iterations: 500,
            tolerance: 1e-8,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    /// `M`-normalized eigenvector.
    pub vector: Vec<f64>,
    pub iterations: usize,
    /// `‖θ S⁻¹M q − q‖_M` at exit.
    pub residual: f64,
}

/// Smallest generalized eigenpair with default options, factorizing `S`.
pub fn smallest_gen_eig(s: &SparseMatrix, m: &SparseMatrix) -> Result<EigenPair> {
    if s.nrows() != m.nrows() || !s.is_square() || !m.is_square() {
        return Err(FsiError::DimensionMismatch(format!(
            "eigenproblem with S {}x{} and M {}x{}",
            s.nrows(),
            s.ncols(),
            m.nrows(),
            m.ncols()
        )));
    }
    let lu = LuFactorization::new(s)?;
    smallest_gen_eig_with(&lu, m, EigenOptions::default())
}

fn m_orthonormalize(w: &DMatrix<f64>, m: &SparseMatrix) -> Option<DMatrix<f64>> {
    let mw = apply_cols(m, w);
    let g = w.transpose() * &mw;
    let g = (&g + g.transpose()) * 0.5;
    let l = g.cholesky()?.l();
    let linv_t = l.try_inverse()?.transpose();
    Some(w * linv_t)
}

fn apply_cols(m: &SparseMatrix, w: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(w.nrows(), w.ncols());
    for j in 0..w.ncols() {
        let col: Vec<f64> = w.column(j).iter().copied().collect();
        out.set_column(j, &nalgebra::DVector::from_vec(m.mul_vec(&col)));
    }
    out
}

/// Smallest generalized eigenpair using a caller-supplied inverse of `S`.
pub fn smallest_gen_eig_with(op: &dyn InverseOperator, m: &SparseMatrix, opts: EigenOptions) -> Result<EigenPair> {
    let n = op.dim();
    if m.nrows() != n || !m.is_square() {
        return Err(FsiError::DimensionMismatch(format!(
            "operator has dimension {n}, mass matrix is {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if n == 0 {
        return Err(FsiError::DimensionMismatch("empty eigenproblem".into()));
    }
    let b = opts.block.clamp(1, n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let w = DMatrix::from_fn(n, b, |_, _| rng.random_range(-1.0..1.0));
    let mut q = m_orthonormalize(&w, m).ok_or_else(|| FsiError::Contract("degenerate start block".into()))?;

    let mut last = (f64::NAN, f64::INFINITY, vec![0.0; n]);
    for it in 1..=opts.max_iterations {
        let mq = apply_cols(m, &q);
        let mut z = DMatrix::zeros(n, b);
        for j in 0..b {
            let col: Vec<f64> = mq.column(j).iter().copied().collect();
            z.set_column(j, &nalgebra::DVector::from_vec(op.apply_inverse(&col)?));
        }
        let r = mq.transpose() * &z;
        let r = (&r + r.transpose()) * 0.5;
        let eig = r.symmetric_eigen();
        let mut idx: Vec<usize> = (0..b).collect();
        idx.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        let mut v = DMatrix::zeros(b, b);
        for (k, &i) in idx.iter().enumerate() {
            v.set_column(k, &eig.eigenvectors.column(i));
        }
        let mu = eig.eigenvalues[idx[0]];
        let x = &q * &v;
        let tx = &z * &v;
        let x0 = x.column(0).into_owned();
        let res = (tx.column(0) / mu) - &x0;
        let res_vec: Vec<f64> = res.iter().copied().collect();
        let residual = m.bilinear(&res_vec, &res_vec).max(0.0).sqrt();
        let value = 1.0 / mu;
        let vector: Vec<f64> = x0.iter().copied().collect();
        if mu > 0.0 && residual <= opts.tolerance {
            return Ok(EigenPair {
                value,
                vector,
                iterations: it,
                residual,
            });
        }
        last = (value, residual, vector);
        q = match m_orthonormalize(&tx, m) {
            Some(q) => q,
            None => break,
        };
    }
    Err(FsiError::EigenNotConverged {
        iterations: opts.max_iterations,
        residual: last.1,
        value: last.0,
        vector: last.2,
    })
}
