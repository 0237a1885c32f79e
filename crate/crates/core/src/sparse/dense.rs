//! Dense reference solvers used as independent oracles on small problems.

use nalgebra::{DMatrix, DVector};

use crate::error::{FsiError, Result};

/// Solves `A x = b` by dense LU with full pivoting.
pub fn dense_solve(a: &DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    if a.nrows() != a.ncols() || a.nrows() != b.len() {
        return Err(FsiError::DimensionMismatch(format!(
            "dense solve of {}x{} with rhs {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let lu = a.clone().full_piv_lu();
    lu.solve(&DVector::from_column_slice(b))
        .map(|x| x.as_slice().to_vec())
        .ok_or(FsiError::Singular { pivot: 0 })
}

/// All eigenvalues of `S q = θ M q` in ascending order, with `M`-normalized
/// eigenvectors as columns.
pub fn dense_generalized_eigen(s: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = s.nrows();
    if s.ncols() != n || m.shape() != (n, n) {
        return Err(FsiError::DimensionMismatch("generalized eigenproblem shapes".into()));
    }
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| FsiError::Contract("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| FsiError::Contract("Cholesky factor is singular".into()))?;
    let c = &linv * s * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let lt = linv.transpose();
    let mut vecs = DMatrix::zeros(n, n);
    for (k, &i) in idx.iter().enumerate() {
        vecs.set_column(k, &(&lt * eig.eigenvectors.column(i)));
    }
    Ok((values, vecs))
}
