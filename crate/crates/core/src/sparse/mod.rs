//! Compressed sparse row matrices, a sparse direct solver, dense oracles and
//! inverse subspace iteration for generalized eigenproblems.

pub mod dense;
pub mod eigen;
pub mod lu;
pub mod ordering;

use std::time::{Duration, Instant};

use crate::error::{FsiError, Result};

pub use eigen::{smallest_gen_eig, smallest_gen_eig_with, EigenOptions, EigenPair, InverseOperator};
pub use lu::LuFactorization;

/// Relative residual every direct solve must reach.
pub const SOLVE_TOLERANCE: f64 = 1e-10;

/// Square or rectangular matrix in compressed row storage.
///
/// Column indices are sorted and unique within each row and no explicit
/// zeros are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Accumulates `(row, col, value)` entries; duplicates are summed.
#[derive(Debug, Clone)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        TripletBuilder {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        TripletBuilder {
            nrows,
            ncols,
            entries: Vec::with_capacity(cap),
        }
    }

    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.entries.push((row, col, value));
    }

    /// Adds every stored entry of `m`, shifted by `(row0, col0)`.
    pub fn add_block(&mut self, row0: usize, col0: usize, m: &SparseMatrix) {
        for (i, j, v) in m.iter() {
            self.add(row0 + i, col0 + j, v);
        }
    }

    pub fn extend(&mut self, other: TripletBuilder) {
        self.entries.extend(other.entries);
    }

    pub fn build(mut self) -> SparseMatrix {
        // values break ties so the summation order does not depend on
        // insertion order
        self.entries
            .sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values = Vec::with_capacity(self.entries.len());
        let mut k = 0;
        while k < self.entries.len() {
            let (i, j, mut v) = self.entries[k];
            k += 1;
            while k < self.entries.len() && self.entries[k].0 == i && self.entries[k].1 == j {
                v += self.entries[k].2;
                k += 1;
            }
            if v != 0.0 {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
            }
        }
        for i in 0..self.nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            col_idx,
            values,
        }
    }
}

impl SparseMatrix {
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut b = TripletBuilder::with_capacity(nrows, ncols, triplets.len());
        for &(i, j, v) in triplets {
            b.add(i, j, v);
        }
        b.build()
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let t: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(d.len(), d.len(), &t)
    }

    pub fn from_dense(a: &nalgebra::DMatrix<f64>) -> Self {
        let mut b = TripletBuilder::new(a.nrows(), a.ncols());
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                b.add(i, j, a[(i, j)]);
            }
        }
        b.build()
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "mul_vec: dimension mismatch");
        (0..self.nrows)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    /// `Aᵀ x`
    pub fn mul_vec_transpose(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows, "mul_vec_transpose: dimension mismatch");
        let mut y = vec![0.0; self.ncols];
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                for (j, v) in self.row(i) {
                    y[j] += v * xi;
                }
            }
        }
        y
    }

    /// `xᵀ A y`
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        self.mul_vec(y).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn transpose(&self) -> SparseMatrix {
        let t: Vec<_> = self.iter().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, &t)
    }

    pub fn scaled(&self, s: f64) -> SparseMatrix {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= s);
        if s == 0.0 {
            return Self::from_triplets(self.nrows, self.ncols, &[]);
        }
        m
    }

    /// `self + s·other`
    pub fn add_scaled(&self, other: &SparseMatrix, s: f64) -> SparseMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut b = TripletBuilder::with_capacity(self.nrows, self.ncols, self.nnz() + other.nnz());
        for (i, j, v) in self.iter() {
            b.add(i, j, v);
        }
        for (i, j, v) in other.iter() {
            b.add(i, j, s * v);
        }
        b.build()
    }

    /// Sub-matrix selecting `rows` and `cols` (given as index lists).
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> SparseMatrix {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (k, &c) in cols.iter().enumerate() {
            col_map[c] = k;
        }
        let mut b = TripletBuilder::new(rows.len(), cols.len());
        for (r, &i) in rows.iter().enumerate() {
            for (j, v) in self.row(i) {
                if col_map[j] != usize::MAX {
                    b.add(r, col_map[j], v);
                }
            }
        }
        b.build()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|a_ij − a_ji|`, relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        self.iter()
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
            / scale
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut a = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.iter() {
            a[(i, j)] = v;
        }
        a
    }

    pub(crate) fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub(crate) fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub(crate) fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Diagnostics of one direct solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSolveReport {
    /// `‖Ax − b‖₂ / ‖b‖₂`, measured after the solve (absolute when `b = 0`).
    pub relative_residual: f64,
    /// `max|U| / max|A|` of the factorization.
    pub pivot_growth: f64,
    pub elapsed: Duration,
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Relative residual `‖Ax − b‖ / ‖b‖`.
pub fn relative_residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let r: f64 = ax.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
    let nb = norm2(b);
    if nb > 0.0 {
        r / nb
    } else {
        r
    }
}

/// Solves `A x = b` with a sparse LU factorization.
///
/// Fails if the factorization meets a pivot that is zero to tolerance or if
/// the post-solve relative residual exceeds [`SOLVE_TOLERANCE`].
pub fn solve(a: &SparseMatrix, b: &[f64]) -> Result<(Vec<f64>, LinearSolveReport)> {
    let start = Instant::now();
    if !a.is_square() {
        return Err(FsiError::DimensionMismatch(format!(
            "solve needs a square matrix, got {}x{}",
            a.nrows, a.ncols
        )));
    }
    if b.len() != a.nrows {
        return Err(FsiError::DimensionMismatch(format!(
            "right-hand side has length {}, matrix has {} rows",
            b.len(),
            a.nrows
        )));
    }
    let lu = LuFactorization::new(a)?;
    let x = lu.solve(b);
    let report = LinearSolveReport {
        relative_residual: relative_residual(a, &x, b),
        pivot_growth: lu.pivot_growth(),
        elapsed: start.elapsed(),
    };
    check_residual(report.relative_residual)?;
    Ok((x, report))
}

pub(crate) fn check_residual(residual: f64) -> Result<()> {
    if residual.is_finite() && residual <= SOLVE_TOLERANCE {
        Ok(())
    } else {
        Err(FsiError::ResidualTooLarge {
            residual,
            tolerance: SOLVE_TOLERANCE,
        })
    }
}
