//! Left-looking sparse LU with threshold partial pivoting.
//!
//! Computes `P A Q = L U` where `Q` is a fill-reducing column order and `P`
//! is chosen column by column. Each column of `L` is found by a sparse
//! triangular solve whose nonzero pattern comes from a depth-first reach.

use super::{ordering, SparseMatrix};
use crate::error::{FsiError, Result};

/// Fraction of the column maximum the diagonal must reach to be kept.
const DIAGONAL_THRESHOLD: f64 = 0.1;
/// Pivots at or below this multiple of `max|A|` are treated as zero.
const SINGULAR_RELATIVE: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct LuFactorization {
    n: usize,
    /// Column order: column `k` of the factor is column `q[k]` of `A`.
    q: Vec<usize>,
    /// Row `i` of `A` becomes row `pinv[i]` of the factor.
    pinv: Vec<usize>,
    // Unit lower factor, diagonal stored first in each column.
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
    // Upper factor, diagonal stored last in each column.
    up: Vec<usize>,
    ui: Vec<usize>,
    ux: Vec<f64>,
    growth: f64,
    /// Symmetric equilibration: the factor is of `D A D`.
    scale: Vec<f64>,
}

/// Ruiz-style symmetric scaling toward unit row and column maxima.
fn equilibrate(a: &SparseMatrix) -> Vec<f64> {
    let n = a.nrows();
    let mut d = vec![1.0; n];
    for _ in 0..4 {
        let mut m = vec![0.0f64; n];
        for (i, j, v) in a.iter() {
            let t = (d[i] * v * d[j]).abs();
            m[i] = m[i].max(t);
            m[j] = m[j].max(t);
        }
        for (di, mi) in d.iter_mut().zip(&m) {
            if *mi > 0.0 {
                *di /= mi.sqrt();
            }
        }
    }
    d
}

impl LuFactorization {
    pub fn new(a: &SparseMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(FsiError::DimensionMismatch(format!(
                "LU needs a square matrix, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let q = ordering::approximate_minimum_degree(a);
        Self::with_order(a, q)
    }

    /// Factorizes with a caller-supplied column order.
    pub fn with_order(a: &SparseMatrix, q: Vec<usize>) -> Result<Self> {
        let n = a.nrows();
        assert_eq!(q.len(), n);
        let scale = equilibrate(a);
        let mut scaled = a.clone();
        for i in 0..n {
            for p in scaled.row_ptr[i]..scaled.row_ptr[i + 1] {
                scaled.values[p] *= scale[i] * scale[scaled.col_idx[p]];
            }
        }
        let a = &scaled;
        // Columns of A are rows of Aᵀ.
        let at = a.transpose();
        let (ap, ai, ax) = (at.row_ptr(), at.col_idx(), at.values());
        let amax = a.max_abs();
        let singular_tol = SINGULAR_RELATIVE * amax;

        let cap = 4 * a.nnz() + n;
        let mut lp = Vec::with_capacity(n + 1);
        let mut li = Vec::with_capacity(cap);
        let mut lx = Vec::with_capacity(cap);
        let mut up = Vec::with_capacity(n + 1);
        let mut ui = Vec::with_capacity(cap);
        let mut ux = Vec::with_capacity(cap);

        const NONE: usize = usize::MAX;
        let mut pinv = vec![NONE; n];
        let mut x = vec![0.0; n];
        let mut mark = vec![NONE; n];
        let mut reach: Vec<usize> = Vec::with_capacity(n);
        let mut stack: Vec<(usize, usize)> = Vec::with_capacity(n);
        let mut umax: f64 = 0.0;

        for k in 0..n {
            lp.push(li.len());
            up.push(ui.len());
            let col = q[k];

            // Reach of A(:,col) in the graph of L; `reach` ends in reverse
            // topological order.
            reach.clear();
            for &start in &ai[ap[col]..ap[col + 1]] {
                if mark[start] == k {
                    continue;
                }
                mark[start] = k;
                stack.push((start, 0));
                while let Some(top) = stack.len().checked_sub(1) {
                    let (j, pos) = stack[top];
                    let jcol = pinv[j];
                    let mut child_found = None;
                    if jcol != NONE {
                        let base = lp[jcol] + 1;
                        let end = lp[jcol + 1];
                        let mut p = base + pos;
                        while p < end {
                            let child = li[p];
                            p += 1;
                            if mark[child] != k {
                                child_found = Some((child, p - base));
                                break;
                            }
                        }
                    }
                    match child_found {
                        Some((child, next)) => {
                            mark[child] = k;
                            stack[top].1 = next;
                            stack.push((child, 0));
                        }
                        None => {
                            stack.pop();
                            reach.push(j);
                        }
                    }
                }
            }

            for &j in &reach {
                x[j] = 0.0;
            }
            for p in ap[col]..ap[col + 1] {
                x[ai[p]] = ax[p];
            }
            for &j in reach.iter().rev() {
                let jcol = pinv[j];
                if jcol == NONE {
                    continue;
                }
                let xj = x[j];
                if xj == 0.0 {
                    continue;
                }
                for p in lp[jcol] + 1..lp[jcol + 1] {
                    x[li[p]] -= lx[p] * xj;
                }
            }

            let mut ipiv = NONE;
            let mut amax_col = -1.0;
            for &i in reach.iter().rev() {
                if pinv[i] == NONE {
                    let t = x[i].abs();
                    if t > amax_col || (t == amax_col && i < ipiv) {
                        amax_col = t;
                        ipiv = i;
                    }
                } else {
                    ui.push(pinv[i]);
                    ux.push(x[i]);
                    umax = umax.max(x[i].abs());
                }
            }
            if ipiv == NONE || amax_col <= singular_tol {
                return Err(FsiError::Singular { pivot: k });
            }
            if pinv[col] == NONE && mark[col] == k && x[col].abs() >= DIAGONAL_THRESHOLD * amax_col {
                ipiv = col;
            }
            let pivot = x[ipiv];
            umax = umax.max(pivot.abs());
            ui.push(k);
            ux.push(pivot);
            pinv[ipiv] = k;
            li.push(ipiv);
            lx.push(1.0);
            for &i in reach.iter().rev() {
                if pinv[i] == NONE {
                    li.push(i);
                    lx.push(x[i] / pivot);
                }
                x[i] = 0.0;
            }
        }
        lp.push(li.len());
        up.push(ui.len());
        for r in li.iter_mut() {
            *r = pinv[*r];
        }

        Ok(LuFactorization {
            n,
            q,
            pinv,
            lp,
            li,
            lx,
            up,
            ui,
            ux,
            growth: if amax > 0.0 { umax / amax } else { 0.0 },
            scale,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `max|U| / max|D A D|`.
    pub fn pivot_growth(&self) -> f64 {
        self.growth
    }

    /// Stored entries of `L` and `U` together.
    pub fn fill(&self) -> usize {
        self.lx.len() + self.ux.len()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n, "LU solve: dimension mismatch");
        let mut y = vec![0.0; self.n];
        for (i, &bi) in b.iter().enumerate() {
            y[self.pinv[i]] = bi * self.scale[i];
        }
        for j in 0..self.n {
            let yj = y[j];
            if yj != 0.0 {
                for p in self.lp[j] + 1..self.lp[j + 1] {
                    y[self.li[p]] -= self.lx[p] * yj;
                }
            }
        }
        for j in (0..self.n).rev() {
            let last = self.up[j + 1] - 1;
            y[j] /= self.ux[last];
            let yj = y[j];
            if yj != 0.0 {
                for p in self.up[j]..last {
                    y[self.ui[p]] -= self.ux[p] * yj;
                }
            }
        }
        let mut x = vec![0.0; self.n];
        for (k, &c) in self.q.iter().enumerate() {
            x[c] = y[k] * self.scale[c];
        }
        x
    }

    /// Solves `Aᵀ x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n, "LU solve: dimension mismatch");
        let mut y: Vec<f64> = self.q.iter().map(|&c| b[c] * self.scale[c]).collect();
        for j in 0..self.n {
            let last = self.up[j + 1] - 1;
            let mut s = y[j];
            for p in self.up[j]..last {
                s -= self.ux[p] * y[self.ui[p]];
            }
            y[j] = s / self.ux[last];
        }
        for j in (0..self.n).rev() {
            let mut s = y[j];
            for p in self.lp[j] + 1..self.lp[j + 1] {
                s -= self.lx[p] * y[self.li[p]];
            }
            y[j] = s;
        }
        (0..self.n).map(|i| y[self.pinv[i]] * self.scale[i]).collect()
    }
}
