//! Approximate minimum degree ordering on the pattern of `A + Aᵀ`.
//!
//! Quotient-graph elimination with element absorption; degrees use the
//! approximate external-degree bound. Ties go to the lowest index.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::SparseMatrix;

pub fn approximate_minimum_degree(a: &SparseMatrix) -> Vec<usize> {
    let n = a.nrows();
    let mut adj_vars: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, j, _) in a.iter() {
        if i != j {
            adj_vars[i].push(j);
            adj_vars[j].push(i);
        }
    }
    for v in adj_vars.iter_mut() {
        v.sort_unstable();
        v.dedup();
    }
    let mut adj_elems: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut elem_vars: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut elem_alive = vec![false; n];
    let mut eliminated = vec![false; n];
    let mut degree: Vec<usize> = adj_vars.iter().map(Vec::len).collect();

    let mut heap: BinaryHeap<Reverse<(usize, usize)>> = (0..n).map(|i| Reverse((degree[i], i))).collect();

    let mut in_lp = vec![usize::MAX; n];
    let mut w_stamp = vec![usize::MAX; n];
    let mut w = vec![0usize; n];
    let mut order = Vec::with_capacity(n);

    for k in 0..n {
        let p = loop {
            let Reverse((d, i)) = heap.pop().expect("heap holds every live variable");
            if !eliminated[i] && d == degree[i] {
                break i;
            }
        };
        eliminated[p] = true;
        order.push(p);

        let mut lp = Vec::new();
        in_lp[p] = k;
        for &j in &adj_vars[p] {
            if !eliminated[j] && in_lp[j] != k {
                in_lp[j] = k;
                lp.push(j);
            }
        }
        for &e in &adj_elems[p] {
            for &j in &elem_vars[e] {
                if !eliminated[j] && in_lp[j] != k {
                    in_lp[j] = k;
                    lp.push(j);
                }
            }
            elem_alive[e] = false;
            elem_vars[e] = Vec::new();
        }
        adj_vars[p] = Vec::new();
        adj_elems[p] = Vec::new();
        lp.sort_unstable();
        elem_alive[p] = true;

        // |L_e \ L_p| for every live element touching L_p.
        for &i in &lp {
            for &e in &adj_elems[i] {
                if elem_alive[e] && e != p && w_stamp[e] != k {
                    w_stamp[e] = k;
                    elem_vars[e].retain(|&j| !eliminated[j]);
                    w[e] = elem_vars[e].iter().filter(|&&j| in_lp[j] != k).count();
                }
            }
        }

        let remaining = n - k - 1;
        for &i in &lp {
            adj_vars[i].retain(|&j| !eliminated[j] && in_lp[j] != k);
            adj_elems[i].retain(|&e| elem_alive[e]);
            adj_elems[i].push(p);
            let mut d = adj_vars[i].len() + lp.len() - 1;
            for &e in &adj_elems[i] {
                if e != p {
                    d += w[e];
                }
            }
            let d = d.min(remaining);
            if d != degree[i] {
                degree[i] = d;
                heap.push(Reverse((d, i)));
            }
        }
        elem_vars[p] = lp;
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_permutation(p: &[usize]) -> bool {
        let mut seen = vec![false; p.len()];
        p.iter().all(|&i| i < p.len() && !std::mem::replace(&mut seen[i], true))
    }

    #[test]
    fn arrow_matrix_hub_last() {
        let n = 8;
        let mut t = vec![];
        for i in 0..n {
            t.push((i, i, 4.0));
            if i > 0 {
                t.push((0, i, 1.0));
                t.push((i, 0, 1.0));
            }
        }
        let a = SparseMatrix::from_triplets(n, n, &t);
        let p = approximate_minimum_degree(&a);
        assert!(is_permutation(&p));
        assert!(p[..n - 2].iter().all(|&i| i != 0));
    }

    #[test]
    fn path_graph_permutation() {
        let n = 50;
        let mut t = vec![];
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        let a = SparseMatrix::from_triplets(n, n, &t);
        let p = approximate_minimum_degree(&a);
        assert!(is_permutation(&p));
        assert_eq!(p[0], 0);
    }
}
