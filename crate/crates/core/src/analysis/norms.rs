//! Error norms against the manufactured solution.

use rayon::prelude::*;
use serde::Serialize;

use super::manufactured::ManufacturedCase;
use crate::error::{FsiError, Result};
use crate::fem::element::p2_values;
use crate::fem::quadrature::ERROR_DEGREE;
use crate::fem::{ElementGeometry, QuadratureRule, TaylorHoodSpace};
use crate::mesh::Region;
use crate::solver::FsiState;
use crate::sparse::{SparseMatrix, TripletBuilder};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorNorms {
    /// Full `H¹(Ω_f)` norm of `u_h − u`.
    pub eu_h1: f64,
    /// `‖ε(u_h − u)‖_{0,Ω_f}`.
    pub eu_eps: f64,
    /// `‖π_h − π‖_{0,Ω_f}`.
    pub epi_l2: f64,
    /// `√[(σ(e), ε(e)) + ‖e‖²]`, `e = w_h − w`.
    pub ew_energy: f64,
    /// Full `H¹(Ω_s)` norm of `w_h − w`.
    pub ew_h1_full: f64,
}

/// Per-element `(‖e‖², ‖∇e‖², ‖ε(e)‖²)` of a `P2` vector field minus
/// `exact`; pass `None` for a zero exact field.
fn vector_error_parts(
    space: &TaylorHoodSpace,
    region: Region,
    coeffs: &[f64],
    exact: Option<&ManufacturedCase>,
    rule: &QuadratureRule,
) -> (f64, f64, f64) {
    let tris: Vec<usize> = space.triangles_in(region).collect();
    tris.par_iter()
        .map(|&t| {
            let geo = ElementGeometry::of_triangle(&space.mesh, t);
            let dofs = match region {
                Region::Fluid => space.fluid_tri_dofs(t),
                Region::Solid => space.solid_tri_dofs(t),
            };
            let mut acc = (0.0, 0.0, 0.0);
            for (l, &w) in rule.points.iter().zip(&rule.weights) {
                let wq = w * 2.0 * geo.area;
                let phi = p2_values(l);
                let g = geo.p2_gradients(l);
                let mut v = [0.0; 2];
                let mut dv = [[0.0; 2]; 2];
                for a in 0..6 {
                    for c in 0..2 {
                        let coef = coeffs[dofs[2 * a + c]];
                        v[c] += coef * phi[a];
                        dv[c][0] += coef * g[a][0];
                        dv[c][1] += coef * g[a][1];
                    }
                }
                if let Some(case) = exact {
                    let [x, y] = geo.map(l);
                    let u = case.velocity(x, y);
                    let du = case.velocity_gradient(x, y);
                    for c in 0..2 {
                        v[c] -= u[c];
                        for d in 0..2 {
                            dv[c][d] -= du[c][d];
                        }
                    }
                }
                let off = 0.5 * (dv[0][1] + dv[1][0]);
                acc.0 += wq * (v[0] * v[0] + v[1] * v[1]);
                acc.1 += wq * dv.iter().flatten().map(|a| a * a).sum::<f64>();
                acc.2 += wq * (dv[0][0] * dv[0][0] + dv[1][1] * dv[1][1] + 2.0 * off * off);
            }
            acc
        })
        .reduce(|| (0.0, 0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2))
}

fn pressure_l2_sq(space: &TaylorHoodSpace, pi: &[f64], rule: &QuadratureRule) -> f64 {
    let tris: Vec<usize> = space.triangles_in(Region::Fluid).collect();
    tris.par_iter()
        .map(|&t| {
            let geo = ElementGeometry::of_triangle(&space.mesh, t);
            let dofs = space.pressure_tri_dofs(t);
            rule.points
                .iter()
                .zip(&rule.weights)
                .map(|(l, &w)| {
                    let p: f64 = (0..3).map(|q| pi[dofs[q]] * l[q]).sum();
                    w * 2.0 * geo.area * p * p
                })
                .sum::<f64>()
        })
        .sum()
}

/// Error norms of `(state.u, pi, state.w)` against the exact solution
/// `(u, 0, 0)` of `case`.
pub fn error_norms(
    space: &TaylorHoodSpace,
    state: &FsiState,
    pi: &[f64],
    case: &ManufacturedCase,
    mats: &crate::fem::GlobalMatrices,
) -> Result<ErrorNorms> {
    if state.u.len() != space.n_velocity() || state.w.len() != space.n_solid() || pi.len() != space.n_pressure() {
        return Err(FsiError::Contract(format!(
            "state sizes (u {}, w {}, pi {}) do not match the space (u {}, w {}, pi {})",
            state.u.len(),
            state.w.len(),
            pi.len(),
            space.n_velocity(),
            space.n_solid(),
            space.n_pressure()
        )));
    }
    let rule = QuadratureRule::of_degree(ERROR_DEGREE);
    let (u0, u1, ueps) = vector_error_parts(space, Region::Fluid, &state.u, Some(case), &rule);
    let p = pressure_l2_sq(space, pi, &rule);
    // the solid error is a P2 field, degree 4 is exact
    let low = QuadratureRule::of_degree(4);
    let (w0, w1, _) = vector_error_parts(space, Region::Solid, &state.w, None, &low);
    let energy = mats.solid_stiffness.bilinear(&state.w, &state.w) + mats.solid_mass.bilinear(&state.w, &state.w);
    Ok(ErrorNorms {
        eu_h1: (u0 + u1).sqrt(),
        eu_eps: ueps.sqrt(),
        epi_l2: p.sqrt(),
        ew_energy: energy.max(0.0).sqrt(),
        ew_h1_full: (w0 + w1).sqrt(),
    })
}

/// Gram matrix of `(∇u, ∇v)` over a region, vector `P2`.
pub fn gradient_gram(space: &TaylorHoodSpace, region: Region) -> SparseMatrix {
    let rule = QuadratureRule::of_degree(2);
    let n = match region {
        Region::Fluid => space.n_velocity(),
        Region::Solid => space.n_solid(),
    };
    let mut tb = TripletBuilder::new(n, n);
    for t in space.triangles_in(region) {
        let geo = ElementGeometry::of_triangle(&space.mesh, t);
        let dofs = match region {
            Region::Fluid => space.fluid_tri_dofs(t),
            Region::Solid => space.solid_tri_dofs(t),
        };
        let mut k = [[0.0; 6]; 6];
        for (l, &w) in rule.points.iter().zip(&rule.weights) {
            let g = geo.p2_gradients(l);
            for a in 0..6 {
                for b in 0..6 {
                    k[a][b] += w * 2.0 * geo.area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                }
            }
        }
        for a in 0..6 {
            for b in 0..6 {
                for c in 0..2 {
                    tb.add(dofs[2 * a + c], dofs[2 * b + c], k[a][b]);
                }
            }
        }
    }
    tb.build()
}
