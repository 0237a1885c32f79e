//! Pressure decomposition `π = q₀ + c₀` and the variational interface
//! fluxes.

use super::{FsiState, ResolventData, ResolventSolver};
use crate::error::{FsiError, Result};
use crate::fem::TaylorHoodSpace;
use crate::mesh::{EdgeTag, Region};

/// Splits a pressure into its mean-zero part and its mean:
/// `c₀ = ∫π / |Ω_f|`, `q₀ = π − c₀`.
pub fn decompose_pressure(space: &TaylorHoodSpace, pi: &[f64]) -> (Vec<f64>, f64) {
    let (integral, area) = pressure_integral(space, pi);
    let c0 = integral / area;
    (pi.iter().map(|p| p - c0).collect(), c0)
}

/// `(∫_{Ω_f} π, |Ω_f|)` for a `P1` pressure.
pub fn pressure_integral(space: &TaylorHoodSpace, pi: &[f64]) -> (f64, f64) {
    let mut integral = 0.0;
    let mut area = 0.0;
    for t in space.triangles_in(Region::Fluid) {
        let a = space.mesh.signed_area(t);
        let d = space.pressure_tri_dofs(t);
        integral += a * (pi[d[0]] + pi[d[1]] + pi[d[2]]) / 3.0;
        area += a;
    }
    (integral, area)
}

fn check_trace(solver: &ResolventSolver, g: &[f64]) -> Result<()> {
    if g.len() != solver.space.n_interface() {
        return Err(FsiError::Contract(format!(
            "interface trace has length {}, expected {}",
            g.len(),
            solver.space.n_interface()
        )));
    }
    Ok(())
}

/// Fluid traction functional `⟨ε(u)ν − πν, g⟩` evaluated through the
/// momentum residual against an extension of `g`.
///
/// `extension` is a fluid vector with trace `g` and zero on `Γ_f`; by
/// default the zero extension is used.
pub fn interface_flux(
    solver: &ResolventSolver,
    state: &FsiState,
    pi: &[f64],
    data: &ResolventData,
    g: &[f64],
    extension: Option<&[f64]>,
) -> Result<f64> {
    check_trace(solver, g)?;
    let space = &solver.space;
    let ext = match extension {
        Some(e) => {
            if e.len() != space.n_velocity() {
                return Err(FsiError::Contract("extension is not a fluid vector".into()));
            }
            let trace = space.fluid_trace(e);
            if trace.iter().zip(g).any(|(a, b)| a != b) {
                return Err(FsiError::Contract("extension does not have the requested trace".into()));
            }
            if space.gamma_f_dofs().iter().any(|&d| e[d] != 0.0) {
                return Err(FsiError::Contract("extension does not vanish on Γ_f".into()));
            }
            e.to_vec()
        }
        None => space.fluid_from_interface(g),
    };
    let r = solver.fluid_residual(&state.u, pi, data);
    Ok(r.iter().zip(&ext).map(|(a, b)| a * b).sum())
}

/// Solid traction functional `⟨σ(w)ν, g⟩` with `ν` the fluid outward
/// normal, through the solid residual against an extension of `g`.
pub fn solid_flux(
    solver: &ResolventSolver,
    state: &FsiState,
    data: &ResolventData,
    g: &[f64],
    extension: Option<&[f64]>,
) -> Result<f64> {
    check_trace(solver, g)?;
    let space = &solver.space;
    let ext = match extension {
        Some(e) => {
            if e.len() != space.n_solid() || space.solid_trace(e).iter().zip(g).any(|(a, b)| a != b) {
                return Err(FsiError::Contract(
                    "solid extension does not have the requested trace".into(),
                ));
            }
            e.to_vec()
        }
        None => {
            let mut e = vec![0.0; space.n_solid()];
            for (k, &d) in space.interface_solid_dofs().iter().enumerate() {
                e[d] = g[k];
            }
            e
        }
    };
    let r = solver.solid_residual(&state.w, data);
    Ok(-r.iter().zip(&ext).map(|(a, b)| a * b).sum::<f64>())
}

/// Outward unit normal of the fluid on an interface edge.
fn edge_normal(space: &TaylorHoodSpace, edge: usize) -> [f64; 2] {
    let [a, b] = space.mesh.edges[edge].vertices;
    let (pa, pb) = (space.mesh.vertices[a], space.mesh.vertices[b]);
    if pa[0] == pb[0] {
        if pa[0] < 0.5 {
            [1.0, 0.0]
        } else {
            [-1.0, 0.0]
        }
    } else if pa[1] < 0.5 {
        [0.0, 1.0]
    } else {
        [0.0, -1.0]
    }
}

/// Interface trace whose nodal values are the fluid outward normal, with
/// the two side normals summed at corners so that `g·ν = 1` on all of `Γ_s`.
pub fn interface_normal_trace(space: &TaylorHoodSpace) -> Vec<f64> {
    let nv = space.mesh.vertices.len();
    let mut normals: Vec<Vec<[f64; 2]>> = vec![Vec::new(); space.node_coords.len()];
    for (e, edge) in space.mesh.edges.iter().enumerate() {
        if edge.tag != EdgeTag::GammaS {
            continue;
        }
        let nu = edge_normal(space, e);
        for node in [edge.vertices[0], edge.vertices[1], nv + e] {
            if !normals[node].contains(&nu) {
                normals[node].push(nu);
            }
        }
    }
    let mut g = vec![0.0; space.n_interface()];
    for (p, &(f, _)) in space.interface.iter().enumerate() {
        for nu in &normals[space.fluid_nodes[f]] {
            g[2 * p] += nu[0];
            g[2 * p + 1] += nu[1];
        }
    }
    g
}

/// `(∫_{Γ_s} π g·ν ds, ∫_{Γ_s} q ds, |Γ_s|)` for `P1` fields `π`, `q` and
/// the normal trace `g`.
fn interface_integrals(space: &TaylorHoodSpace, pi: &[f64], q: &[f64], g: &[f64]) -> (f64, f64, f64) {
    let nv = space.mesh.vertices.len();
    let mut pair_of = vec![usize::MAX; space.node_coords.len()];
    for (p, &(f, _)) in space.interface.iter().enumerate() {
        pair_of[space.fluid_nodes[f]] = p;
    }
    // Three-point Gauss on [0, 1] integrates the cubic π·(g·ν) exactly.
    let s = (0.6f64).sqrt();
    let pts = [0.5 * (1.0 - s), 0.5, 0.5 * (1.0 + s)];
    let wts = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];
    let (mut ipg, mut iq, mut len) = (0.0, 0.0, 0.0);
    for (e, edge) in space.mesh.edges.iter().enumerate() {
        if edge.tag != EdgeTag::GammaS {
            continue;
        }
        let [a, b] = edge.vertices;
        let (pa, pb) = (space.mesh.vertices[a], space.mesh.vertices[b]);
        let h = ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt();
        let nu = edge_normal(space, e);
        let gn = |node: usize| {
            let p = pair_of[node];
            g[2 * p] * nu[0] + g[2 * p + 1] * nu[1]
        };
        let (ga, gm, gb) = (gn(a), gn(nv + e), gn(b));
        let pd = |v: usize| space.pressure_dof_of(v).expect("interface vertices carry pressure");
        let (pia, pib) = (pi[pd(a)], pi[pd(b)]);
        let (qa, qb) = (q[pd(a)], q[pd(b)]);
        for (&t, &w) in pts.iter().zip(&wts) {
            // quadratic Lagrange basis on the edge
            let gt = ga * (1.0 - t) * (1.0 - 2.0 * t) + gm * 4.0 * t * (1.0 - t) + gb * t * (2.0 * t - 1.0);
            let pt = pia * (1.0 - t) + pib * t;
            let qt = qa * (1.0 - t) + qb * t;
            ipg += w * h * pt * gt;
            iq += w * h * qt;
        }
        len += h;
    }
    (ipg, iq, len)
}

/// Interface-averaged pressure constant
/// `c₀ = [⟨(ε(u)ν − σ(w)ν)·ν, 1⟩ − ∫_{Γ_s} q₀] / |Γ_s|`, with the normal
/// traction of the fluid evaluated variationally as
/// `interface_flux(g) + ∫ π g·ν` for the normal trace `g`.
pub fn recover_c0(
    solver: &ResolventSolver,
    state: &FsiState,
    pi: &[f64],
    q0: &[f64],
    data: &ResolventData,
) -> Result<f64> {
    let space = &solver.space;
    if pi.len() != space.n_pressure() || q0.len() != space.n_pressure() {
        return Err(FsiError::Contract("pressure vectors do not match the space".into()));
    }
    let g = interface_normal_trace(space);
    let ff = interface_flux(solver, state, pi, data, &g, None)?;
    let fs = solid_flux(solver, state, data, &g, None)?;
    let (ipg, iq, len) = interface_integrals(space, pi, q0, &g);
    Ok((ff + ipg - fs - iq) / len)
}
