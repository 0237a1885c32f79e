//! Dense monolithic coupled solve, kept as an oracle for small meshes.
//!
//! Unknowns are the free fluid velocity, the interior solid displacement
//! and the pressure. The interface displacement is eliminated through
//! `w|Γ = (1/λ)(u + w*)|Γ`, and fluid test functions act on the solid
//! through their zero extension.

use nalgebra::DMatrix;

use super::{FsiState, ResolventData};
use crate::error::{FsiError, Result};
use crate::fem::{assemble, MaterialParams, TaylorHoodSpace};
use crate::sparse::dense::dense_solve;

/// Returns the recovered state, its `z` set to `λw − w*`, with pressure.
pub fn monolithic_solve(space: &TaylorHoodSpace, params: &MaterialParams, data: &ResolventData) -> Result<FsiState> {
    params.validate()?;
    let lam = params.shift;
    let mats = assemble(space, params);
    let free = space.free_velocity_dofs();
    let interior = space.solid_interior_dofs();
    let iface_f = space.interface_fluid_dofs();
    let iface_s = space.interface_solid_dofs();
    let (nf, nj, np) = (free.len(), interior.len(), space.n_pressure());
    let n = nf + nj + np;
    if data.fluid_load.len() != space.n_velocity() || data.w_star.len() != space.n_solid() {
        return Err(FsiError::Contract("data does not match the space".into()));
    }

    let mut fpos = vec![usize::MAX; space.n_velocity()];
    for (k, &d) in free.iter().enumerate() {
        fpos[d] = k;
    }
    // Solid DOF → column of the unknown it depends on: interior DOFs map to
    // their own unknown, interface DOFs to the fluid unknown (scaled 1/λ).
    let mut spos_interior = vec![usize::MAX; space.n_solid()];
    for (k, &d) in interior.iter().enumerate() {
        spos_interior[d] = nf + k;
    }
    let mut s_iface = vec![usize::MAX; space.n_solid()];
    for (g, &d) in iface_s.iter().enumerate() {
        s_iface[d] = g;
    }

    let ss = mats.solid_stiffness.add_scaled(&mats.solid_mass, lam * lam + 1.0);
    let forcing: Vec<f64> = data.w_star.iter().zip(&data.z_star).map(|(w, z)| lam * w + z).collect();
    let msf = mats.solid_mass.mul_vec(&forcing);

    let mut a = DMatrix::zeros(n, n);
    let mut rhs = vec![0.0; n];

    // fluid rows
    for (i, j, v) in mats.fluid_strain.add_scaled(&mats.fluid_mass, lam).iter() {
        if fpos[i] != usize::MAX && fpos[j] != usize::MAX {
            a[(fpos[i], fpos[j])] += v;
        }
    }
    for (q, j, v) in mats.divergence.iter() {
        if fpos[j] != usize::MAX {
            a[(fpos[j], nf + nj + q)] += v;
            a[(nf + nj + q, fpos[j])] += v;
        }
    }
    for (k, &d) in free.iter().enumerate() {
        rhs[k] = data.fluid_load[d];
    }

    // Solid row `r` of S_s w − M_s f, placed into matrix row `row`.
    let add_solid_row = |a: &mut DMatrix<f64>, rhs: &mut [f64], row: usize, r: usize| {
        for (c, v) in ss.row(r) {
            if spos_interior[c] != usize::MAX {
                a[(row, spos_interior[c])] += v;
            } else {
                let g = s_iface[c];
                a[(row, fpos[iface_f[g]])] += v / lam;
                rhs[row] -= v * data.w_star[c] / lam;
            }
        }
        rhs[row] += msf[r];
    };
    for (g, &sd) in iface_s.iter().enumerate() {
        let row = fpos[iface_f[g]];
        add_solid_row(&mut a, &mut rhs, row, sd);
    }
    for (k, &sd) in interior.iter().enumerate() {
        add_solid_row(&mut a, &mut rhs, nf + k, sd);
    }

    let x = dense_solve(&a, &rhs)?;

    let mut u = vec![0.0; space.n_velocity()];
    for (k, &d) in free.iter().enumerate() {
        u[d] = x[k];
    }
    let mut w = vec![0.0; space.n_solid()];
    for (k, &d) in interior.iter().enumerate() {
        w[d] = x[nf + k];
    }
    for (g, &sd) in iface_s.iter().enumerate() {
        w[sd] = (u[iface_f[g]] + data.w_star[sd]) / lam;
    }
    let z = w.iter().zip(&data.w_star).map(|(w, ws)| lam * w - ws).collect();
    Ok(FsiState {
        u,
        w,
        z,
        pi: Some(x[nf + nj..].to_vec()),
    })
}
