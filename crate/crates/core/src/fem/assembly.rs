//! Global sparse matrices of every bilinear form.
//!
//! Fluid matrices cover all fluid velocity DOFs, including those on `Γ_f`;
//! the constraint is applied when the saddle system is formed.

use rayon::prelude::*;

use super::element::{element_matrix_with, ElementGeometry, Form};
use super::quadrature::{QuadratureRule, SYSTEM_DEGREE};
use super::space::TaylorHoodSpace;
use super::MaterialParams;
use crate::sparse::{SparseMatrix, TripletBuilder};

#[derive(Debug, Clone)]
pub struct GlobalMatrices {
    pub fluid_mass: SparseMatrix,
    pub fluid_strain: SparseMatrix,
    /// `B[q][v] = −(ψ_q, div φ_v)`, pressure rows by velocity columns.
    pub divergence: SparseMatrix,
    pub pressure_mass: SparseMatrix,
    pub solid_mass: SparseMatrix,
    pub solid_stiffness: SparseMatrix,
}

pub fn assemble(space: &TaylorHoodSpace, params: &MaterialParams) -> GlobalMatrices {
    GlobalMatrices {
        fluid_mass: assemble_form(space, params, Form::FluidMass),
        fluid_strain: assemble_form(space, params, Form::FluidStrain),
        divergence: assemble_form(space, params, Form::Divergence),
        pressure_mass: assemble_form(space, params, Form::PressureMass),
        solid_mass: assemble_form(space, params, Form::SolidMass),
        solid_stiffness: assemble_form(space, params, Form::SolidStiffness),
    }
}

pub fn assemble_form(space: &TaylorHoodSpace, params: &MaterialParams, form: Form) -> SparseMatrix {
    let (nrows, ncols) = match form {
        Form::FluidMass | Form::FluidStrain => (space.n_velocity(), space.n_velocity()),
        Form::Divergence => (space.n_pressure(), space.n_velocity()),
        Form::PressureMass => (space.n_pressure(), space.n_pressure()),
        Form::SolidMass | Form::SolidStiffness => (space.n_solid(), space.n_solid()),
    };
    let rule = QuadratureRule::of_degree(SYSTEM_DEGREE);
    let tris: Vec<usize> = space.triangles_in(form.region()).collect();
    tris.par_iter()
        .fold(
            || TripletBuilder::new(nrows, ncols),
            |mut b, &t| {
                let geo = ElementGeometry::of_triangle(&space.mesh, t);
                let m = element_matrix_with(&geo, params, form, &rule);
                let (rows, cols): (Vec<usize>, Vec<usize>) = match form {
                    Form::FluidMass | Form::FluidStrain => {
                        let d = space.fluid_tri_dofs(t).to_vec();
                        (d.clone(), d)
                    }
                    Form::Divergence => (space.pressure_tri_dofs(t).to_vec(), space.fluid_tri_dofs(t).to_vec()),
                    Form::PressureMass => {
                        let d = space.pressure_tri_dofs(t).to_vec();
                        (d.clone(), d)
                    }
                    Form::SolidMass | Form::SolidStiffness => {
                        let d = space.solid_tri_dofs(t).to_vec();
                        (d.clone(), d)
                    }
                };
                for (a, &r) in rows.iter().enumerate() {
                    for (bcol, &c) in cols.iter().enumerate() {
                        b.add(r, c, m[(a, bcol)]);
                    }
                }
                b
            },
        )
        .reduce(
            || TripletBuilder::new(nrows, ncols),
            |mut a, b| {
                a.extend(b);
                a
            },
        )
        .build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::space::{build_space, interpolate, FieldTarget};
    use crate::mesh::generate;

    #[test]
    fn mass_totals() {
        let s = build_space(&generate(1).unwrap());
        let g = assemble(&s, &MaterialParams::default());
        let one = interpolate(&s, FieldTarget::Velocity, |_, _| [1.0, 0.0]);
        assert!((g.fluid_mass.bilinear(&one, &one) - 8.0 / 9.0).abs() < 1e-13);
        let ones = vec![1.0; s.n_pressure()];
        assert!((g.pressure_mass.bilinear(&ones, &ones) - 8.0 / 9.0).abs() < 1e-13);
        let ws = interpolate(&s, FieldTarget::Displacement, |_, _| [0.0, 1.0]);
        assert!((g.solid_mass.bilinear(&ws, &ws) - 1.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn symmetric_forms() {
        let s = build_space(&generate(0).unwrap());
        let g = assemble(&s, &MaterialParams::new(2.0, 0.7, 1.0).unwrap());
        for m in [
            &g.fluid_mass,
            &g.fluid_strain,
            &g.pressure_mass,
            &g.solid_mass,
            &g.solid_stiffness,
        ] {
            assert!(m.asymmetry() < 1e-14);
        }
    }

    #[test]
    fn strain_patch_test() {
        let s = build_space(&generate(1).unwrap());
        let g = assemble(&s, &MaterialParams::default());
        for f in [
            |_x: f64, _y: f64| [1.0, 0.0],
            |_x, _y| [0.0, 1.0],
            |x: f64, y: f64| [-y, x],
        ] {
            let v = interpolate(&s, FieldTarget::Velocity, f);
            assert!(g.fluid_strain.bilinear(&v, &v).abs() < 1e-12);
        }
    }

    #[test]
    fn divergence_of_linear_field() {
        // div(x, y) = 2, so b(v, 1) = −2·|Ω_f|.
        let s = build_space(&generate(0).unwrap());
        let g = assemble(&s, &MaterialParams::default());
        let v = interpolate(&s, FieldTarget::Velocity, |x, y| [x, y]);
        let ones = vec![1.0; s.n_pressure()];
        assert!((g.divergence.bilinear(&ones, &v) + 16.0 / 9.0).abs() < 1e-13);
    }
}
