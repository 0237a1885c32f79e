//! Shape functions and element matrices.
//!
//! Local `P2` node order: vertices `0, 1, 2`, then the midpoints of edges
//! `(0,1)`, `(1,2)`, `(2,0)`. Vector fields interleave components, so local
//! DOF `2a + c` is component `c` of node `a`.

use nalgebra::DMatrix;

use super::quadrature::{QuadratureRule, SYSTEM_DEGREE};
use super::MaterialParams;
use crate::error::{FsiError, Result};
use crate::mesh::{Region, TriMesh};

/// Vertex pairs of the three edge nodes.
pub const P2_EDGES: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

/// Bilinear forms with element-level matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Form {
    /// `(u, v)` on a fluid element, 12×12.
    FluidMass,
    /// `(ε(u), ε(v))` on a fluid element, 12×12.
    FluidStrain,
    /// `b(v, μ) = −(μ, div v)`, rows pressure (3), columns velocity (12).
    Divergence,
    /// `(p, q)` for `P1` pressures, 3×3.
    PressureMass,
    /// `(w, v)` on a solid element, 12×12.
    SolidMass,
    /// `(σ(w), ε(v))` on a solid element, 12×12.
    SolidStiffness,
}

impl Form {
    pub fn name(self) -> &'static str {
        match self {
            Form::FluidMass => "fluid_mass",
            Form::FluidStrain => "fluid_strain",
            Form::Divergence => "divergence",
            Form::PressureMass => "pressure_mass",
            Form::SolidMass => "solid_mass",
            Form::SolidStiffness => "solid_stiffness",
        }
    }

    pub fn region(self) -> Region {
        match self {
            Form::SolidMass | Form::SolidStiffness => Region::Solid,
            _ => Region::Fluid,
        }
    }
}

/// Affine triangle with precomputed barycentric gradients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub coords: [[f64; 2]; 3],
    pub area: f64,
    pub grad_bary: [[f64; 2]; 3],
}

impl ElementGeometry {
    pub fn new(coords: [[f64; 2]; 3]) -> Self {
        let [p0, p1, p2] = coords;
        let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        let grad_bary = [
            [(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det],
            [(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det],
            [(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det],
        ];
        ElementGeometry {
            coords,
            area: 0.5 * det,
            grad_bary,
        }
    }

    pub fn of_triangle(mesh: &TriMesh, t: usize) -> Self {
        Self::new(mesh.triangle_coords(t))
    }

    /// Physical point of barycentric coordinates `l`.
    pub fn map(&self, l: &[f64; 3]) -> [f64; 2] {
        let c = &self.coords;
        [
            l[0] * c[0][0] + l[1] * c[1][0] + l[2] * c[2][0],
            l[0] * c[0][1] + l[1] * c[1][1] + l[2] * c[2][1],
        ]
    }

    /// Physical positions of the six `P2` nodes.
    pub fn p2_nodes(&self) -> [[f64; 2]; 6] {
        let c = &self.coords;
        let mid = |a: usize, b: usize| [0.5 * (c[a][0] + c[b][0]), 0.5 * (c[a][1] + c[b][1])];
        [c[0], c[1], c[2], mid(0, 1), mid(1, 2), mid(2, 0)]
    }

    /// Gradients of the six `P2` basis functions.
    pub fn p2_gradients(&self, l: &[f64; 3]) -> [[f64; 2]; 6] {
        let g = &self.grad_bary;
        let mut out = [[0.0; 2]; 6];
        for a in 0..3 {
            let s = 4.0 * l[a] - 1.0;
            out[a] = [s * g[a][0], s * g[a][1]];
        }
        for (k, &(a, b)) in P2_EDGES.iter().enumerate() {
            out[3 + k] = [
                4.0 * (l[b] * g[a][0] + l[a] * g[b][0]),
                4.0 * (l[b] * g[a][1] + l[a] * g[b][1]),
            ];
        }
        out
    }
}

/// Values of the six `P2` basis functions.
pub fn p2_values(l: &[f64; 3]) -> [f64; 6] {
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[0] * l[1],
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
    ]
}

/// Element matrix of `form` without a region check.
pub fn element_matrix(geo: &ElementGeometry, params: &MaterialParams, form: Form) -> DMatrix<f64> {
    element_matrix_with(geo, params, form, &QuadratureRule::of_degree(SYSTEM_DEGREE))
}

pub(crate) fn element_matrix_with(
    geo: &ElementGeometry,
    params: &MaterialParams,
    form: Form,
    rule: &QuadratureRule,
) -> DMatrix<f64> {
    let (rows, cols) = match form {
        Form::Divergence => (3, 12),
        Form::PressureMass => (3, 3),
        _ => (12, 12),
    };
    let mut m = DMatrix::zeros(rows, cols);
    for (l, &w) in rule.points.iter().zip(&rule.weights) {
        let wq = w * 2.0 * geo.area;
        match form {
            Form::FluidMass | Form::SolidMass => {
                let phi = p2_values(l);
                for a in 0..6 {
                    for b in 0..6 {
                        let v = wq * phi[a] * phi[b];
                        m[(2 * a, 2 * b)] += v;
                        m[(2 * a + 1, 2 * b + 1)] += v;
                    }
                }
            }
            Form::FluidStrain | Form::SolidStiffness => {
                let g = geo.p2_gradients(l);
                let (lam, two_mu) = match form {
                    Form::FluidStrain => (0.0, 1.0),
                    _ => (params.lame_lambda, 2.0 * params.lame_mu),
                };
                for a in 0..6 {
                    for c in 0..2 {
                        for b in 0..6 {
                            for d in 0..2 {
                                let dot = if c == d {
                                    g[a][0] * g[b][0] + g[a][1] * g[b][1]
                                } else {
                                    0.0
                                };
                                let eps = 0.5 * (dot + g[a][d] * g[b][c]);
                                let div = g[a][c] * g[b][d];
                                m[(2 * a + c, 2 * b + d)] += wq * (lam * div + two_mu * eps);
                            }
                        }
                    }
                }
            }
            Form::Divergence => {
                let g = geo.p2_gradients(l);
                for q in 0..3 {
                    for a in 0..6 {
                        for c in 0..2 {
                            m[(q, 2 * a + c)] -= wq * l[q] * g[a][c];
                        }
                    }
                }
            }
            Form::PressureMass => {
                for p in 0..3 {
                    for q in 0..3 {
                        m[(p, q)] += wq * l[p] * l[q];
                    }
                }
            }
        }
    }
    m
}

/// Element matrix of `form` on triangle `t`, checking that the triangle
/// lies in the region the form is defined on.
pub fn element_matrices(mesh: &TriMesh, t: usize, params: &MaterialParams, form: Form) -> Result<DMatrix<f64>> {
    let found = mesh.triangles[t].region;
    let expected = form.region();
    if found != expected {
        return Err(FsiError::RegionMismatch {
            form: form.name(),
            expected: region_name(expected),
            found: region_name(found),
            triangle: t,
        });
    }
    Ok(element_matrix(&ElementGeometry::of_triangle(mesh, t), params, form))
}

fn region_name(r: Region) -> &'static str {
    match r {
        Region::Fluid => "fluid",
        Region::Solid => "solid",
    }
}
