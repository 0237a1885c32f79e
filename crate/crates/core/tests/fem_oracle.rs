use std::collections::HashSet;

use fsi_core::analysis::manufactured_case;
use fsi_core::fem::element::p2_values;
use fsi_core::fem::{
    assemble, build_space, element_matrices, element_matrix, interpolate, ElementGeometry, FieldTarget, Form,
    MaterialParams, QuadratureRule,
};
use fsi_core::mesh::{generate, EdgeTag, Region};
use num_rational::Rational64;
use num_traits::{One, Zero};
use proptest::prelude::*;

type Q = Rational64;

/// Polynomial in `(x, y)` of total degree ≤ 4, `c[a][b]` multiplies `x^a y^b`.
#[derive(Clone)]
struct Poly([[Q; 5]; 5]);

impl Poly {
    fn zero() -> Self {
        Poly([[Q::zero(); 5]; 5])
    }
    fn term(c: i64, a: usize, b: usize) -> Self {
        let mut p = Self::zero();
        p.0[a][b] = Q::from_integer(c);
        p
    }
    fn add(&self, o: &Poly) -> Poly {
        let mut r = self.clone();
        for a in 0..5 {
            for b in 0..5 {
                r.0[a][b] += o.0[a][b];
            }
        }
        r
    }
    fn scale(&self, s: Q) -> Poly {
        let mut r = self.clone();
        r.0.iter_mut().flatten().for_each(|c| *c *= s);
        r
    }
    fn mul(&self, o: &Poly) -> Poly {
        let mut r = Self::zero();
        for a in 0..5 {
            for b in 0..5 {
                if self.0[a][b].is_zero() {
                    continue;
                }
                for c in 0..5 - a {
                    for d in 0..5 - b {
                        if !o.0[c][d].is_zero() {
                            r.0[a + c][b + d] += self.0[a][b] * o.0[c][d];
                        }
                    }
                }
            }
        }
        r
    }
    fn dx(&self) -> Poly {
        let mut r = Self::zero();
        for a in 1..5 {
            for b in 0..5 {
                r.0[a - 1][b] = self.0[a][b] * Q::from_integer(a as i64);
            }
        }
        r
    }
    fn dy(&self) -> Poly {
        let mut r = Self::zero();
        for a in 0..5 {
            for b in 1..5 {
                r.0[a][b - 1] = self.0[a][b] * Q::from_integer(b as i64);
            }
        }
        r
    }
    /// Exact integral over the reference triangle: `∫ x^a y^b = a! b! / (a+b+2)!`.
    fn integrate(&self) -> Q {
        let fact = |k: usize| (1..=k as i64).product::<i64>();
        let mut s = Q::zero();
        for a in 0..5 {
            for b in 0..5 {
                if !self.0[a][b].is_zero() {
                    s += self.0[a][b] * Q::new(fact(a) * fact(b), fact(a + b + 2));
                }
            }
        }
        s
    }
}

fn to_f64(q: Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// Barycentric coordinates and `P2` basis on the reference triangle.
fn reference_basis() -> ([Poly; 3], [Poly; 6]) {
    let l0 = Poly::term(1, 0, 0)
        .add(&Poly::term(-1, 1, 0))
        .add(&Poly::term(-1, 0, 1));
    let l = [l0, Poly::term(1, 1, 0), Poly::term(1, 0, 1)];
    let vertex = |i: usize| l[i].mul(&l[i].scale(Q::from_integer(2)).add(&Poly::term(-1, 0, 0)));
    let edge = |i: usize, j: usize| l[i].mul(&l[j]).scale(Q::from_integer(4));
    let phi = [vertex(0), vertex(1), vertex(2), edge(0, 1), edge(1, 2), edge(2, 0)];
    (l, phi)
}

/// Rational stiffness `λ (div, div) + 2μ (ε, ε)` split into its two parts,
/// built from the tensor contraction `ε(φ_a e_c) : ε(φ_b e_d)`.
fn reference_stiffness_parts() -> (Vec<Vec<Q>>, Vec<Vec<Q>>) {
    let (_, phi) = reference_basis();
    let grads: Vec<[Poly; 2]> = phi.iter().map(|p| [p.dx(), p.dy()]).collect();
    let half = Q::new(1, 2);
    // ε(φ e_c)_{ij} = ½(δ_ic ∂_j φ + δ_jc ∂_i φ)
    let strain = |a: usize, c: usize, i: usize, j: usize| {
        let mut p = Poly::zero();
        if i == c {
            p = p.add(&grads[a][j].scale(half));
        }
        if j == c {
            p = p.add(&grads[a][i].scale(half));
        }
        p
    };
    let mut div = vec![vec![Q::zero(); 12]; 12];
    let mut eps = vec![vec![Q::zero(); 12]; 12];
    for a in 0..6 {
        for c in 0..2 {
            for b in 0..6 {
                for d in 0..2 {
                    div[2 * a + c][2 * b + d] = grads[a][c].mul(&grads[b][d]).integrate();
                    let mut s = Q::zero();
                    for i in 0..2 {
                        for j in 0..2 {
                            s += strain(a, c, i, j).mul(&strain(b, d, i, j)).integrate();
                        }
                    }
                    eps[2 * a + c][2 * b + d] = s;
                }
            }
        }
    }
    (div, eps)
}

const REFERENCE: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

#[test]
fn reference_stiffness_matches_rational_oracle() {
    let (div, eps) = reference_stiffness_parts();
    let geo = ElementGeometry::new(REFERENCE);
    for (lam, mu) in [(1.0, 1.0), (2.5, 0.7), (0.0, 3.0)] {
        let params = MaterialParams::new(lam, mu, 1.0).unwrap();
        let k = element_matrix(&geo, &params, Form::SolidStiffness);
        for r in 0..12 {
            for c in 0..12 {
                let want = lam * to_f64(div[r][c]) + 2.0 * mu * to_f64(eps[r][c]);
                assert!(
                    (k[(r, c)] - want).abs() <= 1e-12,
                    "({lam},{mu}) entry ({r},{c}): {} vs {want}",
                    k[(r, c)]
                );
            }
        }
        let f = element_matrix(&geo, &params, Form::FluidStrain);
        for r in 0..12 {
            for c in 0..12 {
                assert!((f[(r, c)] - to_f64(eps[r][c])).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn reference_mass_and_divergence_match_rational_oracle() {
    let (l, phi) = reference_basis();
    let geo = ElementGeometry::new(REFERENCE);
    let p = MaterialParams::default();
    let m = element_matrix(&geo, &p, Form::FluidMass);
    let ms = element_matrix(&geo, &p, Form::SolidMass);
    let b = element_matrix(&geo, &p, Form::Divergence);
    let mp = element_matrix(&geo, &p, Form::PressureMass);
    for a in 0..6 {
        for bb in 0..6 {
            let want = to_f64(phi[a].mul(&phi[bb]).integrate());
            for c in 0..2 {
                assert!((m[(2 * a + c, 2 * bb + c)] - want).abs() <= 1e-14);
                assert!((ms[(2 * a + c, 2 * bb + c)] - want).abs() <= 1e-14);
                assert_eq!(m[(2 * a + c, 2 * bb + 1 - c)], 0.0);
            }
        }
    }
    for q in 0..3 {
        for a in 0..6 {
            let g = [phi[a].dx(), phi[a].dy()];
            for c in 0..2 {
                let want = -to_f64(l[q].mul(&g[c]).integrate());
                assert!((b[(q, 2 * a + c)] - want).abs() <= 1e-14);
            }
        }
        for r in 0..3 {
            let want = to_f64(l[q].mul(&l[r]).integrate());
            assert!((mp[(q, r)] - want).abs() <= 1e-15);
        }
    }
    // ∫ over the reference triangle is 1/2
    let one = phi.iter().fold(Poly::zero(), |s, p| s.add(p));
    assert_eq!(one.integrate(), Q::one() / Q::from_integer(2));
}

#[test]
fn region_mismatch_is_rejected() {
    let m = generate(0).unwrap();
    let p = MaterialParams::default();
    let solid = (0..m.triangles.len())
        .find(|&t| m.triangles[t].region == Region::Solid)
        .unwrap();
    let fluid = (0..m.triangles.len())
        .find(|&t| m.triangles[t].region == Region::Fluid)
        .unwrap();
    assert!(element_matrices(&m, solid, &p, Form::FluidStrain).is_err());
    assert!(element_matrices(&m, fluid, &p, Form::SolidStiffness).is_err());
    assert!(element_matrices(&m, fluid, &p, Form::Divergence).is_ok());
}

#[test]
fn space_counts_by_enumeration() {
    let m = generate(0).unwrap();
    let s = build_space(&m);
    let fluid_vertices: HashSet<usize> = m
        .triangles
        .iter()
        .filter(|t| t.region == Region::Fluid)
        .flat_map(|t| t.vertices)
        .collect();
    assert_eq!(s.n_pressure(), fluid_vertices.len());
    assert_eq!(s.n_pressure(), 48);
    assert_eq!(s.n_interface(), 32);
    let gamma: HashSet<usize> = s.gamma_f_dofs().iter().copied().collect();
    assert!(s.interface_fluid_dofs().iter().all(|d| !gamma.contains(d)));
    // Γ_f DOFs are exactly nodes on the outer square
    for node in 0..s.fluid_nodes.len() {
        let p = s.node_coords[s.fluid_nodes[node]];
        let outer = p[0] == 0.0 || p[0] == 1.0 || p[1] == 0.0 || p[1] == 1.0;
        assert_eq!(gamma.contains(&(2 * node)), outer);
    }
    // interface nodes pair fluid and solid copies of the same point
    for &(f, so) in &s.interface {
        assert_eq!(s.node_coords[s.fluid_nodes[f]], s.node_coords[s.solid_nodes[so]]);
    }
    let on_gamma_s = m.vertices_on(EdgeTag::GammaS).iter().filter(|&&b| b).count();
    assert_eq!(4 * on_gamma_s, s.n_interface());
}

#[test]
fn rigid_motions_in_strain_kernel() {
    let s = build_space(&generate(1).unwrap());
    let mats = assemble(&s, &MaterialParams::default());
    for f in [
        |_x: f64, _y: f64| [1.0, 0.0],
        |_x: f64, _y: f64| [0.0, 1.0],
        |x: f64, y: f64| [-y, x],
    ] {
        let u = interpolate(&s, FieldTarget::Velocity, f);
        assert!(mats.fluid_strain.bilinear(&u, &u).abs() <= 1e-12);
        let w = interpolate(&s, FieldTarget::Displacement, f);
        let ku = mats.fluid_strain.mul_vec(&u);
        assert!(ku.iter().all(|v| v.abs() <= 1e-12));
        // solid stiffness annihilates rigid motions too
        assert!(mats.solid_stiffness.bilinear(&w, &w).abs() <= 1e-12);
    }
}

#[test]
fn interpolation_reproduces_linear_fields() {
    let s = build_space(&generate(0).unwrap());
    let f = |x: f64, y: f64| [2.0 * x + 3.0 * y + 1.0, x - y];
    let u = interpolate(&s, FieldTarget::Velocity, f);
    let rule = QuadratureRule::of_degree(6);
    for t in s.triangles_in(Region::Fluid) {
        let geo = ElementGeometry::of_triangle(&s.mesh, t);
        let dofs = s.fluid_tri_dofs(t);
        for l in &rule.points {
            let phi = p2_values(l);
            let [x, y] = geo.map(l);
            for c in 0..2 {
                let v: f64 = (0..6).map(|a| u[dofs[2 * a + c]] * phi[a]).sum();
                assert!((v - f(x, y)[c]).abs() <= 1e-14);
            }
        }
    }
    assert!(interpolate(&s, FieldTarget::Displacement, |_, _| [0.0, 0.0])
        .iter()
        .all(|&v| v == 0.0));
    let p = interpolate(&s, FieldTarget::Pressure, f);
    assert_eq!(p.len(), s.n_pressure());
}

#[test]
fn manufactured_velocity_vanishes_at_interface_nodes() {
    let s = build_space(&generate(1).unwrap());
    let case = manufactured_case(1.0).unwrap();
    let u = interpolate(&s, FieldTarget::Velocity, |x, y| case.velocity(x, y));
    for &d in s.interface_fluid_dofs() {
        assert!(u[d].abs() <= 1e-20);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// With `μ ≡ 1`, the local divergence form equals `−∮ v·ν`.
    #[test]
    fn divergence_theorem_per_element(
        coords in prop::array::uniform3(prop::array::uniform2(-1.0f64..1.0)),
        v in prop::array::uniform12(-1.0f64..1.0),
    ) {
        let [a, b, c] = coords;
        let area2 = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        prop_assume!(area2 > 0.05);
        let geo = ElementGeometry::new(coords);
        let bl = element_matrix(&geo, &MaterialParams::default(), Form::Divergence);
        let lhs: f64 = (0..3).map(|q| (0..12).map(|k| bl[(q, k)] * v[k]).sum::<f64>()).sum();
        // three-point Gauss on each edge
        let gp = [(-(0.6f64).sqrt(), 5.0 / 9.0), (0.0, 8.0 / 9.0), ((0.6f64).sqrt(), 5.0 / 9.0)];
        let mut flux = 0.0;
        for (i, j) in [(0usize, 1usize), (1, 2), (2, 0)] {
            let (p, q) = (coords[i], coords[j]);
            let normal = [q[1] - p[1], p[0] - q[0]]; // outward, length = edge length
            for &(s, w) in &gp {
                let t = 0.5 * (s + 1.0);
                let mut l = [0.0; 3];
                l[i] = 1.0 - t;
                l[j] = t;
                let phi = p2_values(&l);
                let vx: f64 = (0..6).map(|k| v[2 * k] * phi[k]).sum();
                let vy: f64 = (0..6).map(|k| v[2 * k + 1] * phi[k]).sum();
                flux += 0.5 * w * (vx * normal[0] + vy * normal[1]);
            }
        }
        prop_assert!((lhs + flux).abs() <= 1e-12, "{lhs} vs {}", -flux);
    }

    #[test]
    fn local_matrices_symmetric_and_mass_row_sums(
        coords in prop::array::uniform3(prop::array::uniform2(-1.0f64..1.0)),
        lam in 0.0f64..5.0,
        mu in 0.1f64..5.0,
    ) {
        let [a, b, c] = coords;
        let area2 = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        prop_assume!(area2 > 0.05);
        let geo = ElementGeometry::new(coords);
        let p = MaterialParams::new(lam, mu, 1.0).unwrap();
        for form in [Form::FluidMass, Form::FluidStrain, Form::SolidStiffness, Form::SolidMass] {
            let m = element_matrix(&geo, &p, form);
            prop_assert!((&m - m.transpose()).abs().max() <= 1e-13);
        }
        let m = element_matrix(&geo, &p, Form::FluidMass);
        let total: f64 = (0..12).step_by(2).map(|r| (0..12).step_by(2).map(|c| m[(r, c)]).sum::<f64>()).sum();
        prop_assert!((total - 0.5 * area2).abs() <= 1e-13);
    }
}
