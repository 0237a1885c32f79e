//! Degree-of-freedom tables for the Taylor-Hood pair on the fluid and the
//! vector `P2` space on the solid.
//!
//! Global `P2` nodes are the mesh vertices followed by the edge midpoints
//! (node `nv + e` for edge `e`). Each field numbers the nodes it touches in
//! increasing global order; vector DOF `2k + c` is component `c` of local
//! node `k`.

use std::collections::HashMap;

use crate::mesh::{EdgeTag, Region, TriMesh};

use super::element::P2_EDGES;

const NONE: usize = usize::MAX;

/// Which field an interpolant is built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldTarget {
    Velocity,
    Pressure,
    Displacement,
}

#[derive(Debug, Clone)]
pub struct TaylorHoodSpace {
    pub mesh: TriMesh,
    /// Physical position of every global `P2` node.
    pub node_coords: Vec<[f64; 2]>,
    /// Global `P2` nodes of each triangle in local order.
    pub tri_nodes: Vec<[usize; 6]>,
    /// Fluid node index → global node.
    pub fluid_nodes: Vec<usize>,
    /// Solid node index → global node.
    pub solid_nodes: Vec<usize>,
    /// Pressure DOF → mesh vertex.
    pub pressure_vertices: Vec<usize>,
    /// `(fluid node, solid node)` pairs sharing a global node on `Γ_s`,
    /// ordered by global node.
    pub interface: Vec<(usize, usize)>,
    fluid_of: Vec<usize>,
    solid_of: Vec<usize>,
    pressure_of: Vec<usize>,
    gamma_f_node: Vec<bool>,
    gamma_f_dofs: Vec<usize>,
    free_dofs: Vec<usize>,
    interface_fluid_dofs: Vec<usize>,
    interface_solid_dofs: Vec<usize>,
    solid_interior_dofs: Vec<usize>,
}

pub fn build_space(mesh: &TriMesh) -> TaylorHoodSpace {
    let nv = mesh.vertices.len();
    let mut edge_of: HashMap<(usize, usize), usize> = HashMap::with_capacity(mesh.edges.len());
    for (e, edge) in mesh.edges.iter().enumerate() {
        let [a, b] = edge.vertices;
        edge_of.insert((a.min(b), a.max(b)), e);
    }
    let n_nodes = nv + mesh.edges.len();
    let mut node_coords = mesh.vertices.clone();
    for edge in &mesh.edges {
        let [a, b] = edge.vertices;
        let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
        node_coords.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
    }

    let tri_nodes: Vec<[usize; 6]> = mesh
        .triangles
        .iter()
        .map(|t| {
            let v = t.vertices;
            let mut nodes = [v[0], v[1], v[2], 0, 0, 0];
            for (k, &(a, b)) in P2_EDGES.iter().enumerate() {
                let key = (v[a].min(v[b]), v[a].max(v[b]));
                nodes[3 + k] = nv + edge_of[&key];
            }
            nodes
        })
        .collect();

    let mut in_fluid = vec![false; n_nodes];
    let mut in_solid = vec![false; n_nodes];
    let mut fluid_vertex = vec![false; nv];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let flags = match tri.region {
            Region::Fluid => &mut in_fluid,
            Region::Solid => &mut in_solid,
        };
        for &g in &tri_nodes[t] {
            flags[g] = true;
        }
        if tri.region == Region::Fluid {
            for &v in &tri.vertices {
                fluid_vertex[v] = true;
            }
        }
    }

    let number = |flags: &[bool]| {
        let list: Vec<usize> = (0..flags.len()).filter(|&g| flags[g]).collect();
        let mut of = vec![NONE; flags.len()];
        for (k, &g) in list.iter().enumerate() {
            of[g] = k;
        }
        (list, of)
    };
    let (fluid_nodes, fluid_of) = number(&in_fluid);
    let (solid_nodes, solid_of) = number(&in_solid);
    let (pressure_vertices, pressure_of) = number(&fluid_vertex);

    let mut on_gamma_f = mesh.vertices_on(EdgeTag::GammaF);
    on_gamma_f.resize(n_nodes, false);
    for (e, edge) in mesh.edges.iter().enumerate() {
        if edge.tag == EdgeTag::GammaF {
            on_gamma_f[nv + e] = true;
        }
    }
    let gamma_f_node: Vec<bool> = fluid_nodes.iter().map(|&g| on_gamma_f[g]).collect();
    let mut gamma_f_dofs = Vec::new();
    let mut free_dofs = Vec::new();
    for (k, &c) in gamma_f_node.iter().enumerate() {
        for comp in 0..2 {
            if c {
                gamma_f_dofs.push(2 * k + comp);
            } else {
                free_dofs.push(2 * k + comp);
            }
        }
    }

    let interface: Vec<(usize, usize)> = (0..n_nodes)
        .filter(|&g| in_fluid[g] && in_solid[g])
        .map(|g| (fluid_of[g], solid_of[g]))
        .collect();
    let interface_fluid_dofs: Vec<usize> = interface.iter().flat_map(|&(f, _)| [2 * f, 2 * f + 1]).collect();
    let interface_solid_dofs: Vec<usize> = interface.iter().flat_map(|&(_, s)| [2 * s, 2 * s + 1]).collect();
    let mut solid_on_interface = vec![false; solid_nodes.len()];
    for &(_, s) in &interface {
        solid_on_interface[s] = true;
    }
    let solid_interior_dofs = (0..solid_nodes.len())
        .filter(|&s| !solid_on_interface[s])
        .flat_map(|s| [2 * s, 2 * s + 1])
        .collect();

    TaylorHoodSpace {
        mesh: mesh.clone(),
        node_coords,
        tri_nodes,
        fluid_nodes,
        solid_nodes,
        pressure_vertices,
        interface,
        fluid_of,
        solid_of,
        pressure_of,
        gamma_f_node,
        gamma_f_dofs,
        free_dofs,
        interface_fluid_dofs,
        interface_solid_dofs,
        solid_interior_dofs,
    }
}

impl TaylorHoodSpace {
    /// Length of a fluid velocity vector, including `Γ_f` DOFs.
    pub fn n_velocity(&self) -> usize {
        2 * self.fluid_nodes.len()
    }

    pub fn n_pressure(&self) -> usize {
        self.pressure_vertices.len()
    }

    pub fn n_solid(&self) -> usize {
        2 * self.solid_nodes.len()
    }

    pub fn n_interface(&self) -> usize {
        2 * self.interface.len()
    }

    /// Velocity DOFs pinned to zero on the outer boundary.
    pub fn gamma_f_dofs(&self) -> &[usize] {
        &self.gamma_f_dofs
    }

    /// Velocity DOFs not on `Γ_f`, ascending.
    pub fn free_velocity_dofs(&self) -> &[usize] {
        &self.free_dofs
    }

    pub fn is_gamma_f_node(&self, fluid_node: usize) -> bool {
        self.gamma_f_node[fluid_node]
    }

    /// Interface DOF `g` → fluid velocity DOF.
    pub fn interface_fluid_dofs(&self) -> &[usize] {
        &self.interface_fluid_dofs
    }

    /// Interface DOF `g` → solid DOF.
    pub fn interface_solid_dofs(&self) -> &[usize] {
        &self.interface_solid_dofs
    }

    /// Solid DOFs off the interface, ascending.
    pub fn solid_interior_dofs(&self) -> &[usize] {
        &self.solid_interior_dofs
    }

    pub fn fluid_node_of(&self, global: usize) -> Option<usize> {
        Some(self.fluid_of[global]).filter(|&k| k != NONE)
    }

    pub fn solid_node_of(&self, global: usize) -> Option<usize> {
        Some(self.solid_of[global]).filter(|&k| k != NONE)
    }

    pub fn pressure_dof_of(&self, vertex: usize) -> Option<usize> {
        Some(self.pressure_of[vertex]).filter(|&k| k != NONE)
    }

    /// Fluid velocity DOFs of a fluid triangle in local order.
    pub fn fluid_tri_dofs(&self, t: usize) -> [usize; 12] {
        self.vector_dofs(t, &self.fluid_of)
    }

    /// Solid DOFs of a solid triangle in local order.
    pub fn solid_tri_dofs(&self, t: usize) -> [usize; 12] {
        self.vector_dofs(t, &self.solid_of)
    }

    pub fn pressure_tri_dofs(&self, t: usize) -> [usize; 3] {
        let v = self.mesh.triangles[t].vertices;
        [self.pressure_of[v[0]], self.pressure_of[v[1]], self.pressure_of[v[2]]]
    }

    fn vector_dofs(&self, t: usize, of: &[usize]) -> [usize; 12] {
        let mut d = [0; 12];
        for (a, &g) in self.tri_nodes[t].iter().enumerate() {
            let k = of[g];
            debug_assert!(k != NONE, "triangle {t} does not belong to this field");
            d[2 * a] = 2 * k;
            d[2 * a + 1] = 2 * k + 1;
        }
        d
    }

    pub fn triangles_in(&self, region: Region) -> impl Iterator<Item = usize> + '_ {
        (0..self.mesh.triangles.len()).filter(move |&t| self.mesh.triangles[t].region == region)
    }

    /// Zero fluid vector with `v` copied into the interface DOFs.
    pub fn fluid_from_interface(&self, v: &[f64]) -> Vec<f64> {
        let mut u = vec![0.0; self.n_velocity()];
        for (g, &d) in self.interface_fluid_dofs.iter().enumerate() {
            u[d] = v[g];
        }
        u
    }

    /// Interface values of a fluid vector.
    pub fn fluid_trace(&self, u: &[f64]) -> Vec<f64> {
        self.interface_fluid_dofs.iter().map(|&d| u[d]).collect()
    }

    /// Interface values of a solid vector.
    pub fn solid_trace(&self, w: &[f64]) -> Vec<f64> {
        self.interface_solid_dofs.iter().map(|&d| w[d]).collect()
    }
}

/// Nodal interpolant of a field.
///
/// Vector targets evaluate both components at every `P2` node of the
/// region; the pressure target evaluates the first component at fluid
/// vertices.
pub fn interpolate(space: &TaylorHoodSpace, target: FieldTarget, field: impl Fn(f64, f64) -> [f64; 2]) -> Vec<f64> {
    let nodes: Vec<usize> = match target {
        FieldTarget::Velocity => space.fluid_nodes.clone(),
        FieldTarget::Displacement => space.solid_nodes.clone(),
        FieldTarget::Pressure => {
            return space
                .pressure_vertices
                .iter()
                .map(|&v| {
                    let p = space.mesh.vertices[v];
                    field(p[0], p[1])[0]
                })
                .collect()
        }
    };
    nodes
        .iter()
        .flat_map(|&g| {
            let p = space.node_coords[g];
            field(p[0], p[1])
        })
        .collect()
}
