//! Structured triangulation of the square-annulus benchmark geometry.
//!
//! The unit square is split into an `n × n` grid with `n = 6·2^level`, so the
//! lines `x, y ∈ {1/3, 2/3}` are always grid lines. Each grid cell is cut
//! along its lower-left to upper-right diagonal, except inside the two
//! corner blocks `[5/6,1]×[0,1/6]` and `[0,1/6]×[5/6,1]`, which use the other
//! diagonal so that no fluid triangle has all three vertices on the outer
//! boundary. Cells whose index range lies in `[n/3, 2n/3)²` form the solid
//! block `(1/3, 2/3)²`; the rest is fluid.
//!
//! Region and boundary membership is decided by integer index arithmetic so
//! that no floating comparison against `1/3` is ever made.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{FsiError, Result};

/// Which sub-domain a triangle belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Fluid,
    Solid,
}

/// Classification of a mesh edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeTag {
    /// Outer boundary `∂(0,1)²`, where the fluid velocity vanishes.
    GammaF,
    /// Fluid-solid interface, the perimeter of `[1/3, 2/3]²`.
    GammaS,
    Interior,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triangle {
    pub vertices: [usize; 3],
    pub region: Region,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub tag: EdgeTag,
}

/// Conforming triangulation of `(0,1)²` with fluid/solid and boundary tags.
///
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<Triangle>,
    pub edges: Vec<Edge>,
    pub level: u32,
    pub hypotenuse: f64,
}

/// Number of grid cells per side at a refinement level.
pub fn cells_per_side(level: u32) -> Option<usize> {
    1usize.checked_shl(level).and_then(|p| p.checked_mul(6))
}

/// Diagonal length `(√2/6)·2^(−level)`.
pub fn hypotenuse_length(level: u32) -> f64 {
    std::f64::consts::SQRT_2 / 6.0 * 0.5f64.powi(level as i32)
}

/// Builds the level-`level` mesh.
///
/// Levels whose quadratic-element DOF count would overflow `usize` are
/// rejected.
pub fn generate(level: u32) -> Result<TriMesh> {
    let n = cells_per_side(level).ok_or(FsiError::LevelTooLarge { level })?;
    // Vector P2 DOFs live on the (2n+1)² sub-grid; two components each.
    (2 * n)
        .checked_add(1)
        .and_then(|m| m.checked_mul(m))
        .and_then(|m| m.checked_mul(2))
        .ok_or(FsiError::LevelTooLarge { level })?;

    let np = n + 1;
    let vid = |i: usize, j: usize| j * np + i;
    let nf = n as f64;

    let mut vertices = Vec::with_capacity(np * np);
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 / nf, j as f64 / nf]);
        }
    }

    let lo = n / 3;
    let hi = 2 * n / 3;
    let solid_cell = |i: usize, j: usize| (lo..hi).contains(&i) && (lo..hi).contains(&j);
    let block = n / 6;
    let flipped = |i: usize, j: usize| matches!((i / block, j / block), (5, 0) | (0, 5));

    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let region = if solid_cell(i, j) { Region::Solid } else { Region::Fluid };
            let (a, b, c, d) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
            let (lower, upper) = if flipped(i, j) {
                ([a, b, d], [b, c, d])
            } else {
                ([a, b, c], [a, c, d])
            };
            triangles.push(Triangle {
                vertices: lower,
                region,
            });
            triangles.push(Triangle {
                vertices: upper,
                region,
            });
        }
    }

    let mut edges = Vec::with_capacity(3 * n * n + 2 * n);
    // horizontal edges (i,j)-(i+1,j)
    for j in 0..=n {
        for i in 0..n {
            let tag = if j == 0 || j == n {
                EdgeTag::GammaF
            } else if (j == lo || j == hi) && (lo..hi).contains(&i) {
                EdgeTag::GammaS
            } else {
                EdgeTag::Interior
            };
            edges.push(Edge {
                vertices: [vid(i, j), vid(i + 1, j)],
                tag,
            });
        }
    }
    // vertical edges (i,j)-(i,j+1)
    for j in 0..n {
        for i in 0..=n {
            let tag = if i == 0 || i == n {
                EdgeTag::GammaF
            } else if (i == lo || i == hi) && (lo..hi).contains(&j) {
                EdgeTag::GammaS
            } else {
                EdgeTag::Interior
            };
            edges.push(Edge {
                vertices: [vid(i, j), vid(i, j + 1)],
                tag,
            });
        }
    }
    // diagonals
    for j in 0..n {
        for i in 0..n {
            let vertices = if flipped(i, j) {
                [vid(i + 1, j), vid(i, j + 1)]
            } else {
                [vid(i, j), vid(i + 1, j + 1)]
            };
            edges.push(Edge {
                vertices,
                tag: EdgeTag::Interior,
            });
        }
    }

    Ok(TriMesh {
        vertices,
        triangles,
        edges,
        level,
        hypotenuse: hypotenuse_length(level),
    })
}

/// Uniform refinement: every triangle is split into four.
///
/// The structured family is nested, so the refined mesh is exactly
/// `generate(level + 1)`; [`TriMesh::parent`] recovers the parent map.
pub fn refine(mesh: &TriMesh) -> Result<TriMesh> {
    generate(mesh.level + 1)
}

impl TriMesh {
    pub fn cells_per_side(&self) -> usize {
        // level was validated at construction
        cells_per_side(self.level).expect("validated level")
    }

    pub fn triangle_coords(&self, t: usize) -> [[f64; 2]; 3] {
        let v = self.triangles[t].vertices;
        [self.vertices[v[0]], self.vertices[v[1]], self.vertices[v[2]]]
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_coords(t);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn region_area(&self, region: Region) -> f64 {
        // compensated summation keeps the total exact to rounding
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for t in (0..self.triangles.len()).filter(|&t| self.triangles[t].region == region) {
            let a = self.signed_area(t);
            let s = sum + a;
            comp += if sum.abs() >= a.abs() {
                (sum - s) + a
            } else {
                (a - s) + sum
            };
            sum = s;
        }
        sum + comp
    }

    pub fn count_region(&self, region: Region) -> usize {
        self.triangles.iter().filter(|t| t.region == region).count()
    }

    pub fn edges_tagged(&self, tag: EdgeTag) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.tag == tag)
    }

    /// Vertices lying on an edge with the given tag.
    pub fn vertices_on(&self, tag: EdgeTag) -> Vec<bool> {
        let mut on = vec![false; self.vertices.len()];
        for e in self.edges_tagged(tag) {
            on[e.vertices[0]] = true;
            on[e.vertices[1]] = true;
        }
        on
    }

    /// Index of the level-`(level−1)` triangle containing triangle `t`.
    ///
    /// Returns `None` at level 0.
    pub fn parent(&self, t: usize) -> Option<usize> {
        if self.level == 0 {
            return None;
        }
        let n = self.cells_per_side();
        let cell = t / 2;
        let (i, j) = (cell % n, cell / n);
        let lower = t % 2 == 0;
        // Position of the fine cell inside its coarse cell.
        let (pi, pj) = (i / 2, j / 2);
        let (di, dj) = (i % 2, j % 2);
        let block = n / 6;
        let flipped = matches!((i / block, j / block), (5, 0) | (0, 5));
        let parent_lower = match (flipped, di, dj) {
            (false, 1, 0) | (true, 0, 0) => true,
            (false, 0, 1) | (true, 1, 1) => false,
            // remaining sub-cells are cut by the parent's diagonal
            _ => lower,
        };
        let pn = n / 2;
        Some(2 * (pj * pn + pi) + usize::from(!parent_lower))
    }

    /// Writes the mesh in the plain-text exchange format.
    ///
    /// Header `ntri nvert level`, then one line per vertex (`index x y`), per
    /// triangle (`index v0 v1 v2 region`) and per edge (`v0 v1 tag`).
    /// Coordinates use the shortest round-trip decimal representation, so
    /// [`TriMesh::import`] reproduces the mesh bit-exactly.
    pub fn export(&self, path: &Path) -> Result<()> {
        let io_err = |source| FsiError::Io {
            path: path.to_path_buf(),
            source,
        };
        let file = File::create(path).map_err(io_err)?;
        let mut w = BufWriter::new(file);
        let write_all = |w: &mut BufWriter<File>| -> std::io::Result<()> {
            writeln!(w, "{} {} {}", self.triangles.len(), self.vertices.len(), self.level)?;
            for (k, v) in self.vertices.iter().enumerate() {
                writeln!(w, "{} {:?} {:?}", k, v[0], v[1])?;
            }
            for (k, t) in self.triangles.iter().enumerate() {
                let [a, b, c] = t.vertices;
                writeln!(w, "{} {} {} {} {}", k, a, b, c, t.region)?;
            }
            for e in &self.edges {
                writeln!(w, "{} {} {}", e.vertices[0], e.vertices[1], e.tag)?;
            }
            w.flush()
        };
        write_all(&mut w).map_err(io_err)
    }

    /// Reads a mesh written by [`TriMesh::export`].
    pub fn import(path: &Path) -> Result<TriMesh> {
        let file = File::open(path).map_err(|source| FsiError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let parse_err = |line: usize, reason: String| FsiError::Parse {
            path: path.to_path_buf(),
            line,
            reason,
        };
        let mut lines = Vec::new();
        for line in BufReader::new(file).lines() {
            lines.push(line.map_err(|source| FsiError::Io {
                path: path.to_path_buf(),
                source,
            })?);
        }
        let mut it = lines.iter().enumerate().filter(|(_, l)| !l.trim().is_empty());

        fn field<T: FromStr>(
            tok: Option<&str>,
            line: usize,
            what: &str,
            err: &dyn Fn(usize, String) -> FsiError,
        ) -> Result<T> {
            tok.ok_or_else(|| err(line, format!("missing {what}")))?
                .parse()
                .map_err(|_| err(line, format!("bad {what}")))
        }

        let (hl, header) = it.next().ok_or_else(|| parse_err(1, "empty file".into()))?;
        let mut toks = header.split_whitespace();
        let ntri: usize = field(toks.next(), hl + 1, "triangle count", &parse_err)?;
        let nvert: usize = field(toks.next(), hl + 1, "vertex count", &parse_err)?;
        let level: u32 = field(toks.next(), hl + 1, "level", &parse_err)?;

        let mut vertices = Vec::with_capacity(nvert);
        for k in 0..nvert {
            let (ln, l) = it
                .next()
                .ok_or_else(|| parse_err(lines.len(), "missing vertex lines".into()))?;
            let mut toks = l.split_whitespace();
            let idx: usize = field(toks.next(), ln + 1, "vertex index", &parse_err)?;
            if idx != k {
                return Err(parse_err(ln + 1, format!("vertex index {idx}, expected {k}")));
            }
            let x: f64 = field(toks.next(), ln + 1, "x", &parse_err)?;
            let y: f64 = field(toks.next(), ln + 1, "y", &parse_err)?;
            vertices.push([x, y]);
        }
        let mut triangles = Vec::with_capacity(ntri);
        for k in 0..ntri {
            let (ln, l) = it
                .next()
                .ok_or_else(|| parse_err(lines.len(), "missing triangle lines".into()))?;
            let mut toks = l.split_whitespace();
            let idx: usize = field(toks.next(), ln + 1, "triangle index", &parse_err)?;
            if idx != k {
                return Err(parse_err(ln + 1, format!("triangle index {idx}, expected {k}")));
            }
            let mut v = [0usize; 3];
            for slot in &mut v {
                *slot = field(toks.next(), ln + 1, "vertex id", &parse_err)?;
                if *slot >= nvert {
                    return Err(parse_err(ln + 1, "vertex id out of range".into()));
                }
            }
            let region: Region = field(toks.next(), ln + 1, "region", &parse_err)?;
            triangles.push(Triangle { vertices: v, region });
        }
        let mut edges = Vec::new();
        for (ln, l) in it {
            let mut toks = l.split_whitespace();
            let a: usize = field(toks.next(), ln + 1, "edge vertex", &parse_err)?;
            let b: usize = field(toks.next(), ln + 1, "edge vertex", &parse_err)?;
            let tag: EdgeTag = field(toks.next(), ln + 1, "edge tag", &parse_err)?;
            edges.push(Edge { vertices: [a, b], tag });
        }
        Ok(TriMesh {
            vertices,
            triangles,
            edges,
            level,
            hypotenuse: hypotenuse_length(level),
        })
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Region::Fluid => "fluid",
            Region::Solid => "solid",
        })
    }
}

impl FromStr for Region {
    type Err = ();
    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        match s {
            "fluid" => Ok(Region::Fluid),
            "solid" => Ok(Region::Solid),
            _ => Err(()),
        }
    }
}

impl fmt::Display for EdgeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeTag::GammaF => "gamma_f",
            EdgeTag::GammaS => "gamma_s",
            EdgeTag::Interior => "interior",
        })
    }
}

impl FromStr for EdgeTag {
    type Err = ();
    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        match s {
            "gamma_f" => Ok(EdgeTag::GammaF),
            "gamma_s" => Ok(EdgeTag::GammaS),
            "interior" => Ok(EdgeTag::Interior),
            _ => Err(()),
        }
    }
}
