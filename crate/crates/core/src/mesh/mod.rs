//! Closed triangulated surfaces.
//!
//! A [`TriangleMesh`] always carries per-edge lengths; positions are optional.
//! Every downstream computation reads geometry from the edge lengths only, so
//! intrinsic meshes (flat tori) and embedded meshes are handled the same way.

mod generate;
mod io;
mod refine;
mod validate;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use generate::{generate, jitter};
pub use io::{load_intrinsic, load_obj, save_intrinsic, save_obj};
pub use refine::refine;
pub use validate::{validate, MeshInvariants};

pub type Point3 = [f64; 3];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("invalid surface spec: {0}")]
    InvalidSpec(String),
    #[error("resolution too low: only {vertices} vertices would result")]
    ResolutionTooLow { vertices: usize },
    #[error("face {face} references vertex {vertex}, but the mesh has {vertex_count} vertices")]
    IndexOutOfRange {
        face: usize,
        vertex: usize,
        vertex_count: usize,
    },
    #[error("face {face} repeats a vertex: {corners:?}")]
    RepeatedVertex { face: usize, corners: [usize; 3] },
    #[error("mesh is not closed: edge {edge:?} is used by {faces} face(s)")]
    NotClosed { edge: [usize; 2], faces: usize },
    #[error("edge {edge:?} is shared by {faces} faces")]
    NonManifoldEdge { edge: [usize; 2], faces: usize },
    #[error("inconsistent orientation across edge {edge:?}")]
    NotOrientable { edge: [usize; 2] },
    #[error("mesh is disconnected: vertex {vertex} is not reachable from vertex 0")]
    Disconnected { vertex: usize },
    #[error("degenerate triangle {face} with edge lengths {lengths:?}")]
    DegenerateTriangle { face: usize, lengths: [f64; 3] },
    #[error("edge {edge:?} has length {stored}, positions give {measured}")]
    InconsistentLength {
        edge: [usize; 2],
        stored: f64,
        measured: f64,
    },
    #[error("no length supplied for edge {edge:?}")]
    MissingEdgeLength { edge: [usize; 2] },
    #[error("operation needs vertex positions but the mesh is intrinsic")]
    MissingPositions,
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: face with {corners} corners, only triangles are supported")]
    NonTriangleFace { line: usize, corners: usize },
}

/// Test-surface families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfaceFamily {
    UnitSphereIcosa,
    Ellipsoid { a: f64, b: f64, c: f64 },
    /// `major` is the distance from the axis to the tube center, `minor` the tube radius.
    TorusOfRevolution { major: f64, minor: f64 },
    /// The quotient of the plane by the lattice `a·Z × b·Z`; stored intrinsically.
    FlatTorus { a: f64, b: f64 },
    /// Radial graph `r = 1 + amplitude·cos(frequency·θ)` over the unit sphere, θ the polar angle.
    PerturbedSphere { amplitude: f64, frequency: u32 },
}

impl SurfaceFamily {
    /// Euler characteristic of the smooth surface.
    pub fn euler_characteristic(&self) -> i64 {
        match self {
            SurfaceFamily::TorusOfRevolution { .. } | SurfaceFamily::FlatTorus { .. } => 0,
            _ => 2,
        }
    }

    pub fn is_embedded(&self) -> bool {
        !matches!(self, SurfaceFamily::FlatTorus { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            SurfaceFamily::UnitSphereIcosa => "sphere",
            SurfaceFamily::Ellipsoid { .. } => "ellipsoid",
            SurfaceFamily::TorusOfRevolution { .. } => "torus",
            SurfaceFamily::FlatTorus { .. } => "flat-torus",
            SurfaceFamily::PerturbedSphere { .. } => "perturbed-sphere",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSpec {
    pub family: SurfaceFamily,
    pub resolution: u32,
    pub scale: f64,
}

impl SurfaceSpec {
    pub fn new(family: SurfaceFamily, resolution: u32) -> Self {
        SurfaceSpec {
            family,
            resolution,
            scale: 1.0,
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn check(&self) -> Result<(), MeshError> {
        let bad = |msg: String| Err(MeshError::InvalidSpec(msg));
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return bad(format!("scale must be positive, got {}", self.scale));
        }
        if self.resolution > 8 {
            return bad(format!("resolution {} exceeds the limit of 8", self.resolution));
        }
        match self.family {
            SurfaceFamily::UnitSphereIcosa => Ok(()),
            SurfaceFamily::Ellipsoid { a, b, c } => {
                if [a, b, c].iter().all(|x| x.is_finite() && *x > 0.0) {
                    Ok(())
                } else {
                    bad(format!("ellipsoid semi-axes must be positive, got ({a}, {b}, {c})"))
                }
            }
            SurfaceFamily::TorusOfRevolution { major, minor } => {
                if minor > 0.0 && major > minor && major.is_finite() {
                    Ok(())
                } else {
                    bad(format!("torus needs R > r > 0, got R={major}, r={minor}"))
                }
            }
            SurfaceFamily::FlatTorus { a, b } => {
                if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() {
                    Ok(())
                } else {
                    bad(format!("flat torus periods must be positive, got ({a}, {b})"))
                }
            }
            SurfaceFamily::PerturbedSphere { amplitude, .. } => {
                if (0.0..=0.3).contains(&amplitude) {
                    Ok(())
                } else {
                    bad(format!("perturbation amplitude must lie in [0, 0.3], got {amplitude}"))
                }
            }
        }
    }
}

fn sorted_pair(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

pub(crate) fn distance(p: &Point3, q: &Point3) -> f64 {
    let d = [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// A closed oriented triangle mesh with intrinsic edge lengths.
///
/// Construction only checks indices; use [`validate`] to check the manifold
/// and metric invariants.
#[derive(Debug, Clone)]
pub struct TriangleMesh {
    vertex_count: usize,
    faces: Vec<[usize; 3]>,
    positions: Option<Vec<Point3>>,
    edges: Vec<[usize; 2]>,
    edge_lengths: Vec<f64>,
    // face_edges[f][k] joins faces[f][k] and faces[f][(k + 1) % 3]
    face_edges: Vec<[usize; 3]>,
    edge_index: HashMap<[usize; 2], usize>,
    tag: String,
}

impl TriangleMesh {
    fn connectivity(
        vertex_count: usize,
        faces: &[[usize; 3]],
    ) -> Result<(Vec<[usize; 2]>, Vec<[usize; 3]>, HashMap<[usize; 2], usize>), MeshError> {
        let mut edges = Vec::with_capacity(faces.len() * 3 / 2);
        let mut face_edges = Vec::with_capacity(faces.len());
        let mut edge_index = HashMap::with_capacity(faces.len() * 3 / 2);
        for (f, tri) in faces.iter().enumerate() {
            for &v in tri {
                if v >= vertex_count {
                    return Err(MeshError::IndexOutOfRange {
                        face: f,
                        vertex: v,
                        vertex_count,
                    });
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(MeshError::RepeatedVertex {
                    face: f,
                    corners: *tri,
                });
            }
            let mut fe = [0; 3];
            for k in 0..3 {
                let key = sorted_pair(tri[k], tri[(k + 1) % 3]);
                fe[k] = *edge_index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edges.len() - 1
                });
            }
            face_edges.push(fe);
        }
        Ok((edges, face_edges, edge_index))
    }

    /// Builds an embedded mesh; edge lengths are Euclidean distances.
    pub fn from_positions(
        positions: Vec<Point3>,
        faces: Vec<[usize; 3]>,
        tag: impl Into<String>,
    ) -> Result<Self, MeshError> {
        let vertex_count = positions.len();
        let (edges, face_edges, edge_index) = Self::connectivity(vertex_count, &faces)?;
        let edge_lengths = edges
            .iter()
            .map(|&[i, j]| distance(&positions[i], &positions[j]))
            .collect();
        Ok(TriangleMesh {
            vertex_count,
            faces,
            positions: Some(positions),
            edges,
            edge_lengths,
            face_edges,
            edge_index,
            tag: tag.into(),
        })
    }

    /// Builds an intrinsic mesh. `length` is queried once per undirected edge
    /// with the sorted vertex pair.
    pub fn from_edge_lengths(
        vertex_count: usize,
        faces: Vec<[usize; 3]>,
        mut length: impl FnMut([usize; 2]) -> Option<f64>,
        tag: impl Into<String>,
    ) -> Result<Self, MeshError> {
        let (edges, face_edges, edge_index) = Self::connectivity(vertex_count, &faces)?;
        let edge_lengths = edges
            .iter()
            .map(|&e| length(e).ok_or(MeshError::MissingEdgeLength { edge: e }))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TriangleMesh {
            vertex_count,
            faces,
            positions: None,
            edges,
            edge_lengths,
            face_edges,
            edge_index,
            tag: tag.into(),
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn positions(&self) -> Option<&[Point3]> {
        self.positions.as_deref()
    }

    /// Undirected edges as sorted vertex pairs.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn edge_lengths(&self) -> &[f64] {
        &self.edge_lengths
    }

    /// Edge ids of face `f`; entry `k` joins corners `k` and `k + 1`.
    pub fn face_edges(&self, f: usize) -> [usize; 3] {
        self.face_edges[f]
    }

    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&sorted_pair(a, b)).copied()
    }

    pub fn edge_length(&self, a: usize, b: usize) -> Option<f64> {
        self.edge_id(a, b).map(|e| self.edge_lengths[e])
    }

    /// Side lengths of face `f`; entry `k` is the side opposite corner `k`.
    pub fn face_side_lengths(&self, f: usize) -> [f64; 3] {
        let fe = self.face_edges[f];
        // side opposite corner k joins corners k+1 and k+2, i.e. face_edges[(k+1)%3]
        [
            self.edge_lengths[fe[1]],
            self.edge_lengths[fe[2]],
            self.edge_lengths[fe[0]],
        ]
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = tag.into();
        self
    }

    /// Uniformly scales the metric (and positions, if any) by `c`.
    pub fn scaled(&self, c: f64) -> TriangleMesh {
        let mut out = self.clone();
        for l in &mut out.edge_lengths {
            *l *= c;
        }
        if let Some(ps) = &mut out.positions {
            for p in ps.iter_mut() {
                for x in p.iter_mut() {
                    *x *= c;
                }
            }
        }
        out
    }

    /// Drops positions, keeping only the metric.
    pub fn into_intrinsic(mut self) -> TriangleMesh {
        self.positions = None;
        self
    }

    /// Same mesh with the given faces removed; used to build broken fixtures.
    pub fn without_faces(&self, remove: &[usize]) -> Result<TriangleMesh, MeshError> {
        let faces: Vec<_> = self
            .faces
            .iter()
            .enumerate()
            .filter(|(f, _)| !remove.contains(f))
            .map(|(_, t)| *t)
            .collect();
        match &self.positions {
            Some(p) => TriangleMesh::from_positions(p.clone(), faces, self.tag.clone()),
            None => TriangleMesh::from_edge_lengths(
                self.vertex_count,
                faces,
                |e| self.edge_length(e[0], e[1]),
                self.tag.clone(),
            ),
        }
    }
}

/// Area of a triangle from its side lengths (Kahan's stable Heron formula).
/// Returns 0 for lengths that violate the triangle inequality.
pub fn triangle_area(lengths: [f64; 3]) -> f64 {
    let mut s = lengths;
    s.sort_by(|x, y| y.total_cmp(x));
    let [a, b, c] = s;
    let p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    if p <= 0.0 {
        0.0
    } else {
        0.25 * p.sqrt()
    }
}
