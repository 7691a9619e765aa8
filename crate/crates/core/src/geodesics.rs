//! Graph approximations of intrinsic distance and the diameter.
//!
//! The graph has one node per mesh vertex plus `2^level − 1` evenly spaced
//! Steiner nodes on every edge, so the node set at level `k` contains the one
//! at level `k − 1` and raising the level can only shorten distances. Any two
//! nodes on different sides of a common triangle are joined by a straight
//! segment measured in that triangle's own planar layout, so graph paths may
//! cut across faces. Graph distances never undercut polyhedral geodesic
//! distances.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mesh::{triangle_area, TriangleMesh};

pub const MAX_STEINER_LEVEL: usize = 3;
pub const DEFAULT_STEINER_LEVEL: usize = 2;
/// Largest mesh accepted by all-pairs mode.
pub const ALL_PAIRS_CAP: usize = 5000;
/// Sources used by the double-sweep heuristic.
pub const SWEEP_SOURCES: usize = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeodesicError {
    #[error("steiner level {0} outside [0, {MAX_STEINER_LEVEL}]")]
    InvalidSteinerLevel(usize),
    #[error("vertex {vertex} out of range for a mesh with {vertex_count} vertices")]
    VertexOutOfRange { vertex: usize, vertex_count: usize },
    #[error("all-pairs diameter is capped at {cap} vertices, mesh has {vertices}")]
    TooLarge { vertices: usize, cap: usize },
    #[error("degenerate triangle {face}")]
    DegenerateTriangle { face: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiameterMode {
    AllPairsExactGraph,
    DoubleSweepHeuristic,
}

impl DiameterMode {
    /// All pairs up to [`ALL_PAIRS_CAP`] vertices, sampled sources above.
    pub fn auto(vertex_count: usize) -> Self {
        if vertex_count <= ALL_PAIRS_CAP {
            DiameterMode::AllPairsExactGraph
        } else {
            DiameterMode::DoubleSweepHeuristic
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiameterEstimate {
    pub value: f64,
    pub steiner_level: usize,
    pub attained_pair: [usize; 2],
    pub mode: DiameterMode,
    /// Diameter at Steiner levels `0..=steiner_level`.
    pub sequence: Vec<f64>,
}

/// Steiner nodes inserted on each edge at `level`: 0, 1, 3, 7.
pub fn steiner_nodes_per_edge(level: usize) -> usize {
    (1 << level) - 1
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Arc {
    target: usize,
    length: f64,
}

/// Where a graph node sits on the mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeLocation {
    Vertex(usize),
    /// Fraction `t` along edge `edge`, measured from its lower-index endpoint.
    OnEdge { edge: usize, t: f64 },
}

#[derive(Debug, Clone)]
pub struct SteinerGraph {
    vertex_count: usize,
    level: usize,
    offsets: Vec<usize>,
    arcs: Vec<Arc>,
    edges: Vec<[usize; 2]>,
}

#[derive(Copy, Clone, PartialEq)]
struct Entry {
    dist: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest paths; returns distances and predecessors.
pub struct ShortestPaths {
    pub dist: Vec<f64>,
    pub pred: Vec<Option<usize>>,
}

impl ShortestPaths {
    /// Node sequence from the source to `target`, inclusive.
    pub fn path_to(&self, target: usize) -> Vec<usize> {
        let mut path = vec![target];
        let mut cur = target;
        while let Some(p) = self.pred[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }
}

impl SteinerGraph {
    pub fn build(mesh: &TriangleMesh, level: usize) -> Result<Self, GeodesicError> {
        if level > MAX_STEINER_LEVEL {
            return Err(GeodesicError::InvalidSteinerLevel(level));
        }
        let v = mesh.vertex_count();
        let per_edge = steiner_nodes_per_edge(level);
        let node_count = v + per_edge * mesh.edge_count();
        let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
        let steps = (per_edge + 1) as f64;

        for (e, &[i, j]) in mesh.edges().iter().enumerate() {
            let len = mesh.edge_lengths()[e];
            let mut chain = vec![i];
            chain.extend((0..per_edge).map(|s| v + e * per_edge + s));
            chain.push(j);
            for w in chain.windows(2) {
                pairs.push((w[0], w[1], len / steps));
            }
        }

        for (f, tri) in mesh.faces().iter().enumerate() {
            let l = mesh.face_side_lengths(f);
            if triangle_area(l) <= 0.0 {
                return Err(GeodesicError::DegenerateTriangle { face: f });
            }
            // planar layout: corner 0 at the origin, corner 1 on the x axis
            let (l12, l20, l01) = (l[0], l[1], l[2]);
            let x2 = (l01 * l01 + l20 * l20 - l12 * l12) / (2.0 * l01);
            let y2 = (l20 * l20 - x2 * x2).max(0.0).sqrt();
            let corner = [[0.0, 0.0], [l01, 0.0], [x2, y2]];

            // nodes on each side k (joining corners k and k+1), corners included
            let fe = mesh.face_edges(f);
            let mut sides: Vec<Vec<(usize, [f64; 2])>> = Vec::with_capacity(3);
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let (pa, pb) = (corner[k], corner[(k + 1) % 3]);
                let e = fe[k];
                let mut side = vec![(a, pa)];
                for s in 0..per_edge {
                    // parameter measured from the lower-index endpoint of the edge
                    let t = (s + 1) as f64 / steps;
                    let from_a = if a < b { t } else { 1.0 - t };
                    let p = [pa[0] + from_a * (pb[0] - pa[0]), pa[1] + from_a * (pb[1] - pa[1])];
                    side.push((v + e * per_edge + s, p));
                }
                side.push((b, pb));
                sides.push(side);
            }
            // pairs on different sides; skip pairs sharing a side (corner cases)
            for k in 0..3 {
                let m = (k + 1) % 3;
                for &(na, pa) in &sides[k][1..sides[k].len() - 1] {
                    for &(nb, pb) in &sides[m][1..sides[m].len() - 1] {
                        pairs.push((na, nb, (pa[0] - pb[0]).hypot(pa[1] - pb[1])));
                    }
                }
                // corner opposite side k, i.e. corner k+2, to interior nodes of side k
                let (nc, pc) = (tri[(k + 2) % 3], corner[(k + 2) % 3]);
                for &(na, pa) in &sides[k][1..sides[k].len() - 1] {
                    pairs.push((nc, na, (pa[0] - pc[0]).hypot(pa[1] - pc[1])));
                }
            }
        }

        let mut degree = vec![0usize; node_count + 1];
        for &(a, b, _) in &pairs {
            degree[a + 1] += 1;
            degree[b + 1] += 1;
        }
        for n in 0..node_count {
            degree[n + 1] += degree[n];
        }
        let offsets = degree;
        let mut fill = offsets.clone();
        let mut arcs = vec![
            Arc {
                target: 0,
                length: 0.0
            };
            offsets[node_count]
        ];
        for &(a, b, length) in &pairs {
            arcs[fill[a]] = Arc { target: b, length };
            fill[a] += 1;
            arcs[fill[b]] = Arc { target: a, length };
            fill[b] += 1;
        }
        Ok(SteinerGraph {
            vertex_count: v,
            level,
            offsets,
            arcs,
            edges: mesh.edges().to_vec(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn location(&self, node: usize) -> NodeLocation {
        if node < self.vertex_count {
            NodeLocation::Vertex(node)
        } else {
            let per_edge = steiner_nodes_per_edge(self.level);
            let k = node - self.vertex_count;
            let (edge, s) = (k / per_edge, k % per_edge);
            NodeLocation::OnEdge {
                edge,
                t: (s + 1) as f64 / (per_edge + 1) as f64,
            }
        }
    }

    /// Endpoints of the mesh edge carrying a Steiner node.
    pub fn edge_endpoints(&self, edge: usize) -> [usize; 2] {
        self.edges[edge]
    }

    /// Neighbours of `node` with their Euclidean arc lengths.
    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.arcs[self.offsets[node]..self.offsets[node + 1]]
            .iter()
            .map(|a| (a.target, a.length))
    }

    /// Length of the arc from `a` to `b`, if they are adjacent.
    pub fn arc_length(&self, a: usize, b: usize) -> Option<f64> {
        self.neighbors(a).find(|&(t, _)| t == b).map(|(_, l)| l)
    }

    /// Dijkstra with arc costs `cost(from, to, length)`.
    pub fn shortest_paths_with(&self, source: usize, cost: impl Fn(usize, usize, f64) -> f64) -> ShortestPaths {
        let n = self.node_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![None; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Entry {
            dist: 0.0,
            node: source,
        });
        while let Some(Entry { dist: d, node }) = heap.pop() {
            if d > dist[node] {
                continue;
            }
            for (t, len) in self.neighbors(node) {
                let nd = d + cost(node, t, len);
                if nd < dist[t] {
                    dist[t] = nd;
                    pred[t] = Some(node);
                    heap.push(Entry { dist: nd, node: t });
                }
            }
        }
        ShortestPaths { dist, pred }
    }

    pub fn shortest_paths(&self, source: usize) -> ShortestPaths {
        self.shortest_paths_with(source, |_, _, len| len)
    }

    /// Graph distances from a mesh vertex to every mesh vertex.
    pub fn vertex_distances(&self, source: usize) -> Vec<f64> {
        let mut d = self.shortest_paths(source).dist;
        d.truncate(self.vertex_count);
        d
    }

    /// Farthest mesh vertex from `source` and its distance (ties: lowest index).
    fn eccentricity(&self, source: usize) -> (f64, usize) {
        let d = self.vertex_distances(source);
        let mut best = (0.0, source);
        for (v, &x) in d.iter().enumerate() {
            if x > best.0 {
                best = (x, v);
            }
        }
        best
    }
}

/// Per-vertex graph distances from `source`.
pub fn distances_from(mesh: &TriangleMesh, source: usize, steiner_level: usize) -> Result<Vec<f64>, GeodesicError> {
    if source >= mesh.vertex_count() {
        return Err(GeodesicError::VertexOutOfRange {
            vertex: source,
            vertex_count: mesh.vertex_count(),
        });
    }
    Ok(SteinerGraph::build(mesh, steiner_level)?.vertex_distances(source))
}

// (value, source, target); ordering prefers larger value, then smaller indices
fn better(a: (f64, usize, usize), b: (f64, usize, usize)) -> (f64, usize, usize) {
    match a.0.total_cmp(&b.0) {
        Ordering::Greater => a,
        Ordering::Less => b,
        Ordering::Equal => {
            if (a.1, a.2) <= (b.1, b.2) {
                a
            } else {
                b
            }
        }
    }
}

fn diameter_on_graph(graph: &SteinerGraph, mode: DiameterMode) -> (f64, [usize; 2]) {
    let n = graph.vertex_count();
    let best = match mode {
        DiameterMode::AllPairsExactGraph => (0..n)
            .into_par_iter()
            .map(|s| {
                let (d, t) = graph.eccentricity(s);
                (d, s, t)
            })
            .reduce(|| (0.0, usize::MAX, usize::MAX), better),
        DiameterMode::DoubleSweepHeuristic => {
            let mut nearest = vec![f64::INFINITY; n];
            let mut source = 0;
            let mut best = (0.0, usize::MAX, usize::MAX);
            for _ in 0..SWEEP_SOURCES.min(n) {
                let d = graph.vertex_distances(source);
                let mut far = (0.0, source);
                for (v, &x) in d.iter().enumerate() {
                    if x > far.0 {
                        far = (x, v);
                    }
                    nearest[v] = nearest[v].min(x);
                }
                best = better(best, (far.0, source, far.1));
                // next source: the vertex farthest from all sources so far
                source = (0..n)
                    .max_by(|&a, &b| nearest[a].total_cmp(&nearest[b]).then(b.cmp(&a)))
                    .unwrap_or(0);
            }
            best
        }
    };
    (best.0, [best.1, best.2])
}

pub fn diameter(mesh: &TriangleMesh, steiner_level: usize, mode: DiameterMode) -> Result<DiameterEstimate, GeodesicError> {
    if steiner_level > MAX_STEINER_LEVEL {
        return Err(GeodesicError::InvalidSteinerLevel(steiner_level));
    }
    if mode == DiameterMode::AllPairsExactGraph && mesh.vertex_count() > ALL_PAIRS_CAP {
        return Err(GeodesicError::TooLarge {
            vertices: mesh.vertex_count(),
            cap: ALL_PAIRS_CAP,
        });
    }
    let mut sequence = Vec::with_capacity(steiner_level + 1);
    let mut last = (0.0, [0, 0]);
    for level in 0..=steiner_level {
        let graph = SteinerGraph::build(mesh, level)?;
        last = diameter_on_graph(&graph, mode);
        sequence.push(last.0);
    }
    Ok(DiameterEstimate {
        value: last.0,
        steiner_level,
        attained_pair: last.1,
        mode,
        sequence,
    })
}
