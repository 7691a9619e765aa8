//! Discrete rehearsal of the curve argument behind the eigenvalue estimate.
//!
//! A path minimizing `∫ q^μ ds` is found on the Steiner graph. Along it, the
//! one-dimensional inequality
//!
//! ```text
//! (μλ₁ − max_i (2μ − 1)κᵢ) ∫ψ² ≤ (4 − μ)/(4 − 2μ) ∫(ψ′)²,   ψ = sin(πs/l)
//! ```
//!
//! is evaluated with trapezoidal quadrature.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ddg::CurvatureField;
use crate::geodesics::{GeodesicError, NodeLocation, SteinerGraph};
use crate::mesh::TriangleMesh;

/// Nodes needed by [`path_inequality`].
pub const MIN_INEQUALITY_NODES: usize = 4;
/// Nodes needed by [`path_eigen_check`].
pub const MIN_EIGEN_NODES: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProofcheckError {
    #[error("eigenfunction is not strictly positive: q[{vertex}] = {value}")]
    NonpositiveEigenfunction { vertex: usize, value: f64 },
    #[error("path has {nodes} nodes, at least {required} needed")]
    PathTooShort { nodes: usize, required: usize },
    #[error("mu = {0} outside the open interval (0, 2)")]
    MuOutOfRange(f64),
    #[error("path endpoints coincide at vertex {0}")]
    SameEndpoints(usize),
    #[error("eigenfunction has {found} entries for a mesh with {expected} vertices")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vertex {0} is unreachable")]
    Unreachable(usize),
    #[error(transparent)]
    Geodesic(#[from] GeodesicError),
}

/// A polyline on the Steiner graph with arclength in the mesh metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    /// Steiner graph node ids; ids below the vertex count are mesh vertices.
    pub vertices: Vec<usize>,
    pub arclength: Vec<f64>,
    pub length: f64,
    pub v_values: Vec<f64>,
    pub endpoints: [usize; 2],
    /// `∫ v ds` by the trapezoidal rule, the quantity the path minimizes.
    pub weighted_cost: f64,
}

impl PathSample {
    pub fn node_count(&self) -> usize {
        self.vertices.len()
    }

    /// A straight path of length `length` sampled at `nodes` equal steps.
    pub fn uniform(length: f64, nodes: usize) -> Self {
        let arclength: Vec<f64> = (0..nodes).map(|i| length * i as f64 / (nodes - 1) as f64).collect();
        PathSample {
            vertices: (0..nodes).collect(),
            arclength,
            length,
            v_values: vec![1.0; nodes],
            endpoints: [0, nodes - 1],
            weighted_cost: length,
        }
    }
}

/// Value of `q` at a graph node, linear along edges.
fn node_value(graph: &SteinerGraph, q: &[f64], node: usize) -> f64 {
    match graph.location(node) {
        NodeLocation::Vertex(v) => q[v],
        NodeLocation::OnEdge { edge, t } => {
            let [a, b] = graph.edge_endpoints(edge);
            (1.0 - t) * q[a] + t * q[b]
        }
    }
}

/// Minimizes `∫ q^μ ds` between vertices `a` and `b`. Each arc costs its
/// length times the mean of `q^μ` at its two ends.
pub fn weighted_path(
    mesh: &TriangleMesh,
    q: &[f64],
    mu: f64,
    a: usize,
    b: usize,
    steiner_level: usize,
) -> Result<PathSample, ProofcheckError> {
    let graph = SteinerGraph::build(mesh, steiner_level)?;
    weighted_path_on(&graph, q, mu, a, b)
}

/// As [`weighted_path`] on a prebuilt graph.
pub fn weighted_path_on(
    graph: &SteinerGraph,
    q: &[f64],
    mu: f64,
    a: usize,
    b: usize,
) -> Result<PathSample, ProofcheckError> {
    let n = graph.vertex_count();
    if q.len() != n {
        return Err(ProofcheckError::DimensionMismatch { expected: n, found: q.len() });
    }
    if !(mu > 0.0 && mu < 2.0) {
        return Err(ProofcheckError::MuOutOfRange(mu));
    }
    for &v in &[a, b] {
        if v >= n {
            return Err(GeodesicError::VertexOutOfRange { vertex: v, vertex_count: n }.into());
        }
    }
    if a == b {
        return Err(ProofcheckError::SameEndpoints(a));
    }
    if let Some((vertex, &value)) = q.iter().enumerate().find(|(_, &x)| !(x > 0.0)) {
        return Err(ProofcheckError::NonpositiveEigenfunction { vertex, value });
    }
    let v: Vec<f64> = (0..graph.node_count())
        .map(|node| node_value(graph, q, node).powf(mu))
        .collect();
    let paths = graph.shortest_paths_with(a, |from, to, len| 0.5 * len * (v[from] + v[to]));
    if !paths.dist[b].is_finite() {
        return Err(ProofcheckError::Unreachable(b));
    }
    let nodes = paths.path_to(b);
    let mut arclength = Vec::with_capacity(nodes.len());
    let mut s = 0.0;
    arclength.push(s);
    for w in nodes.windows(2) {
        s += graph.arc_length(w[0], w[1]).expect("consecutive path nodes share an arc");
        arclength.push(s);
    }
    Ok(PathSample {
        v_values: nodes.iter().map(|&node| v[node]).collect(),
        vertices: nodes,
        arclength,
        length: s,
        endpoints: [a, b],
        weighted_cost: paths.dist[b],
    })
}

/// Both sides of the path inequality for one μ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathInequality {
    pub mu: f64,
    pub length: f64,
    pub nodes: usize,
    /// `μλ₁ − max_i (2μ − 1)κᵢ`.
    pub potential_term: f64,
    /// `(4 − μ)/(4 − 2μ)`.
    pub coefficient: f64,
    pub psi_sq: f64,
    pub dpsi_sq: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

impl PathInequality {
    /// Slack after replacing `∫(ψ′)²/∫ψ²` with `π²/len²`, the exact
    /// Dirichlet value on a segment of length `len`.
    pub fn slack_with_length(&self, len: f64) -> f64 {
        (self.coefficient * PI * PI / (len * len) - self.potential_term) * self.psi_sq
    }

    /// `∫(ψ′)² / ∫ψ²`; close to `π²/l²` on a well-sampled path.
    pub fn rayleigh_quotient(&self) -> f64 {
        self.dpsi_sq / self.psi_sq
    }
}

pub fn path_inequality(
    path: &PathSample,
    lambda1: f64,
    field: &CurvatureField,
    mu: f64,
) -> Result<PathInequality, ProofcheckError> {
    let n = path.arclength.len();
    if n < MIN_INEQUALITY_NODES {
        return Err(ProofcheckError::PathTooShort {
            nodes: n,
            required: MIN_INEQUALITY_NODES,
        });
    }
    if !(mu > 0.0 && mu < 2.0) {
        return Err(ProofcheckError::MuOutOfRange(mu));
    }
    let l = path.length;
    let psi: Vec<f64> = path.arclength.iter().map(|&s| (PI * s / l).sin()).collect();
    let mut psi_sq = 0.0;
    let mut dpsi_sq = 0.0;
    for j in 0..n - 1 {
        let h = path.arclength[j + 1] - path.arclength[j];
        psi_sq += 0.5 * h * (psi[j] * psi[j] + psi[j + 1] * psi[j + 1]);
        let d = psi[j + 1] - psi[j];
        dpsi_sq += d * d / h;
    }
    let c = 2.0 * mu - 1.0;
    let max_term = field.kappa.iter().map(|&k| c * k).fold(f64::NEG_INFINITY, f64::max);
    let potential_term = mu * lambda1 - max_term;
    let coefficient = (4.0 - mu) / (4.0 - 2.0 * mu);
    let lhs = potential_term * psi_sq;
    let rhs = coefficient * dpsi_sq;
    Ok(PathInequality {
        mu,
        length: l,
        nodes: n,
        potential_term,
        coefficient,
        psi_sq,
        dpsi_sq,
        lhs,
        rhs,
        slack: rhs - lhs,
    })
}

/// Smallest eigenvalue of the Dirichlet problem `−u″ = λu` on the path's
/// arclength nodes: tridiagonal stiffness over lumped mass.
pub fn path_eigen_check(path: &PathSample) -> Result<f64, ProofcheckError> {
    let n = path.arclength.len();
    if n < MIN_EIGEN_NODES {
        return Err(ProofcheckError::PathTooShort {
            nodes: n,
            required: MIN_EIGEN_NODES,
        });
    }
    let h: Vec<f64> = path.arclength.windows(2).map(|w| w[1] - w[0]).collect();
    let m = n - 2;
    let inv_sqrt_mass: Vec<f64> = (0..m).map(|i| (0.5 * (h[i] + h[i + 1])).sqrt().recip()).collect();
    let mut a = DMatrix::zeros(m, m);
    for i in 0..m {
        a[(i, i)] = (1.0 / h[i] + 1.0 / h[i + 1]) * inv_sqrt_mass[i] * inv_sqrt_mass[i];
        if i + 1 < m {
            let off = -inv_sqrt_mass[i] * inv_sqrt_mass[i + 1] / h[i + 1];
            a[(i, i + 1)] = off;
            a[(i + 1, i)] = off;
        }
    }
    Ok(a.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_path_eigenvalue() {
        let lambda = path_eigen_check(&PathSample::uniform(1.0, 128)).unwrap();
        assert!((lambda / (PI * PI) - 1.0).abs() < 1e-3, "{lambda}");
        let lambda = path_eigen_check(&PathSample::uniform(2.0, 128)).unwrap();
        assert!((lambda / (PI * PI / 4.0) - 1.0).abs() < 1e-3, "{lambda}");
    }

    #[test]
    fn sine_rayleigh_quotient() {
        let p = PathSample::uniform(1.7, 64);
        let field = CurvatureField::from_kappa(vec![0.0; 3]);
        let ineq = path_inequality(&p, 0.0, &field, 1.0).unwrap();
        let exact = PI * PI / (1.7 * 1.7);
        assert!((ineq.rayleigh_quotient() / exact - 1.0).abs() < 1e-2);
        assert_eq!(ineq.lhs, 0.0);
        assert!(ineq.slack > 0.0);
    }

    #[test]
    fn short_paths_are_rejected() {
        let field = CurvatureField::from_kappa(vec![1.0]);
        assert_eq!(
            path_inequality(&PathSample::uniform(1.0, 3), 2.0, &field, 0.5),
            Err(ProofcheckError::PathTooShort { nodes: 3, required: 4 })
        );
        assert!(path_eigen_check(&PathSample::uniform(1.0, 7)).is_err());
    }

    #[test]
    fn round_half_mu_slack_sign() {
        // μλ₁ = 1 against (7/6)π²/l², positive while l < π√(7/6)
        let field = CurvatureField::from_kappa(vec![1.0; 4]);
        let ineq = path_inequality(&PathSample::uniform(PI, 200), 2.0, &field, 0.5).unwrap();
        assert!((ineq.coefficient - 7.0 / 6.0).abs() < 1e-15);
        assert!((ineq.potential_term - 1.0).abs() < 1e-15);
        assert!(ineq.slack > 0.0);
        assert!(ineq.slack_with_length(4.0) < 0.0);
    }
}
