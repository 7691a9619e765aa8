//! Discrete verification of first-eigenvalue bounds for the operator −Δ+2κ
//! on closed surfaces.
//!
//! Pipeline: [`mesh`] builds and validates a surface, [`ddg`] assembles the
//! cotangent Laplacian and angle-defect curvature, [`spectrum`] solves for the
//! lowest eigenpair, [`geodesics`] estimates the diameter, [`bounds`]
//! evaluates the estimates, and [`proofcheck`] replays the one-dimensional
//! inequality along a weighted minimizing path.

pub mod bounds;
pub mod ddg;
pub mod geodesics;
pub mod mesh;
pub mod proofcheck;
pub mod spectrum;
