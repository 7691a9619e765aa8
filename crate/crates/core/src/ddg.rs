//! Discrete Laplace–Beltrami operator and Gauss curvature, from edge lengths.
//!
//! Conventions: the stiffness matrix `S` discretizes `-Δ` (positive
//! semidefinite), the lumped mass `M` is barycentric, and curvature is the
//! angle defect divided by the lumped area, so `κᵢ Mᵢ = δᵢ` holds exactly.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mesh::{triangle_area, MeshInvariants, TriangleMesh};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DdgError {
    #[error("degenerate triangle {face} with side lengths {lengths:?}")]
    DegenerateTriangle { face: usize, lengths: [f64; 3] },
}

/// Interior angles of a triangle; entry `k` is the angle opposite side `k`.
pub fn corner_angles(l: [f64; 3]) -> [f64; 3] {
    let four_area = 4.0 * triangle_area(l);
    std::array::from_fn(|k| {
        let (a, b, c) = (l[k], l[(k + 1) % 3], l[(k + 2) % 3]);
        four_area.atan2(b * b + c * c - a * a)
    })
}

fn face_geometry(mesh: &TriangleMesh, f: usize) -> Result<([f64; 3], f64), DdgError> {
    let l = mesh.face_side_lengths(f);
    let area = triangle_area(l);
    if area > 0.0 {
        Ok((l, area))
    } else {
        Err(DdgError::DegenerateTriangle { face: f, lengths: l })
    }
}

/// Symmetric sparse matrix in compressed-row form (both triangles stored).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymOperator {
    /// Sums duplicate entries. The caller supplies both (i, j) and (j, i).
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *values.last_mut().expect("entry exists") += v;
                continue;
            }
            last = Some((i, j));
            row_ptr[i + 1] += 1;
            col_idx.push(j);
            values.push(v);
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseSymOperator {
            dim,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Largest |A_ij - A_ji|.
    pub fn asymmetry(&self) -> f64 {
        (0..self.dim)
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    pub fn add_diagonal(&self, d: &[f64]) -> SparseSymOperator {
        assert_eq!(d.len(), self.dim);
        let mut out = self.clone();
        for (i, di) in d.iter().enumerate() {
            let range = out.row_ptr[i]..out.row_ptr[i + 1];
            match out.col_idx[range.clone()].binary_search(&i) {
                Ok(k) => out.values[range.start + k] += di,
                Err(_) => panic!("row {i} has no diagonal entry"),
            }
        }
        out
    }

    /// MatrixMarket coordinate dump (lower triangle, 1-based).
    pub fn to_matrix_market(&self) -> String {
        let lower: Vec<(usize, usize, f64)> = (0..self.dim)
            .flat_map(|i| self.row(i).filter(move |&(j, _)| j <= i).map(move |(j, v)| (i, j, v)))
            .collect();
        let mut out = String::from("%%MatrixMarket matrix coordinate real symmetric\n");
        let _ = writeln!(out, "{} {} {}", self.dim, self.dim, lower.len());
        for (i, j, v) in lower {
            let _ = writeln!(out, "{} {} {:.16e}", i + 1, j + 1, v);
        }
        out
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }
}

/// Per-vertex lumped area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassVector(pub Vec<f64>);

impl MassVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureField {
    /// κᵢ = δᵢ / Mᵢ.
    pub kappa: Vec<f64>,
    /// Angle defect δᵢ = 2π − Σ incident corner angles.
    pub defect: Vec<f64>,
    pub areas: MassVector,
}

impl CurvatureField {
    /// Field with prescribed curvature values and unit areas; for evaluating
    /// bounds on analytic data.
    pub fn from_kappa(kappa: Vec<f64>) -> Self {
        let areas = MassVector(vec![1.0; kappa.len()]);
        CurvatureField {
            defect: kappa.clone(),
            kappa,
            areas,
        }
    }

    pub fn min_kappa(&self) -> f64 {
        self.kappa.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_kappa(&self) -> f64 {
        self.kappa.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn total_defect(&self) -> f64 {
        self.defect.iter().sum()
    }
}

/// Cotangent stiffness matrix (discrete −Δ).
pub fn stiffness(mesh: &TriangleMesh) -> Result<SparseSymOperator, DdgError> {
    let n = mesh.vertex_count();
    let mut triplets = Vec::with_capacity(12 * mesh.face_count() + n);
    for i in 0..n {
        triplets.push((i, i, 0.0));
    }
    for (f, tri) in mesh.faces().iter().enumerate() {
        let (l, area) = face_geometry(mesh, f)?;
        for k in 0..3 {
            // corner k is opposite the edge joining corners k+1, k+2
            let (a, b, c) = (l[k], l[(k + 1) % 3], l[(k + 2) % 3]);
            let cot = (b * b + c * c - a * a) / (4.0 * area);
            let w = 0.5 * cot;
            let (i, j) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
            triplets.push((i, j, -w));
            triplets.push((j, i, -w));
            triplets.push((i, i, w));
            triplets.push((j, j, w));
        }
    }
    Ok(SparseSymOperator::from_triplets(n, triplets))
}

/// Barycentric lumped mass: a third of each incident triangle's area.
pub fn mass(mesh: &TriangleMesh) -> Result<MassVector, DdgError> {
    let mut m = vec![0.0; mesh.vertex_count()];
    for (f, tri) in mesh.faces().iter().enumerate() {
        let (_, area) = face_geometry(mesh, f)?;
        for &v in tri {
            m[v] += area / 3.0;
        }
    }
    Ok(MassVector(m))
}

pub fn curvature(mesh: &TriangleMesh) -> Result<CurvatureField, DdgError> {
    let areas = mass(mesh)?;
    let mut angle_sum = vec![0.0; mesh.vertex_count()];
    for (f, tri) in mesh.faces().iter().enumerate() {
        let (l, _) = face_geometry(mesh, f)?;
        for (v, a) in tri.iter().zip(corner_angles(l)) {
            angle_sum[*v] += a;
        }
    }
    let defect: Vec<f64> = angle_sum.iter().map(|s| TAU - s).collect();
    let kappa = defect.iter().zip(areas.as_slice()).map(|(d, m)| d / m).collect();
    Ok(CurvatureField {
        kappa,
        defect,
        areas,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussBonnetAudit {
    pub defect_sum: f64,
    pub expected: f64,
    pub difference: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compares Σδᵢ with 2πχ; passes iff the gap is at most 1e-8·max(1, V).
pub fn gauss_bonnet_audit(field: &CurvatureField, inv: &MeshInvariants) -> GaussBonnetAudit {
    let defect_sum = field.total_defect();
    let expected = 2.0 * PI * inv.euler_characteristic as f64;
    let difference = defect_sum - expected;
    let tolerance = 1e-8 * (inv.vertex_count.max(1) as f64);
    GaussBonnetAudit {
        defect_sum,
        expected,
        difference,
        tolerance,
        passed: difference.abs() <= tolerance,
    }
}
