//! Lowest eigenpair of the discrete Schrödinger operator −Δ+2κ.
//!
//! The generalized problem is `H q = λ M q` with `H = S + 2·diag(δ)` and the
//! lumped mass `M`. Because `κᵢ Mᵢ = δᵢ`, the potential term `2κ` integrated
//! against the lumped mass is exactly `2·diag(δ)`.

mod factor;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ddg::{CurvatureField, MassVector, SparseSymOperator};
use factor::SkylineCholesky;

/// Coefficient of κ in −Δ+2κ.
pub const POTENTIAL_SCALE: f64 = 2.0;

/// Largest system accepted by [`dense_oracle`].
pub const DENSE_ORACLE_CAP: usize = 2000;

/// Fraction of sign-flipped vertices above which a warning is logged.
pub const POSITIVITY_WARNING: f64 = 1e-3;

/// Seed of the random restart vector used by [`lowest_eigenpair`].
pub const DEFAULT_RESTART_SEED: u64 = 0x5b5_0001;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("dimension mismatch: {what} has length {found}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("no convergence after {iterations} iterations: residual {residual:.3e}, last λ = {lambda}")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        lambda: f64,
    },
    #[error("shifted matrix is not positive definite (row {row}, pivot {pivot:.3e})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("dense oracle is capped at dimension {cap}, got {dim}")]
    TooLarge { dim: usize, cap: usize },
}

#[derive(Debug, Clone)]
pub struct SchrodingerSystem {
    /// `S + 2·diag(δ)`.
    pub h: SparseSymOperator,
    pub mass: MassVector,
    /// Per-vertex potential `2κᵢ`.
    pub potential: Vec<f64>,
    pub potential_scale: f64,
}

impl SchrodingerSystem {
    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn min_potential(&self) -> f64 {
        self.potential.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Shift strictly below `min 2κᵢ`, which makes `H − σM` positive definite.
    pub fn default_shift(&self) -> f64 {
        let p = self.min_potential();
        p - p.abs().max(1.0)
    }

    /// `xᵀHx / xᵀMx`.
    pub fn rayleigh_quotient(&self, x: &[f64]) -> f64 {
        self.h.quadratic_form(x) / m_inner(&self.mass.0, x, x)
    }

    /// `H − σM`.
    pub fn shifted(&self, sigma: f64) -> SparseSymOperator {
        let d: Vec<f64> = self.mass.0.iter().map(|m| -sigma * m).collect();
        self.h.add_diagonal(&d)
    }

    /// Attempts a Cholesky factorization of `H − σM`.
    pub fn check_shift(&self, sigma: f64) -> Result<(), SpectrumError> {
        SkylineCholesky::factor(&self.shifted(sigma))
            .map(|_| ())
            .map_err(|e| SpectrumError::NotPositiveDefinite {
                row: e.row,
                pivot: e.pivot,
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub lambda1: f64,
    /// M-normalized eigenfunction with Σ qᵢMᵢ > 0.
    pub q: Vec<f64>,
    /// ‖Hq − λ₁Mq‖ / ‖Mq‖.
    pub residual: f64,
    pub iterations: usize,
    /// Fraction of vertices whose sign differs from the dominant sign.
    pub positivity_defect: f64,
    pub shift: f64,
    pub restarted: bool,
}

impl SpectrumResult {
    pub fn is_positive(&self) -> bool {
        self.positivity_defect == 0.0 && self.q.iter().all(|&x| x > 0.0)
    }
}

fn m_inner(m: &[f64], x: &[f64], y: &[f64]) -> f64 {
    m.iter().zip(x).zip(y).map(|((m, a), b)| m * a * b).sum()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn assemble(
    stiffness: &SparseSymOperator,
    mass: &MassVector,
    field: &CurvatureField,
) -> Result<SchrodingerSystem, SpectrumError> {
    let n = stiffness.dim();
    for (what, found) in [
        ("mass", mass.len()),
        ("curvature", field.kappa.len()),
        ("defect", field.defect.len()),
    ] {
        if found != n {
            return Err(SpectrumError::DimensionMismatch {
                what,
                expected: n,
                found,
            });
        }
    }
    let increment: Vec<f64> = field.defect.iter().map(|d| POTENTIAL_SCALE * d).collect();
    Ok(SchrodingerSystem {
        h: stiffness.add_diagonal(&increment),
        mass: mass.clone(),
        potential: field.kappa.iter().map(|k| POTENTIAL_SCALE * k).collect(),
        potential_scale: POTENTIAL_SCALE,
    })
}

struct Iterate {
    x: Vec<f64>,
    lambda: f64,
    residual: f64,
}

fn evaluate(sys: &SchrodingerSystem, x: Vec<f64>) -> Iterate {
    let m = sys.mass.as_slice();
    let scale = m_inner(m, &x, &x).sqrt();
    let x: Vec<f64> = x.iter().map(|v| v / scale).collect();
    let hx = sys.h.mul_vec(&x);
    let lambda = hx.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
    let mx: Vec<f64> = m.iter().zip(&x).map(|(m, v)| m * v).collect();
    let r: Vec<f64> = hx.iter().zip(&mx).map(|(h, mv)| h - lambda * mv).collect();
    Iterate {
        residual: norm(&r) / norm(&mx),
        x,
        lambda,
    }
}

/// Shifted inverse iteration on `(H − σM, M)` with a direct inner solver.
///
/// Starts from the constant vector. If the residual stalls (less than 10%
/// reduction over 10 iterations) the iteration restarts once from a
/// fixed-seed random vector.
pub fn lowest_eigenpair(
    sys: &SchrodingerSystem,
    tol: f64,
    max_iter: usize,
) -> Result<SpectrumResult, SpectrumError> {
    lowest_eigenpair_seeded(sys, tol, max_iter, DEFAULT_RESTART_SEED)
}

/// As [`lowest_eigenpair`] with a caller-chosen restart seed.
pub fn lowest_eigenpair_seeded(
    sys: &SchrodingerSystem,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<SpectrumResult, SpectrumError> {
    if !(tol > 0.0) {
        return Err(SpectrumError::InvalidTolerance(tol));
    }
    let n = sys.dim();
    let m = sys.mass.as_slice();
    let sigma = sys.default_shift();
    let factor = SkylineCholesky::factor(&sys.shifted(sigma)).map_err(|e| {
        SpectrumError::NotPositiveDefinite {
            row: e.row,
            pivot: e.pivot,
        }
    })?;
    log::debug!("factored {n}x{n} shifted matrix, envelope {}", factor.envelope_size());

    let mut current = evaluate(sys, vec![1.0; n]);
    let mut restarted = false;
    let mut history: Vec<f64> = vec![current.residual];
    let mut iterations = 0;
    while current.residual > tol && iterations < max_iter {
        iterations += 1;
        let rhs: Vec<f64> = m.iter().zip(&current.x).map(|(m, v)| m * v).collect();
        current = evaluate(sys, factor.solve(&rhs));
        history.push(current.residual);
        let stalled = history.len() > 10 && current.residual > 0.9 * history[history.len() - 11];
        if stalled && !restarted && current.residual > tol {
            log::debug!("inverse iteration stalled at residual {:.3e}; restarting", current.residual);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let start: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
            current = evaluate(sys, start);
            history.clear();
            history.push(current.residual);
            restarted = true;
        }
    }
    if current.residual > tol {
        return Err(SpectrumError::NoConvergence {
            iterations,
            residual: current.residual,
            lambda: current.lambda,
        });
    }

    let mut q = current.x;
    if m_inner(m, &q, &vec![1.0; n]) < 0.0 {
        for v in &mut q {
            *v = -*v;
        }
    }
    let negatives = q.iter().filter(|&&v| v <= 0.0).count();
    let positivity_defect = negatives as f64 / n as f64;
    if positivity_defect > POSITIVITY_WARNING {
        log::warn!(
            "first eigenfunction changes sign on {:.2}% of vertices",
            100.0 * positivity_defect
        );
    }
    // final Rayleigh quotient of the returned (normalized) vector
    let lambda1 = sys.rayleigh_quotient(&q);
    Ok(SpectrumResult {
        lambda1,
        q,
        residual: current.residual,
        iterations,
        positivity_defect,
        shift: sigma,
        restarted,
    })
}

/// All eigenvalues of `(H, M)` via the symmetric matrix `M^{-1/2} H M^{-1/2}`,
/// ascending.
pub fn dense_oracle(sys: &SchrodingerSystem) -> Result<Vec<f64>, SpectrumError> {
    let n = sys.dim();
    if n > DENSE_ORACLE_CAP {
        return Err(SpectrumError::TooLarge {
            dim: n,
            cap: DENSE_ORACLE_CAP,
        });
    }
    let inv_sqrt: Vec<f64> = sys.mass.0.iter().map(|m| 1.0 / m.sqrt()).collect();
    let mut a = sys.h.to_dense();
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] *= inv_sqrt[i] * inv_sqrt[j];
        }
    }
    // symmetrize away rounding
    let a = (&a + a.transpose()) * 0.5;
    let mut values: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}
