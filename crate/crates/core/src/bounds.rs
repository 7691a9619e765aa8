//! Upper bounds for λ₁ in terms of curvature and diameter, and the Jacobi
//! operator relations for CMC surfaces in the round 3-sphere.
//!
//! For `0 < μ < 2` the estimate is
//!
//! ```text
//! λ₁ ≤ max_i ((2μ − 1)/μ · κᵢ) + (4 − μ)/(μ(4 − 2μ)) · π²/D²
//! ```
//!
//! and at `μ = 1/2` the curvature term vanishes, leaving `7π²/(3D²)`.
//! Constant test functions give `λ₁ ≤ 4πχ/Area`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ddg::CurvatureField;
use crate::geodesics::DiameterEstimate;
use crate::mesh::MeshInvariants;
use crate::spectrum::SpectrumResult;

/// Smallest μ on the default optimization grid; the grid is mirrored at 2.
pub const MU_LOWER: f64 = 1e-3;
pub const DEFAULT_MU_GRID: usize = 64;
pub const MIN_MU_GRID: usize = 16;
/// Absolute part of the verification tolerance.
pub const ABSOLUTE_TOL: f64 = 1e-8;
/// Relative discretization allowance on each right-hand side.
pub const RELATIVE_TOL: f64 = 0.05;
/// Equality tolerance for the closed-form Jacobi checks.
pub const JACOBI_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("mu = {0} outside the open interval (0, 2)")]
    MuOutOfRange(f64),
    #[error("diameter must be positive and finite, got {0}")]
    InvalidDiameter(f64),
    #[error("mu grid of {0} points is below the minimum of {MIN_MU_GRID}")]
    GridTooSmall(usize),
    #[error("curvature field is empty")]
    EmptyField,
    #[error("inconsistent inputs: {what} has {found} entries, expected {expected}")]
    InconsistentInputs {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("|A|² must be nonnegative, got {0}")]
    NegativeNormSquared(f64),
}

/// `(2μ − 1)/μ`, the signed weight on curvature.
pub fn curvature_coefficient(mu: f64) -> f64 {
    (2.0 * mu - 1.0) / mu
}

/// `(4 − μ)/(μ(4 − 2μ))`, the weight on `π²/D²`.
pub fn diameter_coefficient(mu: f64) -> f64 {
    (4.0 - mu) / (mu * (4.0 - 2.0 * mu))
}

/// `7π²/(3D²)`.
pub fn universal_rhs(diameter: f64) -> f64 {
    7.0 * PI * PI / (3.0 * diameter * diameter)
}

/// `4πχ/Area`, the value of the Rayleigh quotient at a constant function.
pub fn area_bound(euler_characteristic: i64, area: f64) -> f64 {
    4.0 * PI * euler_characteristic as f64 / area
}

/// Right-hand side of the estimate at one μ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhsTerms {
    pub mu: f64,
    pub curvature_term: f64,
    pub diameter_term: f64,
    pub rhs: f64,
    /// Vertex attaining the maximum in the curvature term.
    pub argmax_vertex: usize,
}

fn check_mu(mu: f64) -> Result<(), BoundsError> {
    if mu > 0.0 && mu < 2.0 {
        Ok(())
    } else {
        Err(BoundsError::MuOutOfRange(mu))
    }
}

fn check_diameter(d: f64) -> Result<(), BoundsError> {
    if d > 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(BoundsError::InvalidDiameter(d))
    }
}

/// Evaluates the estimate. The coefficient sits inside the maximum, so
/// μ < 1/2 selects the smallest κ and μ > 1/2 the largest.
pub fn rhs_estimate(mu: f64, field: &CurvatureField, diameter: f64) -> Result<RhsTerms, BoundsError> {
    check_mu(mu)?;
    check_diameter(diameter)?;
    if field.kappa.is_empty() {
        return Err(BoundsError::EmptyField);
    }
    let c = curvature_coefficient(mu);
    let (argmax_vertex, curvature_term) = field
        .kappa
        .iter()
        .map(|&k| c * k)
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    let diameter_term = diameter_coefficient(mu) * PI * PI / (diameter * diameter);
    Ok(RhsTerms {
        mu,
        curvature_term,
        diameter_term,
        rhs: curvature_term + diameter_term,
        argmax_vertex,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuOptimum {
    pub best_mu: f64,
    pub best_rhs: f64,
    /// Lower end of the searched interval `[lower, 2 − lower]`.
    pub lower: f64,
    /// The minimizer sits on the lower endpoint: the infimum is approached
    /// as μ → 0⁺ and is not attained inside the searched interval.
    pub at_lower_endpoint: bool,
}

/// Minimizes the right-hand side over μ ∈ [[`MU_LOWER`], 2 − [`MU_LOWER`]].
pub fn optimize_mu(field: &CurvatureField, diameter: f64, grid: usize) -> Result<MuOptimum, BoundsError> {
    optimize_mu_from(field, diameter, grid, MU_LOWER)
}

/// As [`optimize_mu`] with a caller-chosen lower endpoint.
pub fn optimize_mu_from(
    field: &CurvatureField,
    diameter: f64,
    grid: usize,
    lower: f64,
) -> Result<MuOptimum, BoundsError> {
    if grid < MIN_MU_GRID {
        return Err(BoundsError::GridTooSmall(grid));
    }
    check_mu(lower)?;
    if lower >= 1.0 {
        return Err(BoundsError::MuOutOfRange(lower));
    }
    check_diameter(diameter)?;
    if field.kappa.is_empty() {
        return Err(BoundsError::EmptyField);
    }
    // Only the extremes of κ matter, so each evaluation is O(1).
    let (kmin, kmax) = (field.min_kappa(), field.max_kappa());
    let pi2_d2 = PI * PI / (diameter * diameter);
    let terms = |mu: f64| {
        let c = curvature_coefficient(mu);
        ((c * kmin).max(c * kmax), diameter_coefficient(mu) * pi2_d2)
    };
    // The two terms cancel near μ → 0, so an improvement must beat the
    // rounding error of the value it replaces.
    let (best_mu, best_rhs) = minimize_over_mu(grid, lower, |mu| {
        let (a, b) = terms(mu);
        (a + b, 16.0 * f64::EPSILON * (a.abs() + b.abs()))
    });
    Ok(MuOptimum {
        best_mu,
        best_rhs,
        lower,
        at_lower_endpoint: best_mu <= lower,
    })
}

/// Geometric grid on `[lower, 1]` plus uniform grid on `[lower, 2 − lower]`
/// plus μ = 1/2, then golden-section search between the neighbours of the
/// best grid point. `f` returns a value and its rounding noise.
fn minimize_over_mu(grid: usize, lower: f64, f: impl Fn(f64) -> (f64, f64)) -> (f64, f64) {
    let upper = 2.0 - lower;
    let half = grid / 2;
    let mut mus: Vec<f64> = (0..half)
        .map(|i| lower * (1.0 / lower).powf(i as f64 / (half - 1) as f64))
        .chain((0..grid - half).map(|i| lower + (upper - lower) * i as f64 / (grid - half - 1) as f64))
        .chain([0.5])
        .collect();
    mus.sort_by(f64::total_cmp);
    mus.dedup();

    let value = |mu: f64| f(mu).0;
    let (k, _) = mus
        .iter()
        .enumerate()
        .map(|(i, &m)| (i, value(m)))
        .fold((0, f64::INFINITY), |best, (i, v)| if v < best.1 { (i, v) } else { best });
    let (mut best_mu, (mut best, noise)) = (mus[k], f(mus[k]));

    let (mut a, mut b) = (mus[k.saturating_sub(1)], mus[(k + 1).min(mus.len() - 1)]);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let (mut f1, mut f2) = (value(x1), value(x2));
    for _ in 0..80 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = value(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = value(x2);
        }
    }
    let threshold = best - noise;
    for (m, v) in [(x1, f1), (x2, f2)] {
        if v < threshold && v < best {
            best_mu = m;
            best = v;
        }
    }
    (best_mu, best)
}

/// Smallest `rhs(μ) + tol(μ)` over μ, where the allowance is applied to
/// each term separately: `1e-8 + 0.05·(|curvature_term| + |diameter_term|)`.
/// Returns `(μ, rhs(μ), tol(μ))` at the minimizer.
pub fn eq1_threshold(
    field: &CurvatureField,
    diameter: f64,
    grid: usize,
) -> Result<(f64, f64, f64), BoundsError> {
    if grid < MIN_MU_GRID {
        return Err(BoundsError::GridTooSmall(grid));
    }
    check_diameter(diameter)?;
    if field.kappa.is_empty() {
        return Err(BoundsError::EmptyField);
    }
    let (kmin, kmax) = (field.min_kappa(), field.max_kappa());
    let pi2_d2 = PI * PI / (diameter * diameter);
    let parts = |mu: f64| {
        let c = curvature_coefficient(mu);
        let (a, b) = ((c * kmin).max(c * kmax), diameter_coefficient(mu) * pi2_d2);
        (a + b, ABSOLUTE_TOL + RELATIVE_TOL * (a.abs() + b.abs()))
    };
    let (mu, _) = minimize_over_mu(grid, MU_LOWER, |mu| {
        let (rhs, tol) = parts(mu);
        (rhs + tol, 16.0 * f64::EPSILON * (rhs.abs() + tol))
    });
    let (rhs, tol) = parts(mu);
    Ok((mu, rhs, tol))
}

/// `1e-8 + 0.05·|rhs|`.
pub fn tolerance(rhs: f64) -> f64 {
    ABSOLUTE_TOL + RELATIVE_TOL * rhs.abs()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// Terms below are evaluated at this μ, fixed to 1/2.
    pub mu: f64,
    pub curvature_term: f64,
    pub diameter_term: f64,
    pub rhs: f64,
    pub lambda1: f64,
    pub margin: f64,
    pub universal_rhs: f64,
    pub area_bound: f64,
    pub area_margin: f64,
    /// `2Σδᵢ / ΣMᵢ`, the exact discrete Rayleigh quotient of a constant.
    pub discrete_area_bound: f64,
    pub best_mu: f64,
    pub best_rhs: f64,
    pub best_margin: f64,
    pub best_mu_at_lower_endpoint: bool,
    pub best_argmax_vertex: usize,
    /// `min κ − π²/D²`. Positive values contradict Bonnet–Myers and come
    /// from discretization; they make the right-hand side fall like `−1/μ`.
    pub bonnet_myers_defect: f64,
    /// μ where `rhs + tol` is smallest; the eq1 verdict is taken there.
    pub eq1_mu: f64,
    pub eq1_rhs: f64,
    pub eq1_tol: f64,
    pub eq2_tol: f64,
    pub remark1_tol: f64,
    pub eq1_ok: bool,
    pub eq2_ok: bool,
    pub remark1_ok: bool,
    pub warnings: Vec<String>,
    pub diameter_used: DiameterEstimate,
}

impl BoundReport {
    pub fn all_ok(&self) -> bool {
        self.eq1_ok && self.eq2_ok && self.remark1_ok
    }
}

/// Checks λ₁ against all three bounds, each with its own tolerance. The
/// eq2 and area checks use `1e-8 + 0.05·|rhs|`; eq1 uses [`eq1_threshold`].
pub fn verify(
    invariants: &MeshInvariants,
    field: &CurvatureField,
    spectrum: &SpectrumResult,
    diameter: &DiameterEstimate,
    mu_grid: usize,
) -> Result<BoundReport, BoundsError> {
    let v = invariants.vertex_count;
    for (what, found) in [
        ("curvature field", field.kappa.len()),
        ("mass vector", field.areas.len()),
        ("eigenvector", spectrum.q.len()),
    ] {
        if found != v {
            return Err(BoundsError::InconsistentInputs { what, expected: v, found });
        }
    }
    if let Some(&bad) = diameter.attained_pair.iter().find(|&&i| i >= v) {
        return Err(BoundsError::InconsistentInputs {
            what: "diameter endpoint index",
            expected: v,
            found: bad,
        });
    }

    let half = rhs_estimate(0.5, field, diameter.value)?;
    let best = optimize_mu(field, diameter.value, mu_grid)?;
    let best_terms = rhs_estimate(best.best_mu, field, diameter.value)?;
    let lambda1 = spectrum.lambda1;
    let area = field.areas.total();
    let area_bound = area_bound(invariants.euler_characteristic, area);
    let universal = universal_rhs(diameter.value);

    let (eq1_mu, eq1_rhs, eq1_tol) = eq1_threshold(field, diameter.value, mu_grid)?;
    let (eq2_tol, remark1_tol) = (tolerance(universal), tolerance(area_bound));
    let bonnet_myers_defect = field.min_kappa() - PI * PI / (diameter.value * diameter.value);
    let mut warnings = Vec::new();
    if field.min_kappa() < 0.0 {
        warnings.push(
            "negative curvature present: the regime where mu > 1/2 can give a negative bound is untested at scale"
                .to_string(),
        );
    }
    if best.at_lower_endpoint {
        warnings.push(format!(
            "best mu sits on the lower grid endpoint {}: the infimum is approached as mu -> 0",
            best.lower
        ));
    }
    if bonnet_myers_defect > 0.0 && best.best_rhs < lambda1 {
        warnings.push(format!(
            "min kappa exceeds pi^2/D^2 by {bonnet_myers_defect:.3e}; the raw best rhs is driven by mu -> 0"
        ));
    }
    Ok(BoundReport {
        mu: half.mu,
        curvature_term: half.curvature_term,
        diameter_term: half.diameter_term,
        rhs: half.rhs,
        lambda1,
        margin: half.rhs - lambda1,
        universal_rhs: universal,
        area_bound,
        area_margin: area_bound - lambda1,
        discrete_area_bound: 2.0 * field.total_defect() / area,
        best_mu: best.best_mu,
        best_rhs: best.best_rhs,
        best_margin: best.best_rhs - lambda1,
        best_mu_at_lower_endpoint: best.at_lower_endpoint,
        best_argmax_vertex: best_terms.argmax_vertex,
        bonnet_myers_defect,
        eq1_mu,
        eq1_rhs,
        eq1_tol,
        eq2_tol,
        remark1_tol,
        eq1_ok: lambda1 <= eq1_rhs + eq1_tol,
        eq2_ok: lambda1 <= universal + eq2_tol,
        remark1_ok: lambda1 <= area_bound + remark1_tol,
        warnings,
        diameter_used: diameter.clone(),
    })
}

/// Jacobi operator data for a CMC surface in the round 3-sphere, with the
/// mean curvature and `|A|²` supplied analytically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiReport {
    #[serde(rename = "H_cmc")]
    pub h_cmc: f64,
    #[serde(rename = "A_norm_sq")]
    pub a_norm_sq: f64,
    /// Gauss equation: `(2 + 4H² − |A|²)/2`.
    pub kappa_from_gauss: f64,
    pub lambda1: f64,
    /// `λ₁ − 4 − 4H²`.
    pub lambda1_jacobi: f64,
    pub umbilical: bool,
    /// Minimal case: `λ₁ᴶ ≤ −2`. Vacuously true when `H ≠ 0`.
    pub simons_ok: bool,
    /// Umbilical: `λ₁ᴶ = −2(1 + H²)`; otherwise `λ₁ᴶ ≤ −4(1 + H²)`.
    pub alias_ok: bool,
}

pub fn jacobi_report(lambda1: f64, h_cmc: f64, a_norm_sq: f64, umbilical: bool) -> Result<JacobiReport, BoundsError> {
    if !(a_norm_sq >= 0.0) {
        return Err(BoundsError::NegativeNormSquared(a_norm_sq));
    }
    let h2 = h_cmc * h_cmc;
    let lambda1_jacobi = lambda1 - 4.0 - 4.0 * h2;
    let slack = JACOBI_TOL * lambda1_jacobi.abs().max(1.0);
    let simons_ok = h_cmc != 0.0 || lambda1_jacobi <= -2.0 + slack;
    let alias_ok = if umbilical {
        (lambda1_jacobi + 2.0 * (1.0 + h2)).abs() <= slack
    } else {
        lambda1_jacobi <= -4.0 * (1.0 + h2) + slack
    };
    Ok(JacobiReport {
        h_cmc,
        a_norm_sq,
        kappa_from_gauss: (2.0 + 4.0 * h2 - a_norm_sq) / 2.0,
        lambda1,
        lambda1_jacobi,
        umbilical,
        simons_ok,
        alias_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(k: f64, n: usize) -> CurvatureField {
        CurvatureField::from_kappa(vec![k; n])
    }

    #[test]
    fn half_mu_drops_curvature() {
        let t = rhs_estimate(0.5, &CurvatureField::from_kappa(vec![-3.0, 1.0, 7.0]), PI).unwrap();
        assert_eq!(t.curvature_term, 0.0);
        assert!((t.rhs - 7.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn unit_mu_on_round_data() {
        // coefficient (4 − 1)/(1·2) = 3/2 on π²/π²
        let t = rhs_estimate(1.0, &constant(1.0, 5), PI).unwrap();
        assert!((t.curvature_term - 1.0).abs() < 1e-15);
        assert!((t.rhs - 2.5).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_mu_and_diameter() {
        let f = constant(1.0, 3);
        for mu in [0.0, 2.0, -1.0, f64::NAN] {
            assert!(matches!(rhs_estimate(mu, &f, 1.0), Err(BoundsError::MuOutOfRange(_))));
        }
        assert_eq!(rhs_estimate(1.0, &f, 0.0), Err(BoundsError::InvalidDiameter(0.0)));
        assert_eq!(optimize_mu(&f, 1.0, 8), Err(BoundsError::GridTooSmall(8)));
    }

    #[test]
    fn flat_optimum_matches_stationary_point() {
        // d/dμ [1/μ + 1/(4 − 2μ)] = 0 at μ = 4/(2 + √2)
        let opt = optimize_mu(&constant(0.0, 4), 0.5, 64).unwrap();
        let exact = 4.0 / (2.0 + 2f64.sqrt());
        assert!((opt.best_mu - exact).abs() < 1e-6, "{}", opt.best_mu);
        assert!(!opt.at_lower_endpoint);
    }

    #[test]
    fn round_optimum_is_a_boundary_infimum() {
        // for κ = 1, D = π the sum is 2 + 1/(4 − 2μ), increasing in μ
        let f = constant(1.0, 4);
        let mut previous = f64::INFINITY;
        for lower in [1e-2, 1e-3, 1e-4, 1e-6] {
            let opt = optimize_mu_from(&f, PI, 64, lower).unwrap();
            assert!(opt.at_lower_endpoint);
            assert!((opt.best_rhs - (2.0 + 1.0 / (4.0 - 2.0 * lower))).abs() < 1e-9);
            assert!(opt.best_rhs < previous);
            previous = opt.best_rhs;
        }
        assert!((previous - 2.25).abs() < 1e-6);
    }

    #[test]
    fn jacobi_closed_forms() {
        let clifford = jacobi_report(0.0, 0.0, 2.0, false).unwrap();
        assert_eq!(clifford.lambda1_jacobi, -4.0);
        assert_eq!(clifford.kappa_from_gauss, 0.0);
        assert!(clifford.simons_ok && clifford.alias_ok);

        let equator = jacobi_report(2.0, 0.0, 0.0, true).unwrap();
        assert_eq!(equator.kappa_from_gauss, 1.0);
        assert_eq!(equator.lambda1_jacobi, -2.0);
        assert!(equator.simons_ok && equator.alias_ok);

        let cmc = jacobi_report(4.0, 1.0, 0.0, true).unwrap();
        assert_eq!(cmc.lambda1_jacobi, -4.0);
        assert!(cmc.alias_ok);

        // a non-umbilical value above −4(1 + H²) fails
        assert!(!jacobi_report(0.5, 0.0, 2.0, false).unwrap().alias_ok);
        assert!(jacobi_report(0.0, 0.0, -1.0, false).is_err());
    }
}
