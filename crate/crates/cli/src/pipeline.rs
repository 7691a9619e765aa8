//! generate → validate → ddg → spectrum → geodesics → bounds → proofcheck.

use std::f64::consts::PI;
use std::time::Instant;

use sbv_core::bounds::{self, BoundReport, JacobiReport};
use sbv_core::ddg::{self, GaussBonnetAudit};
use sbv_core::geodesics::{self, DiameterEstimate, DiameterMode, SteinerGraph};
use sbv_core::mesh::{self, MeshInvariants, TriangleMesh};
use sbv_core::proofcheck::{self, PathInequality};
use sbv_core::spectrum;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;
/// Meshes below this many vertices get a `coarse-mesh` warning.
pub const COARSE_MESH_VERTICES: usize = 100;
/// Path-inequality slack is asserted (not only recorded) from this size on.
pub const PROOFCHECK_ASSERT_VERTICES: usize = 1000;
/// Allowed negative slack, relative to the right-hand side.
pub const PROOFCHECK_ALLOWANCE: f64 = 0.02;
pub const PROOFCHECK_MUS: [f64; 3] = [0.5, 1.0, 1.5];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshSection {
    pub tag: String,
    pub invariants: MeshInvariants,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DdgSection {
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub total_area: f64,
    pub stiffness_nnz: usize,
    pub gauss_bonnet: GaussBonnetAudit,
}

/// Eigenpair diagnostics; the eigenvector itself is not written out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSection {
    pub lambda1: f64,
    pub residual: f64,
    pub iterations: usize,
    pub positivity_defect: f64,
    pub shift: f64,
    pub restarted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofcheckEntry {
    pub mu: f64,
    pub endpoints: [usize; 2],
    pub nodes: usize,
    pub length: f64,
    pub weighted_cost: f64,
    pub path_eigenvalue: f64,
    /// `π²/l²`.
    pub dirichlet_exact: f64,
    pub inequality: PathInequality,
    /// Slack with `π²/l²` replaced by `π²/D²`.
    pub slack_at_diameter: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofcheckSection {
    pub steiner_level: usize,
    /// Whether `ok` counts toward the run verdict; small meshes only record.
    pub asserted: bool,
    pub ok: bool,
    pub entries: Vec<ProofcheckEntry>,
}

/// Wall-clock seconds per stage. Excluded from determinism comparisons.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub generate: f64,
    pub ddg: f64,
    pub spectrum: f64,
    pub diameter: f64,
    pub bounds: f64,
    pub proofcheck: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub config: RunConfig,
    pub mesh: MeshSection,
    pub ddg: DdgSection,
    pub spectrum: SpectrumSection,
    pub diameter: DiameterEstimate,
    pub bounds: BoundReport,
    pub jacobi: Option<JacobiReport>,
    pub proofcheck: Option<ProofcheckSection>,
    pub warnings: Vec<String>,
    pub ok: bool,
    pub timing: Timing,
}

/// Everything computed for one mesh, including the eigenvector.
pub struct Analysis {
    pub report: Report,
    pub q: Vec<f64>,
    pub kappa: Vec<f64>,
}

/// Full pipeline for a generated surface.
pub fn run_verify(config: &RunConfig) -> Result<Report, CliError> {
    config.check()?;
    let start = Instant::now();
    let mesh = mesh::generate(&config.surface)?;
    let generated = start.elapsed().as_secs_f64();
    let mut analysis = analyze(&mesh, config)?;
    analysis.report.timing.generate = generated;
    analysis.report.timing.total += generated;
    Ok(analysis.report)
}

fn secs(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

/// Runs every stage after generation on `mesh`.
pub fn analyze(mesh: &TriangleMesh, config: &RunConfig) -> Result<Analysis, CliError> {
    let mut timing = Timing::default();
    let mut warnings = Vec::new();

    let t = Instant::now();
    let invariants = mesh::validate(mesh)?;
    if invariants.vertex_count < COARSE_MESH_VERTICES {
        warnings.push(format!(
            "coarse-mesh: {} vertices; discretization error may exceed the verification allowance",
            invariants.vertex_count
        ));
    }
    let field = ddg::curvature(mesh)?;
    let stiffness = ddg::stiffness(mesh)?;
    let gauss_bonnet = ddg::gauss_bonnet_audit(&field, &invariants);
    if !gauss_bonnet.passed {
        warnings.push(format!("gauss-bonnet: defect sum off by {:.3e}", gauss_bonnet.difference));
    }
    timing.ddg = secs(t);

    let t = Instant::now();
    let system = spectrum::assemble(&stiffness, &field.areas, &field)?;
    let eig = spectrum::lowest_eigenpair_seeded(&system, config.eigen_tol, config.max_iter, config.seed)?;
    if !eig.is_positive() {
        warnings.push(format!(
            "eigenfunction-sign: nonpositive on {:.3}% of vertices",
            100.0 * eig.positivity_defect
        ));
    }
    timing.spectrum = secs(t);

    let t = Instant::now();
    let mode = DiameterMode::auto(invariants.vertex_count);
    let diameter = geodesics::diameter(mesh, config.steiner_level, mode)?;
    timing.diameter = secs(t);

    let t = Instant::now();
    let bound_report = bounds::verify(&invariants, &field, &eig, &diameter, config.mu_grid)?;
    warnings.extend(bound_report.warnings.iter().cloned());
    let jacobi = match config.jacobi {
        Some(j) => Some(bounds::jacobi_report(eig.lambda1, j.h_cmc, j.a_norm_sq, j.umbilical)?),
        None => None,
    };
    timing.bounds = secs(t);

    let t = Instant::now();
    let proofcheck = if config.proofcheck {
        Some(run_proofcheck(
            mesh,
            &eig.q,
            eig.lambda1,
            &field,
            &diameter,
            config.steiner_level,
        )?)
    } else {
        None
    };
    timing.proofcheck = secs(t);
    timing.total = timing.ddg + timing.spectrum + timing.diameter + timing.bounds + timing.proofcheck;

    let ok = bound_report.all_ok()
        && gauss_bonnet.passed
        && jacobi.is_none_or(|j| j.simons_ok && j.alias_ok)
        && proofcheck.as_ref().is_none_or(|p| !p.asserted || p.ok);

    let report = Report {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        mesh: MeshSection {
            tag: mesh.tag().to_string(),
            invariants,
        },
        ddg: DdgSection {
            kappa_min: field.min_kappa(),
            kappa_max: field.max_kappa(),
            total_area: field.areas.total(),
            stiffness_nnz: stiffness.nnz(),
            gauss_bonnet,
        },
        spectrum: SpectrumSection {
            lambda1: eig.lambda1,
            residual: eig.residual,
            iterations: eig.iterations,
            positivity_defect: eig.positivity_defect,
            shift: eig.shift,
            restarted: eig.restarted,
        },
        diameter,
        bounds: bound_report,
        jacobi,
        proofcheck,
        warnings,
        ok,
        timing,
    };
    Ok(Analysis {
        report,
        q: eig.q,
        kappa: field.kappa,
    })
}

/// Weighted paths between the diameter-attaining pair at each μ in
/// [`PROOFCHECK_MUS`].
pub fn run_proofcheck(
    mesh: &TriangleMesh,
    q: &[f64],
    lambda1: f64,
    field: &ddg::CurvatureField,
    diameter: &DiameterEstimate,
    steiner_level: usize,
) -> Result<ProofcheckSection, CliError> {
    let graph = SteinerGraph::build(mesh, steiner_level)?;
    let [a, b] = diameter.attained_pair;
    let mut entries = Vec::new();
    for mu in PROOFCHECK_MUS {
        let path = proofcheck::weighted_path_on(&graph, q, mu, a, b)?;
        let inequality = proofcheck::path_inequality(&path, lambda1, field, mu)?;
        let path_eigenvalue = proofcheck::path_eigen_check(&path)?;
        let slack_at_diameter = inequality.slack_with_length(diameter.value);
        let ok = inequality.slack >= -PROOFCHECK_ALLOWANCE * inequality.rhs.abs()
            && slack_at_diameter >= -PROOFCHECK_ALLOWANCE * inequality.rhs.abs();
        entries.push(ProofcheckEntry {
            mu,
            endpoints: path.endpoints,
            nodes: path.node_count(),
            length: path.length,
            weighted_cost: path.weighted_cost,
            path_eigenvalue,
            dirichlet_exact: PI * PI / (path.length * path.length),
            inequality,
            slack_at_diameter,
            ok,
        });
    }
    Ok(ProofcheckSection {
        steiner_level,
        asserted: mesh.vertex_count() >= PROOFCHECK_ASSERT_VERTICES,
        ok: entries.iter().all(|e| e.ok),
        entries,
    })
}

/// Report as a JSON value with the `timing` key removed.
pub fn without_timing(report: &Report) -> serde_json::Value {
    let mut value = serde_json::to_value(report).expect("report serializes");
    if let Some(obj) = value.as_object_mut() {
        obj.remove("timing");
    }
    value
}
