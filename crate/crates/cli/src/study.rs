//! Parameter sweeps and refinement studies, one CSV row per run.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use sbv_core::geodesics::MAX_STEINER_LEVEL;
use sbv_core::mesh::{self, SurfaceFamily, SurfaceSpec};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::pipeline;
use crate::CliError;

/// One CSV row. Reals are written with 17 significant digits.
pub trait CsvRecord {
    fn header() -> Vec<&'static str>;
    fn record(&self) -> Vec<String>;
}

pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_real(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

pub fn write_csv<R: CsvRecord, W: Write>(rows: &[R], out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(R::header())?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

/// Name of the parameter a sweep varies for this family.
pub fn sweep_parameter(family: &SurfaceFamily) -> &'static str {
    match family {
        SurfaceFamily::UnitSphereIcosa => "scale",
        SurfaceFamily::Ellipsoid { .. } => "c",
        SurfaceFamily::TorusOfRevolution { .. } => "minor_over_major",
        SurfaceFamily::FlatTorus { .. } => "b",
        SurfaceFamily::PerturbedSphere { .. } => "amplitude",
    }
}

/// The family member with the swept parameter set to `value`.
pub fn sweep_member(base: &SurfaceSpec, value: f64) -> SurfaceSpec {
    let mut spec = *base;
    match &mut spec.family {
        SurfaceFamily::UnitSphereIcosa => spec.scale = value,
        SurfaceFamily::Ellipsoid { c, .. } => *c = value,
        SurfaceFamily::TorusOfRevolution { major, minor } => *minor = value * *major,
        SurfaceFamily::FlatTorus { b, .. } => *b = value,
        SurfaceFamily::PerturbedSphere { amplitude, .. } => *amplitude = value,
    }
    spec
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub family: String,
    pub parameter: String,
    pub value: f64,
    pub resolution: u32,
    pub vertices: usize,
    pub euler_characteristic: i64,
    pub lambda1: f64,
    pub diameter: f64,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub rhs_half: f64,
    pub best_mu: f64,
    pub best_rhs: f64,
    pub area_bound: f64,
    pub margin_half: f64,
    pub margin_best: f64,
    pub margin_area: f64,
    pub eq1_ok: bool,
    pub eq2_ok: bool,
    pub remark1_ok: bool,
    pub error: String,
}

impl SweepRow {
    pub fn ok(&self) -> bool {
        self.error.is_empty() && self.eq1_ok && self.eq2_ok && self.remark1_ok
    }
}

impl CsvRecord for SweepRow {
    fn header() -> Vec<&'static str> {
        vec![
            "family",
            "parameter",
            "value",
            "resolution",
            "vertices",
            "euler_characteristic",
            "lambda1",
            "diameter",
            "kappa_min",
            "kappa_max",
            "rhs_half",
            "best_mu",
            "best_rhs",
            "area_bound",
            "margin_half",
            "margin_best",
            "margin_area",
            "eq1_ok",
            "eq2_ok",
            "remark1_ok",
            "error",
        ]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.family.clone(),
            self.parameter.clone(),
            real(self.value),
            self.resolution.to_string(),
            self.vertices.to_string(),
            self.euler_characteristic.to_string(),
            real(self.lambda1),
            real(self.diameter),
            real(self.kappa_min),
            real(self.kappa_max),
            real(self.rhs_half),
            real(self.best_mu),
            real(self.best_rhs),
            real(self.area_bound),
            real(self.margin_half),
            real(self.margin_best),
            real(self.margin_area),
            self.eq1_ok.to_string(),
            self.eq2_ok.to_string(),
            self.remark1_ok.to_string(),
            self.error.clone(),
        ]
    }
}

impl SweepRow {
    /// Row for a finished run; `value` is the swept parameter.
    pub fn from_report(r: &pipeline::Report, value: f64) -> Self {
        let b = &r.bounds;
        let family = &r.config.surface.family;
        SweepRow {
            family: family.name().to_string(),
            parameter: sweep_parameter(family).to_string(),
            value,
            resolution: r.config.surface.resolution,
            vertices: r.mesh.invariants.vertex_count,
            euler_characteristic: r.mesh.invariants.euler_characteristic,
            lambda1: r.spectrum.lambda1,
            diameter: r.diameter.value,
            kappa_min: r.ddg.kappa_min,
            kappa_max: r.ddg.kappa_max,
            rhs_half: b.rhs,
            best_mu: b.best_mu,
            best_rhs: b.best_rhs,
            area_bound: b.area_bound,
            margin_half: b.margin,
            margin_best: b.best_margin,
            margin_area: b.area_margin,
            eq1_ok: b.eq1_ok,
            eq2_ok: b.eq2_ok,
            remark1_ok: b.remark1_ok,
            error: String::new(),
        }
    }
}

fn sweep_row(config: &RunConfig, value: f64) -> SweepRow {
    let spec = sweep_member(&config.surface, value);
    let member = RunConfig {
        surface: spec,
        proofcheck: false,
        ..config.clone()
    };
    match pipeline::run_verify(&member) {
        Ok(r) => SweepRow::from_report(&r, value),
        Err(e) => SweepRow {
            family: spec.family.name().to_string(),
            parameter: sweep_parameter(&spec.family).to_string(),
            value,
            resolution: spec.resolution,
            error: e.to_string(),
            ..SweepRow::default()
        },
    }
}

/// One row per value; failures are recorded in the `error` column.
pub fn run_sweep(config: &RunConfig, values: &[f64]) -> Vec<SweepRow> {
    values.par_iter().map(|&v| sweep_row(config, v)).collect()
}

/// Closed-form λ₁, diameter and curvature where the smooth surface has them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Analytic {
    pub lambda1: f64,
    pub diameter: f64,
    pub kappa: f64,
}

pub fn analytic_values(spec: &SurfaceSpec) -> Option<Analytic> {
    let s = spec.scale;
    match spec.family {
        SurfaceFamily::UnitSphereIcosa => Some(Analytic {
            lambda1: 2.0 / (s * s),
            diameter: PI * s,
            kappa: 1.0 / (s * s),
        }),
        SurfaceFamily::FlatTorus { a, b } => Some(Analytic {
            lambda1: 0.0,
            diameter: 0.5 * a.hypot(b) * s,
            kappa: 0.0,
        }),
        _ => None,
    }
}

/// Steiner level used at `level` in a study starting at `first`: the graph
/// is refined along with the mesh, so its over-estimate of the diameter
/// shrinks at the same pace as the mesh error.
pub fn converge_steiner_level(level: u32, first: u32, cap: usize) -> usize {
    ((level - first) as usize).min(cap).min(MAX_STEINER_LEVEL)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergeRow {
    pub family: String,
    pub level: u32,
    pub steiner_level: usize,
    pub vertices: usize,
    pub lambda1: f64,
    pub lambda1_error: Option<f64>,
    pub diameter: f64,
    pub diameter_error: Option<f64>,
    pub kappa_error: Option<f64>,
    pub margin_half: f64,
    pub eq1_ok: bool,
    pub eq2_ok: bool,
    pub remark1_ok: bool,
    pub error: String,
}

impl CsvRecord for ConvergeRow {
    fn header() -> Vec<&'static str> {
        vec![
            "family",
            "level",
            "steiner_level",
            "vertices",
            "lambda1",
            "lambda1_error",
            "diameter",
            "diameter_error",
            "kappa_error",
            "margin_half",
            "eq1_ok",
            "eq2_ok",
            "remark1_ok",
            "error",
        ]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.family.clone(),
            self.level.to_string(),
            self.steiner_level.to_string(),
            self.vertices.to_string(),
            real(self.lambda1),
            opt_real(self.lambda1_error),
            real(self.diameter),
            opt_real(self.diameter_error),
            opt_real(self.kappa_error),
            real(self.margin_half),
            self.eq1_ok.to_string(),
            self.eq2_ok.to_string(),
            self.remark1_ok.to_string(),
            self.error.clone(),
        ]
    }
}

fn converge_row(config: &RunConfig, level: u32, first: u32) -> ConvergeRow {
    let steiner_level = converge_steiner_level(level, first, config.steiner_level);
    let spec = SurfaceSpec {
        resolution: level,
        ..config.surface
    };
    let mut row = ConvergeRow {
        family: spec.family.name().to_string(),
        level,
        steiner_level,
        ..ConvergeRow::default()
    };
    let member = RunConfig {
        surface: spec,
        steiner_level,
        proofcheck: false,
        ..config.clone()
    };
    let outcome = member
        .check()
        .and_then(|_| Ok(mesh::generate(&spec)?))
        .and_then(|m| pipeline::analyze(&m, &member))
        .map(|a| (a.report, a.kappa));
    match outcome {
        Ok((r, kappa)) => {
            let exact = analytic_values(&spec);
            row.vertices = r.mesh.invariants.vertex_count;
            row.lambda1 = r.spectrum.lambda1;
            row.diameter = r.diameter.value;
            row.lambda1_error = exact.map(|e| (r.spectrum.lambda1 - e.lambda1).abs());
            row.diameter_error = exact.map(|e| (r.diameter.value - e.diameter).abs());
            row.kappa_error = exact.map(|e| kappa.iter().map(|k| (k - e.kappa).abs()).fold(0.0, f64::max));
            row.margin_half = r.bounds.margin;
            row.eq1_ok = r.bounds.eq1_ok;
            row.eq2_ok = r.bounds.eq2_ok;
            row.remark1_ok = r.bounds.remark1_ok;
        }
        Err(e) => row.error = e.to_string(),
    }
    row
}

/// One row per refinement level in `first..=last`; failures are recorded.
pub fn run_converge(config: &RunConfig, first: u32, last: u32) -> Vec<ConvergeRow> {
    (first..=last)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&level| converge_row(config, level, first))
        .collect()
}

/// True when every present error column decreases strictly along the rows.
pub fn errors_decrease(rows: &[ConvergeRow], pick: impl Fn(&ConvergeRow) -> Option<f64>) -> bool {
    let values: Vec<f64> = rows.iter().filter_map(&pick).collect();
    values.len() == rows.len() && values.windows(2).all(|w| w[1] < w[0])
}
