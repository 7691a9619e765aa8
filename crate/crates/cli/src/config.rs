use std::path::PathBuf;

use sbv_core::bounds::{DEFAULT_MU_GRID, MIN_MU_GRID};
use sbv_core::geodesics::{DEFAULT_STEINER_LEVEL, MAX_STEINER_LEVEL};
use sbv_core::mesh::SurfaceSpec;
use sbv_core::spectrum::DEFAULT_RESTART_SEED;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_EIGEN_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Analytic CMC data for the Jacobi checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiInput {
    pub h_cmc: f64,
    pub a_norm_sq: f64,
    pub umbilical: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub surface: SurfaceSpec,
    pub mu_grid: usize,
    pub steiner_level: usize,
    pub eigen_tol: f64,
    pub max_iter: usize,
    #[serde(skip)]
    pub output_path: Option<PathBuf>,
    pub format: OutputFormat,
    pub seed: u64,
    pub proofcheck: bool,
    pub jacobi: Option<JacobiInput>,
}

impl RunConfig {
    pub fn new(surface: SurfaceSpec) -> Self {
        RunConfig {
            surface,
            mu_grid: DEFAULT_MU_GRID,
            steiner_level: DEFAULT_STEINER_LEVEL,
            eigen_tol: DEFAULT_EIGEN_TOL,
            max_iter: DEFAULT_MAX_ITER,
            output_path: None,
            format: OutputFormat::Json,
            seed: DEFAULT_RESTART_SEED,
            proofcheck: false,
            jacobi: None,
        }
    }

    pub fn check(&self) -> Result<(), CliError> {
        self.surface.check()?;
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.mu_grid < MIN_MU_GRID {
            return bad(format!("--mu-grid must be at least {MIN_MU_GRID}, got {}", self.mu_grid));
        }
        if self.steiner_level > MAX_STEINER_LEVEL {
            return bad(format!(
                "--steiner-level must be in [0, {MAX_STEINER_LEVEL}], got {}",
                self.steiner_level
            ));
        }
        if !(self.eigen_tol > 0.0 && self.eigen_tol < 1.0) {
            return bad(format!("--eigen-tol must be in (0, 1), got {}", self.eigen_tol));
        }
        if let Some(j) = self.jacobi {
            if !(j.a_norm_sq >= 0.0) {
                return bad(format!("--jacobi-a2 must be nonnegative, got {}", j.a_norm_sq));
            }
        }
        Ok(())
    }
}
