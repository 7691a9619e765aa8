//! Command-line front end for the eigenvalue-bound checks in `sbv_core`.

pub mod cli;
pub mod config;
pub mod pipeline;
pub mod study;

use thiserror::Error;

/// Exit code when every enabled check passed.
pub const EXIT_OK: i32 = 0;
/// Exit code for an operational error (bad input, I/O, solver failure).
pub const EXIT_ERROR: i32 = 1;
/// Exit code when a bound or audit check failed.
pub const EXIT_CHECK_FAILED: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("mesh: {0}")]
    Mesh(#[from] sbv_core::mesh::MeshError),
    #[error("ddg: {0}")]
    Ddg(#[from] sbv_core::ddg::DdgError),
    #[error("spectrum: {0}")]
    Spectrum(#[from] sbv_core::spectrum::SpectrumError),
    #[error("geodesics: {0}")]
    Geodesics(#[from] sbv_core::geodesics::GeodesicError),
    #[error("bounds: {0}")]
    Bounds(#[from] sbv_core::bounds::BoundsError),
    #[error("proofcheck: {0}")]
    Proofcheck(#[from] sbv_core::proofcheck::ProofcheckError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
