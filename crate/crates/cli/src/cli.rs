use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use sbv_core::bounds::{self, DEFAULT_MU_GRID};
use sbv_core::geodesics::{DEFAULT_STEINER_LEVEL, MAX_STEINER_LEVEL};
use sbv_core::mesh::{self, SurfaceFamily, SurfaceSpec};
use sbv_core::spectrum::DEFAULT_RESTART_SEED;

use crate::config::{JacobiInput, OutputFormat, RunConfig, DEFAULT_EIGEN_TOL};
use crate::pipeline::{self, Report};
use crate::study::{self, SweepRow};
use crate::{CliError, EXIT_CHECK_FAILED, EXIT_ERROR, EXIT_OK};

#[derive(Debug, Parser)]
#[command(name = "sbv", version, about = "Discrete checks of first-eigenvalue bounds for -Δ+2κ on closed surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a test surface as OBJ (embedded) or the intrinsic format.
    Generate(GenerateArgs),
    /// Run the full pipeline on one surface and write a report.
    Verify(VerifyArgs),
    /// Run the pipeline over a family parameter and write one row per member.
    Sweep(SweepArgs),
    /// Run the pipeline over refinement levels and write error columns.
    Converge(ConvergeArgs),
    /// Evaluate the Jacobi operator relations from analytic CMC data.
    Jacobi(JacobiArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SurfaceKind {
    Sphere,
    Ellipsoid,
    Torus,
    FlatTorus,
    PerturbedSphere,
}

#[derive(Debug, Clone, Args)]
pub struct SurfaceArgs {
    #[arg(long, value_enum, default_value = "sphere")]
    pub surface: SurfaceKind,
    /// Ellipsoid x semi-axis, or flat-torus period along x.
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    /// Ellipsoid y semi-axis, or flat-torus period along y.
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// Ellipsoid z semi-axis.
    #[arg(long, default_value_t = 1.5)]
    pub c: f64,
    #[arg(long, default_value_t = 1.0)]
    pub major: f64,
    #[arg(long, default_value_t = 0.3)]
    pub minor: f64,
    #[arg(long, default_value_t = 0.2)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 3)]
    pub frequency: u32,
    /// Refinement level (icosphere subdivisions, or grid doublings for tori).
    #[arg(long, default_value_t = 3)]
    pub resolution: u32,
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
}

impl SurfaceArgs {
    pub fn spec(&self) -> SurfaceSpec {
        let family = match self.surface {
            SurfaceKind::Sphere => SurfaceFamily::UnitSphereIcosa,
            SurfaceKind::Ellipsoid => SurfaceFamily::Ellipsoid {
                a: self.a,
                b: self.b,
                c: self.c,
            },
            SurfaceKind::Torus => SurfaceFamily::TorusOfRevolution {
                major: self.major,
                minor: self.minor,
            },
            SurfaceKind::FlatTorus => SurfaceFamily::FlatTorus { a: self.a, b: self.b },
            SurfaceKind::PerturbedSphere => SurfaceFamily::PerturbedSphere {
                amplitude: self.amplitude,
                frequency: self.frequency,
            },
        };
        SurfaceSpec::new(family, self.resolution).with_scale(self.scale)
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Steiner refinement level of the distance graph (0 to 3).
    #[arg(long)]
    pub steiner_level: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_MU_GRID)]
    pub mu_grid: usize,
    #[arg(long, default_value_t = DEFAULT_EIGEN_TOL)]
    pub eigen_tol: f64,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Seed of the eigensolver's restart vector.
    #[arg(long, default_value_t = DEFAULT_RESTART_SEED)]
    pub seed: u64,
    /// Also replay the path inequality between the diameter endpoints.
    #[arg(long)]
    pub proofcheck: bool,
}

impl CommonArgs {
    fn config(&self, surface: SurfaceSpec, default_steiner: usize, default_format: OutputFormat) -> RunConfig {
        RunConfig {
            mu_grid: self.mu_grid,
            steiner_level: self.steiner_level.unwrap_or(default_steiner),
            eigen_tol: self.eigen_tol,
            output_path: self.out.clone(),
            format: self.format.unwrap_or(default_format),
            seed: self.seed,
            proofcheck: self.proofcheck,
            ..RunConfig::new(surface)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeshFormat {
    Obj,
    Intrinsic,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub surface: SurfaceArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Defaults to OBJ for embedded families and intrinsic otherwise.
    #[arg(long, value_enum)]
    pub mesh_format: Option<MeshFormat>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub surface: SurfaceArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Mean curvature H of a CMC immersion in the 3-sphere; enables the Jacobi checks.
    #[arg(long, requires = "jacobi_a2")]
    pub jacobi_h: Option<f64>,
    /// Squared norm |A|² of the second fundamental form.
    #[arg(long, requires = "jacobi_h")]
    pub jacobi_a2: Option<f64>,
    #[arg(long)]
    pub umbilical: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub surface: SurfaceArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Values of the family parameter: sphere scale, ellipsoid c, torus
    /// minor/major, flat-torus b, or perturbation amplitude.
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub surface: SurfaceArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 2)]
    pub from: u32,
    #[arg(long, default_value_t = 5)]
    pub to: u32,
}

#[derive(Debug, Args)]
pub struct JacobiArgs {
    #[arg(long)]
    pub lambda1: f64,
    #[arg(long)]
    pub h: f64,
    #[arg(long)]
    pub a2: f64,
    #[arg(long)]
    pub umbilical: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_json<T: serde::Serialize>(value: &T, path: Option<&Path>) -> Result<(), CliError> {
    let mut out = open_output(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn exit_for(ok: bool) -> i32 {
    if ok {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

/// Writes a verify report in the configured format.
pub fn write_report(report: &Report, config: &RunConfig) -> Result<(), CliError> {
    match config.format {
        OutputFormat::Json => write_json(report, config.output_path.as_deref()),
        OutputFormat::Csv => {
            let row = SweepRow::from_report(report, config.surface.scale);
            study::write_csv(&[row], open_output(config.output_path.as_deref())?)
        }
    }
}

/// Runs one parsed command and returns its exit code.
pub fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Generate(args) => {
            let spec = args.surface.spec();
            let m = mesh::generate(&spec)?;
            let format = args.mesh_format.unwrap_or(if spec.family.is_embedded() {
                MeshFormat::Obj
            } else {
                MeshFormat::Intrinsic
            });
            let bytes = match format {
                MeshFormat::Obj => mesh::save_obj(&m)?,
                MeshFormat::Intrinsic => mesh::save_intrinsic(&m),
            };
            let mut out = open_output(args.out.as_deref())?;
            out.write_all(&bytes)?;
            out.flush()?;
            Ok(EXIT_OK)
        }
        Command::Verify(args) => {
            let mut config = args
                .common
                .config(args.surface.spec(), DEFAULT_STEINER_LEVEL, OutputFormat::Json);
            config.jacobi = args.jacobi_h.zip(args.jacobi_a2).map(|(h_cmc, a_norm_sq)| JacobiInput {
                h_cmc,
                a_norm_sq,
                umbilical: args.umbilical,
            });
            let report = pipeline::run_verify(&config)?;
            for w in &report.warnings {
                log::warn!("{w}");
            }
            write_report(&report, &config)?;
            Ok(exit_for(report.ok))
        }
        Command::Sweep(args) => {
            let config = args
                .common
                .config(args.surface.spec(), DEFAULT_STEINER_LEVEL, OutputFormat::Csv);
            config.check()?;
            let rows = study::run_sweep(&config, &args.values);
            match config.format {
                OutputFormat::Csv => study::write_csv(&rows, open_output(config.output_path.as_deref())?)?,
                OutputFormat::Json => write_json(&rows, config.output_path.as_deref())?,
            }
            if rows.iter().any(|r| !r.error.is_empty()) {
                return Ok(EXIT_ERROR);
            }
            Ok(exit_for(rows.iter().all(SweepRow::ok)))
        }
        Command::Converge(args) => {
            if args.from > args.to {
                return Err(CliError::Config(format!("--from {} exceeds --to {}", args.from, args.to)));
            }
            let config = args
                .common
                .config(args.surface.spec(), MAX_STEINER_LEVEL, OutputFormat::Csv);
            let rows = study::run_converge(&config, args.from, args.to);
            match config.format {
                OutputFormat::Csv => study::write_csv(&rows, open_output(config.output_path.as_deref())?)?,
                OutputFormat::Json => write_json(&rows, config.output_path.as_deref())?,
            }
            if rows.iter().any(|r| !r.error.is_empty()) {
                return Ok(EXIT_ERROR);
            }
            Ok(exit_for(rows.iter().all(|r| r.eq1_ok && r.eq2_ok && r.remark1_ok)))
        }
        Command::Jacobi(args) => {
            let report = bounds::jacobi_report(args.lambda1, args.h, args.a2, args.umbilical)?;
            write_json(&report, args.out.as_deref())?;
            Ok(exit_for(report.simons_ok && report.alias_ok))
        }
    }
}
