//! Command-line front end used by the `nled` binary.
//!
//! Exit codes: 0 success, 1 a check failed or the input was rejected,
//! 2 runtime failure, 64 usage error.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{verify_exact, RESIDUAL_CSV_HEADER};
use crate::forms4d::Vec3;
use crate::lagrangian::LagrangianModel;
use crate::solver::write_snapshots_csv;
use crate::tof::{
    build_model, discrimination_sweep, duality_scan, invert_check, measure_tof, TofConfig, TofSummary,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "NLED_THREADS";

#[derive(Debug, Parser)]
#[command(name = "nled", version, about = "Nonlinear vacuum electrodynamics laboratory")]
pub struct Cli {
    /// Seed for every random draw (overrides `seed` in config files).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pulse time-of-flight through a magnetised background.
    Tof(RunArgs),
    /// Speed and shape comparison of several models over several backgrounds.
    Sweep(RunArgs),
    /// Grid-refinement residual test of the exact travelling wave.
    VerifyExact(VerifyArgs),
    /// Duality residual statistics over random field points.
    Duality(ScanArgs),
    /// Constitutive round-trip and Jacobian statistics over random field points.
    InvertCheck(ScanArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `output.csv`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Overrides `output.json`.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// maxwell, bi, duality or family.
    #[arg(long, default_value = "maxwell")]
    pub model: String,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Polynomial tail a₂, a₃, … of a `family` model.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub coeffs: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub c1: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub c2: f64,
}

impl ModelArgs {
    fn build(&self) -> Result<LagrangianModel> {
        build_model(&self.model, self.kappa, self.lambda, self.coeffs.clone(), self.c1, self.c2)
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub bx: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub by: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub bz: f64,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 10_000)]
    pub points: usize,
    /// Sampling radius for `|E|` and `|B|`.
    #[arg(long, default_value_t = 0.5)]
    pub bound: f64,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    configure_threads();
    match execute(&cli) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit status for an error: rejected input maps to 1, everything else to 2.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Invalid(_) | Error::BoundOutsideDomain { .. } => EXIT_CHECK_FAILED,
        _ => EXIT_RUNTIME,
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    println!("{text}");
    if let Some(p) = path {
        std::fs::write(p, text + "\n")?;
    }
    Ok(())
}

fn load_config(args: &RunArgs, seed: Option<u64>) -> Result<TofConfig> {
    let mut cfg = TofConfig::from_file(&args.config).map_err(|e| match e {
        Error::Io(io) => Error::Config(format!("{}: {io}", args.config.display())),
        other => other,
    })?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if args.csv.is_some() {
        cfg.csv = args.csv.clone();
    }
    if args.json.is_some() {
        cfg.json = args.json.clone();
    }
    Ok(cfg)
}

/// Runs a parsed command; `Ok(false)` means the run finished but its check failed.
pub fn execute(cli: &Cli) -> Result<bool> {
    let seed = cli.seed.unwrap_or(0);
    match &cli.command {
        Command::Tof(args) => {
            let cfg = load_config(args, cli.seed)?;
            let result = measure_tof(&cfg)?;
            if let Some(path) = &cfg.csv {
                write_snapshots_csv(std::io::BufWriter::new(std::fs::File::create(path)?), &result.snapshots)?;
            }
            let passed = result.within(cfg.tolerance);
            write_json(
                &TofSummary {
                    config: &cfg,
                    result: &result,
                    tolerance: cfg.tolerance,
                    passed,
                },
                cfg.json.as_deref(),
            )?;
            Ok(passed)
        }
        Command::Sweep(args) => {
            let cfg = load_config(args, cli.seed)?;
            if cfg.sweep_backgrounds.is_empty() && !cfg.sweep_models.is_empty() {
                return Err(Error::Config("sweep.backgrounds is empty".into()));
            }
            let report = discrimination_sweep(&cfg.sweep_models, &cfg.sweep_backgrounds, &cfg)?;
            if let Some(path) = &cfg.csv {
                std::fs::write(path, report.to_csv())?;
            }
            #[derive(Serialize)]
            struct Out<'a> {
                config: &'a TofConfig,
                report: &'a crate::tof::SweepReport,
                passed: bool,
            }
            let passed = report.passed();
            write_json(
                &Out {
                    config: &cfg,
                    report: &report,
                    passed,
                },
                cfg.json.as_deref(),
            )?;
            Ok(passed)
        }
        Command::VerifyExact(args) => {
            let model = args.model.build()?;
            let check = verify_exact(&model, &Vec3::new(args.bx, args.by, args.bz))?;
            if let Some(path) = &args.csv {
                let mut text = format!("{RESIDUAL_CSV_HEADER}\n");
                for row in check.csv_rows() {
                    text.push_str(&row);
                    text.push('\n');
                }
                std::fs::write(path, text)?;
            }
            write_json(&check, args.json.as_deref())?;
            if !check.converges {
                let ratio = check
                    .plateau_ratio
                    .map(|r| format!(", {r:.3e} times the Born-Infeld reference"))
                    .unwrap_or_default();
                eprintln!(
                    "residual plateau: {model} is not solved by the travelling wave on B0 = ({}, {}, {}); extrapolated residual {:.3e}{ratio}",
                    args.bx, args.by, args.bz, check.report.extrapolated
                );
            }
            Ok(check.converges)
        }
        Command::Duality(args) => {
            let scan = duality_scan(&args.model.build()?, args.points, args.bound, seed)?;
            write_json(&scan, args.json.as_deref())?;
            Ok(scan.passed())
        }
        Command::InvertCheck(args) => {
            let check = invert_check(&args.model.build()?, args.points, args.bound, seed)?;
            write_json(&check, args.json.as_deref())?;
            Ok(check.passed())
        }
    }
}
