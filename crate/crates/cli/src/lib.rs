//! Batch front-end for linear involution experiments.
//!
//! Every subcommand resolves its parameters from flags, then the config file, then defaults,
//! and emits one JSON report that embeds the resolved configuration, its SHA-256 and the versions.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

pub use config::ExperimentConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{message}")]
    Compute { kind: String, message: String },
    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
}

impl CliError {
    pub fn compute(kind: &str, e: impl std::fmt::Display) -> Self {
        CliError::Compute { kind: kind.to_string(), message: e.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }

    fn kind(&self) -> &str {
        match self {
            CliError::Config(_) => "config",
            CliError::Compute { kind, .. } => kind,
            CliError::Output { .. } => "output",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "error": { "kind": self.kind(), "message": self.to_string() } })
    }
}

#[derive(Debug, Parser)]
#[command(name = "weakmix", version, about = "Linear involutions: induction, suspensions, Lyapunov exponents and weak-mixing scans")]
pub struct Cli {
    /// JSON experiment configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// generalized permutation: "top / bottom" rows, JSON, or a file holding either
    #[arg(long, global = true)]
    pub perm: Option<String>,
    /// lengths: values in alphabet order, a JSON map, or a file holding either
    #[arg(long, global = true)]
    pub lambda: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// worker threads (default: all cores)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// write the JSON report here instead of standard output
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Precision {
    F32,
    F64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Letter classes, reducibility and admissibility of a permutation
    Validate,
    /// Enumerate the Rauzy class
    Classes {
        #[arg(long)]
        cap: Option<usize>,
        /// Graphviz output
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Run Rauzy-Veech induction and report the path matrix
    Induct {
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        zorich: bool,
        #[arg(long)]
        bits: Option<u64>,
    },
    /// Suspension data, heights and the polygon
    Suspend {
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Singularity pattern and stratum
    Stratum,
    /// Orientation double cover of a quadratic stratum
    Cover {
        /// comma separated quadratic orders, e.g. "2,2"
        #[arg(long, allow_hyphen_values = true)]
        orders: Option<String>,
    },
    /// Lyapunov spectrum of the Zorich cocycle
    Lyapunov {
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        batches: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        warmup: Option<usize>,
        #[arg(long)]
        orthonormalize_every: Option<usize>,
        #[arg(long, value_enum)]
        precision: Option<Precision>,
        /// per-batch exponents
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Closed path with positive matrix and its Hilbert-metric contraction
    Cycle {
        #[arg(long)]
        attempts: Option<usize>,
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long)]
        pairs: Option<usize>,
    },
    /// Obstruction series of one vector on the torus R^d / Z^d
    Veech {
        #[arg(long)]
        t: Option<String>,
        /// comma separated coordinates in alphabet order
        #[arg(long, allow_hyphen_values = true)]
        v: Option<String>,
        #[arg(long)]
        steps: Option<usize>,
        /// rational or float
        #[arg(long)]
        backend: Option<String>,
        #[arg(long)]
        bits: Option<u32>,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Cesaro averages of correlations along an orbit
    Correlate {
        /// observable: JSON, "constant", "component:C", or "C:lo-hi,..." fractions of the length
        #[arg(long)]
        f: Option<String>,
        #[arg(long)]
        g: Option<String>,
        #[arg(long)]
        max_lag: Option<usize>,
        #[arg(long)]
        orbit_len: Option<usize>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Eigenvalue candidate scan over sampled lengths
    Scan {
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        tgrid: Option<String>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        radius: Option<f64>,
        /// one row per (sample, t)
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Classes { .. } => "classes",
            Command::Induct { .. } => "induct",
            Command::Suspend { .. } => "suspend",
            Command::Stratum => "stratum",
            Command::Cover { .. } => "cover",
            Command::Lyapunov { .. } => "lyapunov",
            Command::Cycle { .. } => "cycle",
            Command::Veech { .. } => "veech",
            Command::Correlate { .. } => "correlate",
            Command::Scan { .. } => "scan",
        }
    }
}

/// The envelope shared by every report.
#[derive(Debug, Serialize)]
pub struct Report<C: Serialize, R: Serialize> {
    pub command: &'static str,
    pub versions: Versions,
    pub config_hash: String,
    pub config: C,
    pub result: R,
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub weakmix: &'static str,
    pub linvol: &'static str,
}

pub const VERSIONS: Versions = Versions { weakmix: VERSION, linvol: linvol::VERSION };

/// Parses `args` (including the program name), runs the subcommand and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{}", e.to_json());
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let jobs = cli.jobs.or(config.jobs);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(CliError::Config("--jobs must be positive".into()));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| CliError::compute("threads", e))?;
    let report = pool.install(|| commands::dispatch(cli, &config))?;
    let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::compute("serialize", e))? + "\n";
    let target = cli.out.clone().or_else(|| config.outputs.as_ref().and_then(|o| o.json.clone()));
    match target {
        Some(path) => commands::write_file(&path, &text),
        None => out.write_all(text.as_bytes()).map_err(|e| CliError::Output { path: "stdout".into(), message: e.to_string() }),
    }
}
