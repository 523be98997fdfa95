//! `relmetric`: reproducible experiments on relative metrics.
//!
//! Exit codes: 0 success, 1 invalid input, 2 a campaign or suite found a
//! violation (the witness is in the output).

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use output::Format;

#[derive(Debug, Parser)]
#[command(name = "relmetric", version, about = "Experiments on relative metrics", allow_negative_numbers = true)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Sample count (meaning depends on the subcommand).
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Power-mean parameter p; comma-separated list for `quasiconvexity`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub p: Option<String>,
    /// Exponent q; comma-separated list for `quasiconvexity`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub q: Option<String>,
    /// Quasihyperbolic parameter α ∈ [0, 1).
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Weight M(x, y) as an expression in x and y.
    #[arg(long, global = true)]
    pub weight: Option<String>,
    /// JSON domain description for `hyperbolic`.
    #[arg(long, global = true)]
    pub domain: Option<PathBuf>,
    /// First point, comma-separated coordinates.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub x: Option<String>,
    /// Second point, comma-separated coordinates.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub y: Option<String>,
    /// Ball radius for `ball`.
    #[arg(long, global = true)]
    pub radius: Option<f64>,
    /// Dimension of sampled points.
    #[arg(long, global = true)]
    pub dim: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Metric verdict for ρ_{p,q} (or a custom weight) plus triangle fuzzing.
    MetricCheck,
    /// Quasiconvexity constants with their bounds.
    Quasiconvexity,
    /// Closed-form k_α against the length of the sampled geodesic.
    Geodesic,
    /// Traced metric sphere with convexity and corner reports.
    Ball,
    /// Cross-ratio metrics of a domain, or the property suites.
    Hyperbolic,
    /// Triangle-inequality campaign for a weight.
    Fuzz,
}

fn main() -> ExitCode {
    let cfg = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let artifact = match commands::run(&cfg) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let text = match output::render(&artifact, cfg.format) {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let written = match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            use std::io::Write;
            match std::io::stdout().lock().write_all(text.as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(format!("cannot write output: {e}")),
                _ => Ok(()),
            }
        }
    };
    if let Err(msg) = written {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    if artifact.violation {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}
