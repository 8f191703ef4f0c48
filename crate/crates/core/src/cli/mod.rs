//! File formats and command implementations behind the `mdlb` binary.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 failed
//! verification, 3 numeric divergence during training. Every command
//! writes its artifacts atomically into `--out` together with a
//! `manifest.toml`.

mod commands;
mod config;
mod manifest;
pub mod svg;

pub use commands::{cmd_bound_report, cmd_covering_sim, cmd_train, cmd_verify, BoundOptions, TrainOverrides};
pub use config::{load, CoveringConfig, RunConfig};
pub use manifest::{content_hash, write_atomic, RunManifest, MANIFEST_FILE};

use crate::oracle::Suite;
use crate::train::Objective;
use crate::Error;
use clap::{Args, CommandFactory, Parser, Subcommand};
use std::ffi::OsString;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY_FAILED: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "mdlb", version, about = "MDL generalization bounds: verification, training and bound reports")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run numerical verification suites.
    Verify {
        #[arg(long, default_value = "all", value_parser = parse_suite)]
        suite: Suite,
        #[command(flatten)]
        common: Common,
    },
    /// Train VIB / CDVIB models from a config file.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        beta: Option<f64>,
        #[arg(long, value_parser = parse_objective)]
        objective: Option<Objective>,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate every bound on a trained checkpoint.
    BoundReport {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Training set as CSV (`x0,..,x{d-1},label`); regenerated from the checkpoint if omitted.
        #[arg(long, requires = "ghost_data")]
        train_data: Option<PathBuf>,
        #[arg(long, requires = "train_data")]
        ghost_data: Option<PathBuf>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        #[arg(long)]
        lambda: Option<f64>,
        /// Latent draws per sample for the empirical gap.
        #[arg(long, default_value_t = 32)]
        samples: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Coverage-versus-rate simulation of the covering argument.
    CoveringSim {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "mdlb-out")]
    pub out: PathBuf,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_objective(s: &str) -> Result<Objective, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Usage line of the subcommand named in `args`, or of the whole tool.
fn usage_for(args: &[OsString]) -> String {
    let mut cmd = Cli::command();
    let name = args.iter().skip(1).find_map(|a| {
        let a = a.to_string_lossy();
        cmd.get_subcommands().find(|s| s.get_name() == a).map(|s| s.get_name().to_string())
    });
    match name.and_then(|n| cmd.find_subcommand_mut(&n).map(|s| s.render_usage().to_string())) {
        Some(u) => u.replacen("Usage: ", "Usage: mdlb ", 1),
        None => cmd.render_usage().to_string(),
    }
}

/// Exit code for an error escaping a command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Divergence(_) => EXIT_DIVERGED,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return EXIT_OK;
            }
            if !e.to_string().contains("Usage:") {
                eprintln!("\n{}", usage_for(&args));
            }
            return EXIT_USAGE;
        }
    };
    let result = match cli.command {
        Command::Verify { suite, common } => cmd_verify(suite, common.seed.unwrap_or(0), &common.out),
        Command::Train { config, beta, objective, common } => {
            cmd_train(&config, &TrainOverrides { seed: common.seed, beta, objective }, &common.out)
        }
        Command::BoundReport { checkpoint, train_data, ghost_data, delta, epsilon, lambda, samples, common } => {
            let opts = BoundOptions {
                train_data,
                ghost_data,
                seed: common.seed.unwrap_or(0),
                delta,
                epsilon,
                lambda,
                samples,
            };
            cmd_bound_report(&checkpoint, &opts, &common.out)
        }
        Command::CoveringSim { config, common } => {
            cmd_covering_sim(config.as_deref(), common.seed.unwrap_or(0), &common.out)
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
