//! `ks-lab`: batch driver for the Keller–Segel spectral lab.
//!
//! Exit codes: 0 success, 1 scientific failure, 2 usage or configuration
//! error.

mod commands;
mod config;
mod initial;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ExperimentConfig;
use output::OutDir;

#[derive(Parser, Debug)]
#[command(
    name = "ks-lab",
    version,
    about = "Mild solutions and a-priori bounds for the 2D Keller–Segel system"
)]
struct Cli {
    /// TOML experiment configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// `section.key=value`, applied after the file (repeatable)
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (overrides `output.dir`)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Picard solve with norm traces and the a-priori bound verdict
    Solve,
    /// Inequality suite, constants and counterexample sweep
    Verify,
    /// Picard iterate against the time-stepping reference
    Compare,
    /// Counterexample constant and sweep
    Counterexample,
    /// Empirical constants c1, c2, c3
    Constants,
    /// Recompute norm reports from dumped trajectories
    Norms,
}

const USAGE: u8 = 2;

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("KS_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("KS_THREADS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(USAGE);
    }

    let cfg = match &cli.config {
        Some(p) => match ExperimentConfig::load(p, &cli.overrides) {
            Ok(c) => Some(c),
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::from(USAGE);
            }
        },
        None if !cli.overrides.is_empty() => {
            eprintln!("error: --override needs --config");
            return ExitCode::from(USAGE);
        }
        None => None,
    };
    let needs_config = matches!(cli.command, Command::Solve | Command::Compare);
    let Some(dir) = cli
        .out
        .clone()
        .or_else(|| cfg.as_ref().map(|c| c.output.dir.clone()))
    else {
        eprintln!("error: give --out or a config with output.dir");
        return ExitCode::from(USAGE);
    };
    if needs_config && cfg.is_none() {
        eprintln!("error: {:?} needs --config", cli.command);
        return ExitCode::from(USAGE);
    }
    let out = match OutDir::create(&dir) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(USAGE);
        }
    };

    let result = match cli.command {
        Command::Solve => commands::solve(cfg.as_ref().expect("checked"), &out),
        Command::Compare => commands::compare(cfg.as_ref().expect("checked"), &out),
        Command::Verify => commands::verify(cfg.as_ref(), &out),
        Command::Counterexample => commands::counterexample(&out),
        Command::Constants => commands::constants(cfg.as_ref(), &out),
        Command::Norms => commands::norms(&out),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
