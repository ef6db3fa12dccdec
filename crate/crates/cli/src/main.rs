//! `heavyeig` — batch front end for eigenvector overlap process
//! experiments: Monte Carlo estimation, fixed-point limit covariances,
//! and Stieltjes inversion, driven by a JSON configuration file.
//!
//! Exit codes: 0 success, 2 configuration/schema violation, 3 numeric
//! or solver failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

#[derive(Parser)]
#[command(
    name = "heavyeig",
    version,
    about = "Experiments on eigenvector overlap processes of heavy-tailed random matrices"
)]
struct Cli {
    /// Path to the JSON experiment configuration
    #[arg(long)]
    config: PathBuf,

    /// Upper bound on parallel workers (the HEAVYEIG_WORKERS
    /// environment variable overrides this flag)
    #[arg(long, default_value_t = 1)]
    workers: usize,

    /// Output directory (overrides "out_dir" in the config)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Progress logging to stderr
    #[arg(long)]
    verbose: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let workers = std::env::var("HEAVYEIG_WORKERS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(cli.workers)
        .max(1);
    let cfg = match config::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}", e.message());
            return ExitCode::from(e.exit_code());
        }
    };
    let opts = commands::RunOptions {
        workers,
        out: cli.out,
        verbose: cli.verbose,
    };
    match commands::run(&cfg, &opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
