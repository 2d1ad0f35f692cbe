//! Command-line driver: percolation experiments for Cox point processes on
//! random intensity measures.
//!
//! Each subcommand runs one experiment kind from a key-value config file;
//! command-line flags override the seed, worker count, and output directory.
//! Exit codes: 0 success, 2 config validation failure, 3 runtime failure.

mod config;
mod runner;
mod svg;

use clap::{Parser, Subcommand};

use config::{parse_config, ExperimentKind};

#[derive(Parser)]
#[command(
    name = "coxperc",
    version,
    about = "Monte Carlo percolation experiments for Cox point processes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Path to the run configuration file
    #[arg(long)]
    config: String,
    /// Override the master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the worker count (0 = all cores)
    #[arg(long)]
    workers: Option<usize>,
    /// Override the output directory
    #[arg(long)]
    out: Option<String>,
    /// Emit an SVG snapshot of one realization with Cox points overlaid
    #[arg(long)]
    snapshot: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Percolation-probability curve over an intensity grid at fixed radius
    Sweep(CommonArgs),
    /// Large-radius coupling against the Poisson reference
    #[command(name = "limit-large-r")]
    LimitLargeR(CommonArgs),
    /// Dense coupling on segment systems against the Bernoulli bond model
    #[command(name = "limit-singular")]
    LimitSingular(CommonArgs),
    /// Dense coupling for modulated Boolean measures against the size-biased
    /// local limit
    #[command(name = "limit-ac")]
    LimitAc(CommonArgs),
    /// Stabilization-radius and essential-connectedness diagnostics
    #[command(name = "diagnose-stab")]
    DiagnoseStab(CommonArgs),
    /// Estimate the raw mass intensity of a measure and cache it
    Calibrate(CommonArgs),
}

impl Command {
    fn parts(&self) -> (ExperimentKind, &CommonArgs) {
        match self {
            Command::Sweep(a) => (ExperimentKind::Sweep, a),
            Command::LimitLargeR(a) => (ExperimentKind::LimitLargeR, a),
            Command::LimitSingular(a) => (ExperimentKind::LimitSingular, a),
            Command::LimitAc(a) => (ExperimentKind::LimitAc, a),
            Command::DiagnoseStab(a) => (ExperimentKind::DiagnoseStab, a),
            Command::Calibrate(a) => (ExperimentKind::Calibrate, a),
        }
    }
}

fn main() {
    let cli = Cli::parse();
    let (kind, args) = cli.command.parts();

    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read config `{}`: {e}", args.config);
            std::process::exit(2);
        }
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(errors) => {
            eprintln!("config validation failed ({} errors):", errors.len());
            for e in &errors {
                eprintln!("  - {e}");
            }
            std::process::exit(2);
        }
    };
    if cfg.experiment != kind {
        eprintln!(
            "error: config declares experiment `{}` but the subcommand is `{}`",
            cfg.experiment.name(),
            kind.name()
        );
        std::process::exit(2);
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(workers) = args.workers {
        cfg.workers = workers;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }
    if args.snapshot {
        cfg.snapshot = true;
    }

    match runner::run(&cfg) {
        Ok(summary) => {
            println!(
                "wrote {} rows to {}",
                summary.rows_written,
                summary.out_dir.display()
            );
            if summary.k_flags > 0 {
                println!(
                    "warning: {} grid points differ between K and 2K beyond 3 combined se (see manifest)",
                    summary.k_flags
                );
            }
        }
        Err(e) => {
            eprintln!("runtime error: {e}");
            std::process::exit(3);
        }
    }
}
