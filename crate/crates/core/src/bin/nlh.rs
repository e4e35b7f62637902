use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nlh::config::{parse_config_for, parse_config_str_for, Mode};
use nlh::harness::{run, RunOptions};
use nlh::Error;

/// Focusing Hartree simulator: ground states, threshold classification,
/// time evolution and invariant suites.
#[derive(Parser)]
#[command(name = "nlh", version)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for independent runs.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Seed for randomized suites (overrides `seed` in the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Verb {
    /// Solve for the ground state.
    Groundstate,
    /// Classify initial data against the threshold.
    Classify,
    /// Evolve initial data.
    Evolve,
    /// Ground state, classification, evolution and comparison.
    Pipeline,
    /// Run the invariant suites.
    Validate,
    /// Split a run's trajectory into two-column series (needs --out).
    PlotData,
}

fn mode_of(v: Verb) -> Option<Mode> {
    match v {
        Verb::Groundstate => Some(Mode::Groundstate),
        Verb::Classify => Some(Mode::Classify),
        Verb::Evolve => Some(Mode::Evolve),
        Verb::Pipeline => Some(Mode::Pipeline),
        Verb::Validate => Some(Mode::Validate),
        Verb::PlotData => None,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let Some(mode) = mode_of(cli.verb) else {
        let Some(dir) = cli.out.as_ref() else {
            eprintln!("plot-data needs --out <run dir>");
            return ExitCode::from(2);
        };
        return match nlh::io::emit_plot_data(dir) {
            Ok(files) => {
                for f in files {
                    println!("{}", f.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        };
    };
    let cfg = match &cli.config {
        Some(p) => parse_config_for(p, Some(mode)),
        None => parse_config_str_for("", Some(mode)),
    };
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    let opts = RunOptions { out: cli.out, threads: cli.threads, seed: cli.seed };
    match run(&cfg, &opts) {
        Ok(outcome) => {
            for line in outcome.summary() {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
