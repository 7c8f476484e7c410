//! Command-line front end: `run` a config, `list` experiments, `check`
//! the fast invariant suite. Exit codes: 0 success, 2 configuration
//! error, 3 runtime abort.

use clap::{Parser, Subcommand};
use similab::cli::{list_experiments, run, run_check, ExperimentConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "similab", version, about = "stochastic self-similarity laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config file.
    Run {
        /// Path of the config file.
        config: PathBuf,
        /// Override the base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the ensemble size.
        #[arg(long)]
        paths: Option<usize>,
        /// Override the worker thread count.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List the registered experiments.
    List,
    /// Run the fast invariant suite.
    Check,
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn execute(cli: Cli) -> similab::Result<()> {
    match cli.command {
        Command::Run {
            config,
            seed,
            out,
            paths,
            threads,
        } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(dir) = out {
                cfg.out_dir = dir;
            }
            if let Some(n) = paths {
                cfg.paths = Some(n);
            }
            if let Some(n) = threads {
                cfg.threads = Some(n);
            }
            let bundle = run(&cfg)?;
            let dir = cfg.out_dir.join(&bundle.experiment);
            println!(
                "{}: {} series, {:.1} s, results in {}",
                bundle.experiment,
                bundle.series.len(),
                bundle.wall_seconds,
                dir.display()
            );
            for (key, value) in &bundle.summary {
                println!("  {key} = {value:.6e}");
            }
            Ok(())
        }
        Command::List => {
            println!("{}", list_experiments());
            Ok(())
        }
        Command::Check => {
            let report = run_check()?;
            print!("{report}");
            Ok(())
        }
    }
}
