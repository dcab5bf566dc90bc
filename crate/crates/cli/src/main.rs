use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spm_cli::{run_experiment, Experiment, RunConfig};

#[derive(Parser)]
#[command(name = "spm", version, about = "Stochastic particle method experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long = "output-dir")]
        output_dir: Option<PathBuf>,
        /// Extra `key=value` override; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Print the experiment names with a one-line description.
    ListExperiments,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::ListExperiments => {
            for e in Experiment::ALL {
                println!("{:<24} {}", e.name(), e.describe());
            }
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            seed,
            workers,
            output_dir,
            set,
        } => {
            let mut overrides = Vec::new();
            for kv in &set {
                match kv.split_once('=') {
                    Some((k, v)) => overrides.push((k.trim().to_string(), v.trim().to_string())),
                    None => {
                        eprintln!("error: --set expects KEY=VALUE, got `{kv}`");
                        return ExitCode::from(2);
                    }
                }
            }
            if let Some(s) = seed {
                overrides.push(("seed".into(), s.to_string()));
            }
            if let Some(w) = workers {
                overrides.push(("workers".into(), w.to_string()));
            }
            if let Some(d) = output_dir {
                overrides.push(("output_dir".into(), d.display().to_string()));
            }
            let cfg = match RunConfig::from_file(&config, &overrides) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: config: {e}");
                    return ExitCode::from(2);
                }
            };
            match run_experiment(&cfg) {
                Ok(report) => {
                    for (name, _) in &report.files {
                        println!("{}", report.dir.join(name).display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    // solver errors already carry "step k: ..."
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}
