//! Command-line driver for capacity-game experiments.
//!
//! Reads an optional JSON config, applies flag overrides, runs the
//! experiment, and writes CSVs plus a summary. Exit codes: 0 on success,
//! 1 on a config or runtime error, 2 when a verify suite finds violations.

mod config;
mod experiment;

use clap::Parser;
use config::{Algorithm, ExperimentConfig, ExperimentKind, SchemeToken};
use experiment::{run_experiment, RunError};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "capgame", version, about = "Capacity-game experiment runner")]
struct Cli {
    /// JSON config file; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Experiment kind.
    #[arg(long, value_enum)]
    kind: Option<ExperimentKind>,
    /// Links per generated instance.
    #[arg(long)]
    n: Option<usize>,
    /// Length cap for generated links.
    #[arg(long)]
    dmax: Option<f64>,
    /// Path-loss exponent.
    #[arg(long)]
    alpha: Option<f64>,
    /// SINR success threshold.
    #[arg(long)]
    beta: Option<f64>,
    /// Ambient noise power.
    #[arg(long)]
    noise: Option<f64>,
    /// Restrict to a single power scheme.
    #[arg(long, value_enum)]
    scheme: Option<SchemeToken>,
    /// Restrict to a single algorithm.
    #[arg(long, value_enum)]
    algo: Option<Algorithm>,
    /// Rounds per game run.
    #[arg(long)]
    rounds: Option<usize>,
    /// Independent repetitions per setting.
    #[arg(long)]
    replicates: Option<usize>,
    /// Root seed; everything else derives from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Saved instance to load instead of generating one (convergence only).
    #[arg(long)]
    instance: Option<PathBuf>,
}

fn build_config(cli: Cli) -> Result<ExperimentConfig, String> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            serde_json::from_str(&text)
                .map_err(|e| format!("bad config {}: {e}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(kind) = cli.kind {
        config.kind = kind;
    }
    if let Some(n) = cli.n {
        config.n = n;
    }
    if let Some(d) = cli.dmax {
        config.d_max = d;
    }
    if let Some(a) = cli.alpha {
        config.params.alpha = a;
    }
    if let Some(b) = cli.beta {
        config.params.beta = b;
    }
    if let Some(nz) = cli.noise {
        config.params.noise = nz;
    }
    if let Some(s) = cli.scheme {
        config.schemes = vec![s];
    }
    if let Some(a) = cli.algo {
        config.algorithms = vec![a];
    }
    if let Some(r) = cli.rounds {
        config.rounds = r;
    }
    if let Some(r) = cli.replicates {
        config.replicates = r;
    }
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    if let Some(o) = cli.out {
        config.out = o;
    }
    if let Some(i) = cli.instance {
        config.instance = Some(i);
    }
    Ok(config)
}

fn main() -> ExitCode {
    // Usage errors are config errors (exit 1); code 2 is reserved for a
    // verify suite that found violations.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let config = match build_config(cli) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = config.validate() {
        eprintln!("{e}");
        return ExitCode::from(1);
    }
    match run_experiment(&config) {
        Ok(outcome) => {
            for row in &outcome.summary {
                println!(
                    "{} {} {}: mean {:.6} std {:.6} over {} runs",
                    row.algorithm, row.scheme, row.metric, row.mean, row.std, row.runs
                );
            }
            for file in &outcome.files {
                println!("wrote {}", file.display());
            }
            if outcome.verify_failures > 0 {
                eprintln!("{} check(s) failed; see verify.csv", outcome.verify_failures);
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(RunError::Config(e)) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}
