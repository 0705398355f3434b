//! `rmt-entangle`: runs the named experiments and writes CSV bundles with a
//! manifest.

mod bundle;
mod config;
mod error;
mod experiments;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use bundle::Bundle;
use config::{Experiment, ExperimentConfig, Overrides, Settings};
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "rmt-entangle", version, about = "Entanglement statistics of random-unitary ensembles and chaotic maps")]
struct Cli {
    /// Experiment to run.
    #[arg(value_enum)]
    experiment: Experiment,
    /// JSON configuration file; unset fields take the experiment defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base RNG seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Number of sampled operators per series (overrides the config).
    #[arg(long)]
    samples: Option<usize>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to all cores.
    #[arg(long, env = "RMT_ENTANGLE_THREADS")]
    threads: Option<usize>,
    /// Exit with status 4 when any of the experiment's gates fails.
    #[arg(long)]
    check: bool,
    /// Bin count for element and eigenvector amplitude histograms.
    #[arg(long)]
    amplitude_bins: Option<usize>,
    /// Bin count for spacing histograms.
    #[arg(long)]
    spacing_bins: Option<usize>,
    /// Bin count for Q histograms.
    #[arg(long)]
    q_bins: Option<usize>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let start = Instant::now();
    let config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let overrides = Overrides {
        seed: cli.seed,
        samples: cli.samples,
        output_dir: cli.out.clone(),
        amplitude_bins: cli.amplitude_bins,
        spacing_bins: cli.spacing_bins,
        q_bins: cli.q_bins,
    };
    let settings = Settings::resolve(cli.experiment, &config, &overrides)?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Config("threads must be >= 1".into()));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let threads = pool.current_num_threads();

    let mut bundle = Bundle::create(&settings.output_dir)?;
    pool.install(|| experiments::run(&settings, &mut bundle))?;
    let failed = bundle.failed_checks();
    for c in &bundle.checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        eprintln!("[{tag}] {}: {:.6} ({})", c.name, c.value, c.gate);
    }
    let dir = bundle.finish(&settings, &config, threads, start.elapsed())?;
    eprintln!("wrote {}", dir.display());
    if cli.check && !failed.is_empty() {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rmt-entangle: {e}");
            e.exit_code()
        }
    }
}
