use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dfrc::{emit, run, Experiment, ExperimentConfig};

/// Hybrid beamformer design and trade-off studies for mmWave
/// dual-function radar-communication transmitters.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (TOML, dotted keys). Defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run a single seed instead of the configured seed list.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for sweep cells.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Weight sweep of the radar/comm trade-off per architecture.
    Pareto,
    /// Spectral efficiency of fully digital, ADMM and two-stage designs.
    SeVsSnr,
    /// Space-frequency beampatterns and main-lobe statistics.
    Beampattern,
    /// Virtual-array DOA resolution and RMSE study.
    Doa,
    /// One design, written as a result directory.
    Design,
}

impl Command {
    fn experiment(self) -> Experiment {
        match self {
            Command::Pareto => Experiment::Pareto,
            Command::SeVsSnr => Experiment::SeVsSnr,
            Command::Beampattern => Experiment::Beampattern,
            Command::Doa => Experiment::Doa,
            Command::Design => Experiment::Design,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(dir) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> dfrc::Result<PathBuf> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.override_seed(seed);
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    if cli.jobs == 0 {
        return Err(dfrc::Error::Config("--jobs must be at least 1".into()));
    }
    let experiment = cli.command.experiment();
    let artifacts = run(experiment, &cfg, cli.jobs)?;
    emit(&cfg.output.dir, experiment, &cfg, &artifacts)?;
    Ok(cfg.output.dir.clone())
}
