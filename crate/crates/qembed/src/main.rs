use clap::{Parser, Subcommand};
use qembed::config::{ExperimentConfig, Mode, OutputFormat, Overrides};
use qembed::error::QembedError;
use std::path::PathBuf;
use std::process::ExitCode;

/// Embedded-ensemble spectral statistics: q tables, spectral densities,
/// LDOS and survival-probability decay for FEGOE/FEGUE/BEGOE/BEGUE systems.
#[derive(Parser)]
#[command(name = "qembed", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Base RNG seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Ensemble member count override.
    #[arg(long, global = true)]
    members: Option<usize>,

    /// Output directory override.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format override: csv or json.
    #[arg(long, global = true)]
    format: Option<String>,

    /// Worker thread count override; 0 uses all cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the q parameter table over kinds, (N, m) pairs and k = 1..m.
    Qtable,
    /// Ensemble-averaged spectral density histogram plus theory curve.
    Density,
    /// Ensemble-averaged local density of states plus theory curve.
    Ldos,
    /// Monte-Carlo survival probability plus theory transform.
    Survival,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mode = match cli.command {
        Command::Qtable => Mode::Qtable,
        Command::Density => Mode::Density,
        Command::Ldos => Mode::Ldos,
        Command::Survival => Mode::Survival,
    };

    let result = (|| -> qembed::error::Result<()> {
        let mut cfg = match &cli.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let format = match &cli.format {
            Some(f) => Some(f.parse::<OutputFormat>()?),
            None => None,
        };
        cfg.apply(&Overrides {
            seed: cli.seed,
            members: cli.members,
            out: cli.out.clone(),
            format,
            workers: cli.workers,
        });
        let manifest = qembed::cli::run(mode, &cfg)?;
        eprintln!(
            "{mode}: wrote {} file(s) to {} in {:.2}s",
            manifest.files.len() + 1,
            cfg.out_dir.display(),
            manifest.wall_time_sec
        );
        Ok(())
    })();

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                QembedError::Numerical(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
