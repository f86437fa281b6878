use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use geomflow_cli::{run_eoc, run_single, CliError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "geomflow", version, about = "Parametric finite elements for curvature flows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Only print errors.
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one configuration and write diagnostics and snapshots.
    Run {
        #[arg(long, short)]
        config: PathBuf,
        /// Overrides `output.dir`.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Convergence study over refinement levels.
    Eoc {
        #[arg(long, short)]
        config: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Parse a configuration and print it with all defaults filled in.
    Validate {
        #[arg(long, short)]
        config: PathBuf,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { config } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            print!("{}", cfg.echo());
        }
        Command::Run { config, output } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            let dir = output.unwrap_or_else(|| cfg.output_dir.clone());
            let s = run_single(&cfg, &dir)?;
            if let (Some(first), Some(last)) = (s.records.first(), s.records.last()) {
                log::info!(
                    "{} steps of {:e}: energy {:.10e} -> {:.10e}, enclosed loss {:.3e}",
                    last.step,
                    s.tau,
                    first.energy,
                    last.energy,
                    last.enclosed_rel_loss
                );
            }
            log::info!("wrote {} and {} snapshots", s.csv.display(), s.snapshots.len());
        }
        Command::Eoc { config, output } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            let dir = output.unwrap_or_else(|| cfg.output_dir.clone());
            std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            let table = run_eoc(&cfg);
            let path = dir.join("eoc.csv");
            std::fs::write(&path, table.csv()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            if !cli.quiet {
                print!("{}", table.format());
            }
            if let Some((_, e)) = table.failure {
                return Err(e);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
