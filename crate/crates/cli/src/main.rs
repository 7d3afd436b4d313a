use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ecps::model::{RNG_ALGORITHM, SEED_DERIVATION};
use ecps_cli::experiments::resolved_seeds;
use ecps_cli::{apply_overrides, realizations, run, CliError, ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(name = "ecps", version, about = "Projection-superoperator master equations vs exact spin-band dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact dynamics against TCL solutions for each projector.
    Compare(RunArgs),
    /// Singular values of the Choi matrix of the generator difference.
    ChoiScan(RunArgs),
    /// Long-time states: exact, single-projector and extended projector.
    SteadyState(RunArgs),
    /// Check a config file and print the resolved settings.
    Validate(ConfigArgs),
    /// Print the coupling seeds a config resolves to.
    SeedReport(ConfigArgs),
}

#[derive(Args)]
struct ConfigArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    realizations: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: ConfigArgs,
    #[arg(long)]
    out: PathBuf,
}

fn load(args: &ConfigArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    apply_overrides(&mut cfg, args.seed, args.realizations)?;
    Ok(cfg)
}

fn run_kind(kind: ExperimentKind, args: &RunArgs) -> Result<(), CliError> {
    let cfg = load(&args.common)?;
    if cfg.experiment != kind {
        return Err(CliError::Config {
            path: "experiment".into(),
            message: format!("config describes `{}`, but `{kind}` was requested", cfg.experiment),
        });
    }
    for path in run(&cfg, &args.out)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Compare(a) => run_kind(ExperimentKind::Compare, a),
        Command::ChoiScan(a) => run_kind(ExperimentKind::ChoiScan, a),
        Command::SteadyState(a) => run_kind(ExperimentKind::SteadyState, a),
        Command::Validate(a) => {
            let cfg = load(a)?;
            print!("{}", toml::to_string(&cfg).map_err(|e| CliError::Config {
                path: "<document>".into(),
                message: e.to_string(),
            })?);
            Ok(())
        }
        Command::SeedReport(a) => {
            let cfg = load(a)?;
            println!("rng: {RNG_ALGORITHM}");
            println!("derivation: {SEED_DERIVATION}");
            println!("base_seed: {}", cfg.model.seed);
            for (k, s) in resolved_seeds(cfg.model.seed, realizations(&cfg)).iter().enumerate() {
                println!("realization {k}: {s}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
