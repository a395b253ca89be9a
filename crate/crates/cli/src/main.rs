use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use varifold_cli::{run_experiment, validate, write_outputs, CliError, ExperimentConfig};

/// Runs one varifold experiment described by a TOML file.
#[derive(Debug, Parser)]
#[command(name = "varifold-exp", version)]
struct Args {
    /// Experiment configuration (a previous run's manifest.toml also works).
    config: PathBuf,
    /// Check the configuration and preconditions without running.
    #[arg(long)]
    validate_only: bool,
    /// Output directory; defaults to `output` from the config, then `out/<kind>`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

/// Thread count for the global pool, from `VARIFOLD_THREADS`.
fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("VARIFOLD_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("VARIFOLD_THREADS = '{value}' is not a count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn main_inner(args: Args) -> Result<(), CliError> {
    configure_threads()?;
    let (mut config, _) = ExperimentConfig::load(&args.config)?;
    config.manifest = None;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if args.validate_only {
        let diagnostics = validate(&config);
        for d in &diagnostics {
            println!("{d}");
        }
        return match diagnostics.iter().map(|d| d.severity).min_by_key(|s| *s as u8) {
            None => {
                println!("ok");
                Ok(())
            }
            Some(varifold_cli::Severity::Config) => Err(CliError::Config(format!("{} problem(s)", diagnostics.len()))),
            Some(varifold_cli::Severity::Precondition) => {
                Err(CliError::Precondition(format!("{} problem(s)", diagnostics.len())))
            }
        };
    }
    let outcome = run_experiment(&config)?;
    let dir = args
        .out
        .or_else(|| config.output.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out").join(config.kind.name()));
    write_outputs(&config, &outcome, &dir)?;
    for c in &outcome.checks {
        println!("{}", c.line());
    }
    for n in &outcome.notes {
        println!("note: {n}");
    }
    println!("wrote {}", dir.display());
    Ok(())
}

fn main() -> ExitCode {
    match main_inner(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("varifold-exp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
