use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nlhelm_cli::error::exit;
use nlhelm_cli::manifest::RunManifest;
use nlhelm_cli::{run, CliError, CliResult, RunConfig};

/// Nonlinear Helmholtz eigenfunctions: admissibility checks, linear
/// scattering, the nonlinear solve, far-field extraction, the boundary flow
/// and contraction probes.
#[derive(Debug, Parser)]
#[command(name = "nlhelm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `outputs.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run on a single worker.
    #[arg(long)]
    serial: bool,
    /// `key.path=value` applied to the configuration before validation; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate the configuration and the admissibility of the nonlinearity.
    Check(Common),
    /// Linear eigenfunction, its outgoing data and the scattering phases.
    Linear(Common),
    /// Nonlinear fixed-point solve and far-field extraction.
    Solve(Common),
    /// Far-field extraction from a stored field.
    Farfield {
        #[command(flatten)]
        common: Common,
        /// Field file; `farfield.input` or `<out>/u.hfld` when absent.
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// Rescaled Hamilton flow from random starts and the weight monotonicity report.
    Flow(Common),
    /// Contraction ratio against the size of the data.
    Probe(Common),
}

fn threads(serial: bool) -> CliResult<usize> {
    if serial {
        return Ok(1);
    }
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var("HELMHOLTZ_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n.min(available)),
            _ => Err(CliError::Usage(format!(
                "HELMHOLTZ_THREADS must be a positive integer, got '{v}'"
            ))),
        },
        Err(_) => Ok(available),
    }
}

fn load(common: &Common) -> CliResult<RunConfig> {
    let mut overrides = common.overrides.clone();
    if let Some(out) = &common.out {
        overrides.push(format!(
            "outputs.directory={}",
            serde_json::Value::String(out.display().to_string())
        ));
    }
    RunConfig::load(&common.config, &overrides)
}

fn report(manifest: &RunManifest) {
    println!(
        "{}: wrote {} files to {}",
        manifest.command,
        manifest.files.len(),
        manifest.config.outputs.directory.display()
    );
    if !manifest.summary.is_null() {
        println!(
            "{}",
            serde_json::to_string_pretty(&manifest.summary).unwrap_or_default()
        );
    }
}

fn execute(cli: Cli) -> CliResult<()> {
    let common = match &cli.command {
        Command::Check(c)
        | Command::Linear(c)
        | Command::Solve(c)
        | Command::Flow(c)
        | Command::Probe(c) => c,
        Command::Farfield { common, .. } => common,
    };
    let workers = threads(common.serial)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot start the worker pool: {e}")))?;
    let cfg = load(common)?;
    let serial = common.serial;
    match cli.command {
        Command::Check(_) => {
            let rep = run::check(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&rep)?);
        }
        Command::Linear(_) => report(&run::linear(&cfg, serial)?),
        Command::Solve(_) => report(&run::solve(&cfg, serial)?),
        Command::Farfield { field, .. } => report(&run::farfield(&cfg, field, serial)?),
        Command::Flow(_) => report(&run::flow(&cfg, serial)?),
        Command::Probe(_) => report(&run::probe(&cfg, serial)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::from(exit::SUCCESS),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
