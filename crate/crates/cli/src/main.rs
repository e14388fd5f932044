//! `cpstat`: cumulants, densities, Monte Carlo ensembles and validation for
//! the pairwise-summation Casimir-Polder statistics.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use commands::{Run, Status};
use config::{
    field_names, overlay, FileConfig, GammaCurveArgs, MomentsArgs, PdfArgs, SampleArgs, Shared,
    ValidateArgs,
};
use output::{emit, Format, Metadata};

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_CONVERGENCE: u8 = 3;
pub const EXIT_BAD_INPUT: u8 = 4;

/// Marks an error caused by the user's input (exit code 4).
#[derive(Debug)]
pub struct BadInput(pub anyhow::Error);

impl std::fmt::Display for BadInput {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for BadInput {}

impl From<anyhow::Error> for BadInput {
    fn from(e: anyhow::Error) -> Self {
        BadInput(e)
    }
}

#[derive(Parser)]
#[command(
    name = "cpstat",
    version,
    about = "Casimir-Polder potential statistics above a random medium"
)]
struct Cli {
    /// TOML config file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    shared: Shared,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cumulants of s and the relative fluctuation.
    Moments(MomentsArgs),
    /// Exact density of s on a grid, with the asymptotic forms.
    Pdf(PdfArgs),
    /// Monte Carlo ensemble: summary, histogram and comparison with the density.
    Sample(SampleArgs),
    /// Empirical vs theoretical relative fluctuation over a list of chi.
    GammaCurve(GammaCurveArgs),
    /// Run the validation checks.
    Validate(ValidateArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Moments(_) => "moments",
            Command::Pdf(_) => "pdf",
            Command::Sample(_) => "sample",
            Command::GammaCurve(_) => "gamma-curve",
            Command::Validate(_) => "validate",
        }
    }
}

fn resolve_workers(shared: &mut Shared, file_workers: Option<usize>) -> anyhow::Result<usize> {
    let env = match std::env::var("CPSTAT_WORKERS") {
        Ok(v) => Some(v.parse::<usize>().map_err(|_| {
            BadInput(anyhow!(
                "CPSTAT_WORKERS must be a positive integer, got {v:?}"
            ))
        })?),
        Err(_) => None,
    };
    let workers = shared
        .workers
        .or(env)
        .or(file_workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err(BadInput(anyhow!("worker count must be positive")).into());
    }
    shared.workers = Some(workers);
    Ok(workers)
}

fn execute<A, F>(
    cli_shared: Shared,
    cli_args: A,
    file: &FileConfig,
    command: &str,
    body: F,
) -> anyhow::Result<Status>
where
    A: Serialize + DeserializeOwned + Default,
    F: FnOnce(&mut Shared, &mut A) -> anyhow::Result<Run>,
{
    file.check_unknown(&[&field_names::<Shared>(), &field_names::<A>()])?;
    let cli_workers = cli_shared.workers;
    let mut shared = overlay(&cli_shared, file)?;
    let file_workers = if cli_workers.is_none() {
        shared.workers
    } else {
        None
    };
    shared.workers = cli_workers;
    let mut args = overlay(&cli_args, file)?;
    let workers = resolve_workers(&mut shared, file_workers)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .ok();
    let format = Format::parse(shared.format.get_or_insert_with(|| "csv".into()))?;

    let run = body(&mut shared, &mut args)?;

    // The worker count never changes results; it is kept out of the data
    // files so they are byte-identical across machines.
    let out = shared.out.clone().map(PathBuf::from);
    shared.workers = None;
    shared.out = None;
    let meta = Metadata {
        command: command.into(),
        seed: run.seed,
        rng: commands::rng_identity(&run),
        config: commands::resolved_config(&shared, &args),
        workers,
    };
    emit(&run.tables, &meta, format, out.as_deref())?;
    Ok(run.status)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<BadInput>() {
            return EXIT_BAD_INPUT;
        }
        if let Some(e) = cause.downcast_ref::<cpstat::Error>() {
            return match e {
                cpstat::Error::Domain { .. }
                | cpstat::Error::InvalidGeometry(_)
                | cpstat::Error::EmptySample(_) => EXIT_BAD_INPUT,
                _ => EXIT_CONVERGENCE,
            };
        }
    }
    1
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    let name = cli.command.name();
    let file = match &cli.config {
        Some(path) => FileConfig::load(path, name)?,
        None => FileConfig::empty(),
    };
    match cli.command {
        Command::Moments(a) => execute(cli.shared, a, &file, name, commands::moments),
        Command::Pdf(a) => execute(cli.shared, a, &file, name, commands::pdf),
        Command::Sample(a) => execute(cli.shared, a, &file, name, commands::sample),
        Command::GammaCurve(a) => execute(cli.shared, a, &file, name, commands::gamma_curve),
        Command::Validate(a) => execute(cli.shared, a, &file, name, commands::validate),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_BAD_INPUT);
        }
    };
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::ValidationFailed) => {
            eprintln!("cpstat: validation failed");
            ExitCode::from(EXIT_VALIDATION)
        }
        Ok(Status::ConvergenceFailed) => {
            eprintln!("cpstat: some points did not converge (see the status column)");
            ExitCode::from(EXIT_CONVERGENCE)
        }
        Err(e) => {
            eprintln!("cpstat: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
