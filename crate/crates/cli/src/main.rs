#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod settings;

#[derive(Debug, Parser)]
#[command(name = "rmtk", version, about = "Random matrix estimators, verifiers, probes and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads for trial-level parallelism (outputs do not depend on it).
    #[arg(long, global = true, env = "RMTK_WORKERS")]
    workers: Option<usize>,

    /// Print errors to stderr as one JSON object.
    #[arg(long, global = true)]
    json_errors: bool,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    /// TOML config file.
    #[arg(long)]
    config: PathBuf,

    /// Output file (or directory for `universality`); defaults to a name next to the config.
    #[arg(long, short)]
    output: Option<PathBuf>,

    /// Override a config value: `section.key=value`, or a bare key owned by one section.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Replaces `experiment.base_seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw one matrix and write it as CSV.
    Sample(Common),
    /// Tail probabilities of the smallest singular value.
    Tail(Common),
    /// Eigenvalues of `A/√n` for each trial.
    Esd(Common),
    /// Distance of each trial's ESD to the circular law.
    CircularLaw(Common),
    /// ESD, log-determinant, distance-sum and extreme singular value comparisons of two ensembles.
    Universality(Common),
    /// One anti-concentration inequality verifier.
    AnticoncVerify(Common),
    /// Complex randomized least common denominator.
    Crlcd(Common),
    /// One of the sphere-decomposition invertibility probes.
    SphereProbe(Common),
    /// Negative second moment identity on sampled matrices.
    IdentityCheck(Common),
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(rmtk::Error),
}

impl From<rmtk::Error> for CliError {
    fn from(e: rmtk::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Core(e) if e.is_numerical() => "numerical",
            CliError::Core(_) => "input",
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

/// What a successful run found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    Flagged,
}

fn report_error(err: &CliError, json: bool) {
    if json {
        let obj = serde_json::json!({
            "error": err.kind(),
            "message": err.to_string(),
            "exit_code": err.exit_code(),
        });
        eprintln!("{obj}");
    } else {
        eprintln!("rmtk: {err}");
    }
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {w} workers: {e}")))?;
    }
    use commands::*;
    match &cli.command {
        Command::Sample(c) => sample(c),
        Command::Tail(c) => tail(c),
        Command::Esd(c) => esd(c),
        Command::CircularLaw(c) => circular_law(c),
        Command::Universality(c) => universality(c),
        Command::AnticoncVerify(c) => anticonc_verify(c),
        Command::Crlcd(c) => crlcd(c),
        Command::SphereProbe(c) => sphere_probe(c),
        Command::IdentityCheck(c) => identity_check(c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let json = cli.json_errors;
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Flagged) => ExitCode::from(1),
        Err(err) => {
            report_error(&err, json);
            ExitCode::from(err.exit_code())
        }
    }
}
