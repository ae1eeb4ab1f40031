//! Command line front end.
//!
//! Every subcommand reads one JSON configuration describing a system and
//! writes its artifacts (CSV and JSON) into the output directory. Exit codes:
//! 0 success, 2 invalid configuration, 3 failed precondition, 4 failed
//! estimator diagnostics, 1 I/O trouble.

mod commands;
mod config;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use log::{error, info};
use sha2::{Digest, Sha256};

pub use commands::{Artifact, Outcome};
pub use config::*;

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_DIAGNOSTICS: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "fracdim", version, about = "Dimension estimates for fractal function graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// System configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for the output artifacts.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Worker thread cap.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Overrides the seed in the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Function values on a grid, as eval.csv.
    Eval,
    /// Theoretical dimension report, as dim.json.
    Dim,
    /// Box-counting estimate, as boxdim.json and boxdim.csv.
    Boxdim,
    /// n-Bernoulli convergence table, as nbern.csv.
    Nbern,
    /// Tent map entropy, Markov detection and dimensions, as tent.json.
    Tent,
    /// Graph point cloud, as sample.csv.
    Sample,
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) | Error::Budget { .. } => EXIT_CONFIG,
        Error::Precondition(_) => EXIT_PRECONDITION,
        Error::Diagnostics(_) => EXIT_DIAGNOSTICS,
    }
}

/// Runs one command against already-read configuration text.
pub fn execute(command: Command, text: &str, seed: Option<u64>) -> Result<Outcome, Error> {
    let mut config = parse_config(text)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    let system = config.system.build()?;
    let hash = hex::encode(Sha256::digest(text.as_bytes()));
    let ctx = commands::Context {
        config: &config,
        system: &system,
        hash: &hash,
    };
    match command {
        Command::Eval => commands::eval(&ctx),
        Command::Dim => commands::dim(&ctx),
        Command::Boxdim => commands::boxdim(&ctx),
        Command::Nbern => commands::nbern(&ctx),
        Command::Tent => commands::tent(&ctx),
        Command::Sample => commands::sample(&ctx),
    }
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("FRACDIM_LOG", "warn");
    let _ = env_logger::Builder::from_env(env).try_init();
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let Some(path) = &cli.config else {
        eprintln!("error: --config is required");
        return EXIT_CONFIG;
    };
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return EXIT_CONFIG;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return EXIT_IO;
        }
    };
    info!("running {:?} on {}", cli.command, path.display());
    let outcome = match pool.install(|| execute(cli.command, &text, cli.seed)) {
        Ok(o) => o,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    if let Err(e) = fs::create_dir_all(&cli.out) {
        eprintln!("error: cannot create {}: {e}", cli.out.display());
        return EXIT_IO;
    }
    for a in &outcome.artifacts {
        let target = cli.out.join(a.name);
        if let Err(e) = fs::write(&target, &a.contents) {
            eprintln!("error: cannot write {}: {e}", target.display());
            return EXIT_IO;
        }
        info!("wrote {}", target.display());
    }
    match outcome.failure {
        Some(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
        None => EXIT_OK,
    }
}
