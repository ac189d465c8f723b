//! `msbench` command-line harness: dataset ingestion, splitting, split
//! diagnostics, scoring, retrieval, model comparison and a nearest-neighbour
//! baseline. Every command is deterministic given its inputs, configuration
//! and seed.

pub mod args;
pub mod commands;
pub mod dataset;
pub mod error;
pub mod mass;
pub mod predictions;
pub mod report;
pub mod settings;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use error::{CliError, Result};
use report::Output;
use settings::{Overrides, RunConfig, Settings};

/// Shared state for one invocation.
#[derive(Debug, Clone)]
pub struct Ctx {
    pub settings: Settings,
    pub out: Output,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code: 0 success, 1 usage error, 2 data error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("msbench: error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let settings = Settings::resolve(
        file,
        Overrides {
            seed: cli.seed,
            resolution: cli.resolution,
            max_mz: cli.max_mz,
            tau: cli.tau,
            threads: cli.threads,
        },
    )?;
    let ctx = Ctx { out: Output { path: cli.out.clone() }, settings };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = ctx.settings.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::usage(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(&ctx, cli.command))
}

fn dispatch(ctx: &Ctx, command: Command) -> Result<()> {
    use commands::*;
    match command {
        Command::Split(a) => split::run(ctx, &a),
        Command::Diagnose(a) => diagnose::run(ctx, &a),
        Command::Bin(a) => bin::run(ctx, &a),
        Command::Score(a) => score::run(ctx, &a),
        Command::Retrieve(a) => retrieve::run(ctx, &a),
        Command::Compare(a) => compare::run(ctx, &a),
        Command::Baseline(a) => baseline::run(ctx, &a),
        Command::Embed(a) => embed::run(ctx, &a),
        Command::ImportMgf(a) => import::run(ctx, &a, import::Format::Mgf),
        Command::ImportMsp(a) => import::run(ctx, &a, import::Format::Msp),
    }
}
