// Copyright 2026 The eeqt Authors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end.
//!
//! Exit codes: 0 on success or a passing comparison, 1 on usage,
//! configuration, or runtime errors, 2 when `compare` fails.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eeqt::io::{
    cmd_compare, cmd_ensemble, cmd_master, cmd_trajectory, cmd_validate, load_config, CommandError,
    CommandOutput, RunOptions, SchemeName, Verdict, OUT_DIR_ENV,
};

const EXIT_ERROR: u8 = 1;
const EXIT_FAIL: u8 = 2;

#[derive(Parser)]
#[command(
    name = "eeqt",
    version,
    about = "Quantum trajectories with classical event records"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a configuration and summarize the model.
    Validate(Common),
    /// Run one trajectory and write its events and snapshots.
    Trajectory(Common),
    /// Run an ensemble of trajectories and write averaged data.
    Ensemble(Common),
    /// Solve the master equation and write the density blocks.
    Master(Common),
    /// Run ensemble and master equation and test their agreement.
    Compare(Common),
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Override run.master_seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR", long_help = format!(
        "Output directory. Defaults to outputs.directory from the config, then ${OUT_DIR_ENV}, then ./eeqt-out."
    ))]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core). Results do not depend on it.
    #[arg(long, value_name = "N", default_value_t = 0)]
    workers: usize,
    /// Override run.scheme.
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Solve the master equation with transposed coupling indices.
    #[arg(long, hide = true)]
    debug_transpose_couplings: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    FixedDt,
    NormThreshold,
}

impl From<SchemeArg> for SchemeName {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::FixedDt => SchemeName::FixedDt,
            SchemeArg::NormThreshold => SchemeName::NormThreshold,
        }
    }
}

impl Common {
    fn options(&self) -> RunOptions {
        RunOptions {
            out: self.out.clone(),
            workers: self.workers,
            seed: self.seed,
            scheme: self.scheme.map(Into::into),
            debug_transpose_couplings: self.debug_transpose_couplings,
        }
    }
}

fn run(cli: Cli) -> Result<Option<Verdict>, CommandError> {
    type Cmd = fn(&eeqt::io::SimulationSpec, &RunOptions) -> Result<CommandOutput, CommandError>;
    let (common, cmd): (&Common, Option<Cmd>) = match &cli.command {
        Command::Validate(c) => (c, None),
        Command::Trajectory(c) => (c, Some(cmd_trajectory)),
        Command::Ensemble(c) => (c, Some(cmd_ensemble)),
        Command::Master(c) => (c, Some(cmd_master)),
        Command::Compare(c) => (c, Some(cmd_compare)),
    };
    let spec = load_config(&common.config)?;
    let opts = common.options();
    let Some(cmd) = cmd else {
        let spec = spec.with_overrides(opts.seed, opts.scheme)?;
        print!("{}", cmd_validate(&spec));
        return Ok(None);
    };
    let output = cmd(&spec, &opts)?;
    println!("{}", output.report);
    for file in &output.files {
        log::info!("wrote {}", file.display());
    }
    Ok(output.verdict)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_ERROR)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(Some(Verdict::Fail)) => ExitCode::from(EXIT_FAIL),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
