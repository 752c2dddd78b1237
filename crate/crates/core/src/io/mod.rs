// Copyright 2026 The eeqt Authors
// SPDX-License-Identifier: Apache-2.0

//! Configuration files, data output, and the command implementations
//! behind the `eeqt` binary.

mod commands;
pub mod config;
pub mod output;

pub use commands::{
    cmd_compare, cmd_ensemble, cmd_master, cmd_trajectory, cmd_validate, resolve_out_dir,
    CommandError, CommandOutput, RunOptions, Verdict, DEFAULT_OUT_DIR, OUT_DIR_ENV,
};
pub use config::{load_config, parse_config, ConfigError, SchemeName, SimulationSpec};
