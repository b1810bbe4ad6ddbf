// Copyright 2026 The prefixguard Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! `prefixguard`: hijack simulation, synthetic feeds and replayed detection.

mod detect;
mod manifest;
mod simulate;
mod synth;
mod topology;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    /// Bad flag values or combinations.
    Usage(String),
    /// Unreadable or malformed input files.
    Input(String),
    Internal(String),
}

impl CliError {
    pub fn input(path: &Path, err: impl fmt::Display) -> Self {
        CliError::Input(format!("{}: {err}", path.display()))
    }

    pub fn output(path: &Path, err: impl fmt::Display) -> Self {
        CliError::Internal(format!("cannot write {}: {err}", path.display()))
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Input(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Internal(m) => write!(f, "error: {m}"),
        }
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::output(path, e))
}

pub fn create_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path).map_err(|e| CliError::output(path, e))
}

#[derive(Parser)]
#[command(
    name = "prefixguard",
    version,
    about = "BGP prefix-hijack simulation, detection and mitigation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a batch of hijack simulations and write per-run rows and aggregates.
    Simulate(simulate::Args),
    /// Simulate one hijack and write it out as a replayable update feed.
    Synth(synth::Args),
    /// Replay update feeds through detection and the mitigation policy.
    Detect(detect::Args),
    /// Generate a synthetic AS-relationship topology and monitor list.
    GenTopology(topology::Args),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate::run(a),
        Command::Synth(a) => synth::run(a),
        Command::Detect(a) => detect::run(a),
        Command::GenTopology(a) => topology::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("prefixguard: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Output file `name` inside the `--out` directory.
pub fn out_file(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
