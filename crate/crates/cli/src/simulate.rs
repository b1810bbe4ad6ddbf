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

//! `simulate`: batches of hijack (and mitigation) simulations.

use std::path::PathBuf;

use prefixguard_core::sim::{
    run_experiment, ExperimentFamily, ExperimentSpec, SimError, StrategySpec,
};
use prefixguard_core::types::{PathDim, Prefix, PrefixDim};

use crate::manifest::RunManifest;
use crate::topology::load_graph;
use crate::{create_dir, out_file, CliError};

#[derive(clap::Args)]
pub struct Args {
    /// AS relationships, `a|b|-1` (provider|customer) or `a|b|0` (peers).
    #[arg(long)]
    topology: PathBuf,
    /// Monitor ASNs, one per line.
    #[arg(long)]
    monitors: Option<PathBuf>,
    /// impact, visibility or mitigation.
    #[arg(long)]
    experiment: ExperimentFamily,
    /// Path types: a range `0..4`, a list `0,1,U` or a single type.
    #[arg(long, default_value = "0..4", value_parser = parse_types)]
    types: TypeList,
    #[arg(long, default_value = "exact")]
    prefix_dim: PrefixDim,
    #[arg(long, default_value = "10.0.0.0/23")]
    victim_prefix: Prefix,
    #[arg(long, default_value_t = 1000)]
    pairs: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// deagg, moas:SEL or filter:SEL with SEL one of top-cone:K,
    /// providers:K, random:K, asns:A,B.
    #[arg(long)]
    strategy: Option<StrategySpec>,
    /// Output directory; receives runs.csv, aggregates.json and manifest.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone)]
struct TypeList(Vec<PathDim>);

fn parse_types(s: &str) -> Result<TypeList, String> {
    parse_type_list(s).map(TypeList)
}

/// `0..4`, `0,2,U` or `3`.
fn parse_type_list(s: &str) -> Result<Vec<PathDim>, String> {
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: u8 = lo
            .trim()
            .parse()
            .map_err(|_| format!("bad type range {s:?}"))?;
        let hi: u8 = hi
            .trim()
            .parse()
            .map_err(|_| format!("bad type range {s:?}"))?;
        if lo > hi {
            return Err(format!("empty type range {s:?}"));
        }
        return Ok((lo..=hi).map(PathDim::TypeN).collect());
    }
    s.split(',').map(|t| t.trim().parse::<PathDim>()).collect()
}

pub fn run(args: Args) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("simulate", Some(args.seed));
    let (graph, _) = load_graph(&args.topology, args.monitors.as_deref(), &mut manifest)?;
    let mut spec = ExperimentSpec::new(args.experiment, args.types.0, args.pairs, args.seed);
    spec.prefix_dim = args.prefix_dim;
    spec.victim_prefix = args.victim_prefix;
    spec.strategy = args.strategy;
    let result = run_experiment(&graph, &spec).map_err(|e| match e {
        SimError::BadExperiment(_)
        | SimError::BadStrategy(_)
        | SimError::TooManyPairs { .. }
        | SimError::CannotSubdivide(_)
        | SimError::NotAHijack => CliError::Usage(e.to_string()),
        other => CliError::Internal(other.to_string()),
    })?;

    create_dir(&args.out)?;
    let csv_path = out_file(&args.out, "runs.csv");
    let mut csv = Vec::new();
    result
        .write_csv(&mut csv)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    crate::write_file(&csv_path, &csv)?;
    crate::write_file(
        &out_file(&args.out, "aggregates.json"),
        (result.aggregates_json() + "\n").as_bytes(),
    )?;
    manifest.write(&out_file(&args.out, "manifest.json"))?;

    for a in &result.aggregates {
        let residual = a
            .mean_residual_impact
            .map(|r| format!(", mean residual {:.2}%", r * 100.0))
            .unwrap_or_default();
        println!(
            "type {:>2}: {} runs, mean impact {:.2}%, invisible {:.2}%{residual}",
            a.path_type,
            a.runs,
            a.mean_impact * 100.0,
            a.invisible_fraction * 100.0
        );
    }
    Ok(())
}
