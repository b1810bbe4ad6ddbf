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

//! Topology and monitor-list loading shared by the subcommands, plus
//! `gen-topology`.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use prefixguard_core::topology::synthetic::{sample_monitors, InternetLike};
use prefixguard_core::topology::{parse_as_rel, parse_monitor_list, write_as_rel, AsGraph};
use prefixguard_core::types::Asn;

use crate::manifest::RunManifest;
use crate::{create_dir, out_file, CliError};

pub fn load_graph(
    path: &Path,
    monitors: Option<&Path>,
    manifest: &mut RunManifest,
) -> Result<(AsGraph, Vec<Asn>), CliError> {
    let file = File::open(path).map_err(|e| CliError::input(path, e))?;
    let graph = parse_as_rel(BufReader::new(file)).map_err(|e| CliError::input(path, e))?;
    manifest.add_input(path)?;
    let Some(mpath) = monitors else {
        return Ok((graph, Vec::new()));
    };
    let file = File::open(mpath).map_err(|e| CliError::input(mpath, e))?;
    let mut list =
        parse_monitor_list(BufReader::new(file)).map_err(|e| CliError::input(mpath, e))?;
    manifest.add_input(mpath)?;
    list.sort_unstable();
    list.dedup();
    let (graph, skipped) = graph.with_monitors(&list);
    if skipped > 0 {
        eprintln!(
            "prefixguard: {skipped} of {} monitors are not in the topology and were ignored",
            list.len()
        );
    }
    list.retain(|m| graph.contains(*m));
    Ok((graph, list))
}

#[derive(clap::Args)]
pub struct Args {
    /// Number of ASes.
    #[arg(long, default_value_t = 10_000)]
    nodes: usize,
    /// Number of monitor ASes to sample.
    #[arg(long, default_value_t = 218)]
    monitors: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory; receives topology.txt, monitors.txt and manifest.json.
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: Args) -> Result<(), CliError> {
    if args.nodes < 2 {
        return Err(CliError::Usage("--nodes must be at least 2".into()));
    }
    let manifest = RunManifest::new("gen-topology", Some(args.seed));
    create_dir(&args.out)?;
    let graph = InternetLike::new(args.nodes, args.seed).generate();
    let monitors = sample_monitors(&graph, args.monitors, args.seed);

    let topo = out_file(&args.out, "topology.txt");
    let mut text = Vec::new();
    write_as_rel(&graph, &mut text).map_err(|e| CliError::Internal(e.to_string()))?;
    crate::write_file(&topo, &text)?;
    let list: String = monitors.iter().map(|m| format!("{m}\n")).collect();
    crate::write_file(&out_file(&args.out, "monitors.txt"), list.as_bytes())?;
    manifest.write(&out_file(&args.out, "manifest.json"))?;
    println!(
        "{} ASes, {} links, {} monitors -> {}",
        graph.node_count(),
        graph.edge_count(),
        monitors.len(),
        args.out.display()
    );
    Ok(())
}
