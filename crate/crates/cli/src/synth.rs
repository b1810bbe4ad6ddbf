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

//! `synth`: one simulated hijack rendered as a replayable feed.
//!
//! Besides the feed and its manifest sidecar, writes next to the feed a
//! matching detection config (`.detection.toml`), the links of every
//! legitimate path the monitors saw (`.verified`) and the run manifest
//! (`.run.json`).

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use prefixguard_core::feeds::{synth_hijack_feed, synth_mitigation_feed, write_feed, SynthFeed};
use prefixguard_core::sim::{
    impact, simulate_hijack, simulate_mitigation, HijackScenario, MitigationStrategy, SimError,
};
use prefixguard_core::topology::AsGraph;
use prefixguard_core::types::{Asn, DirectedLink, HijackClass, PathDim, Prefix, PrefixDim};

use crate::manifest::RunManifest;
use crate::topology::load_graph;
use crate::CliError;

#[derive(clap::Args)]
pub struct Args {
    #[arg(long)]
    topology: PathBuf,
    #[arg(long)]
    monitors: PathBuf,
    #[arg(long)]
    victim: Asn,
    #[arg(long)]
    hijacker: Asn,
    /// Path type: 0..N or U.
    #[arg(long = "type", default_value = "0")]
    path_type: PathDim,
    /// exact, sub-prefix or squatting.
    #[arg(long, default_value = "exact")]
    prefix_dim: PrefixDim,
    /// The victim's prefix (for squatting, the owned but unannounced one).
    #[arg(long)]
    prefix: Prefix,
    /// Comma-separated fake hops between hijacker and victim, nearest the
    /// hijacker first. Defaults to reserved filler ASNs.
    #[arg(long, value_delimiter = ',')]
    forged_hops: Option<Vec<Asn>>,
    /// Propagation delay range in seconds, `LO,HI`.
    #[arg(long, default_value = "1,10", value_parser = parse_jitter)]
    jitter: (u64, u64),
    /// Timestamp of the hijack announcement.
    #[arg(long, default_value_t = 1_500_000_000)]
    base_ts: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Append a mitigation phase: deagg, moas:A,B or filter:A,B.
    #[arg(long, value_parser = parse_mitigation)]
    mitigate: Option<MitigationStrategy>,
    /// Seconds after the hijack at which the mitigation starts.
    #[arg(long, default_value_t = 60)]
    mitigation_delay: u64,
    /// Output replay file.
    #[arg(long)]
    out: PathBuf,
}

fn parse_jitter(s: &str) -> Result<(u64, u64), String> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| format!("expected LO,HI, got {s:?}"))?;
    let lo: u64 = lo
        .trim()
        .parse()
        .map_err(|_| format!("bad jitter bound {lo:?}"))?;
    let hi: u64 = hi
        .trim()
        .parse()
        .map_err(|_| format!("bad jitter bound {hi:?}"))?;
    if lo > hi {
        return Err(format!("jitter range {s:?} is inverted"));
    }
    Ok((lo, hi))
}

fn parse_mitigation(s: &str) -> Result<MitigationStrategy, String> {
    if s == "deagg" {
        return Ok(MitigationStrategy::Deaggregation);
    }
    let (kind, list) = s
        .split_once(':')
        .ok_or_else(|| format!("expected deagg, moas:A,B or filter:A,B, got {s:?}"))?;
    let asns = list
        .split(',')
        .map(|a| a.trim().parse::<Asn>().map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    match kind {
        "moas" => Ok(MitigationStrategy::Moas(asns)),
        "filter" => Ok(MitigationStrategy::Filtering(asns)),
        other => Err(format!("unknown mitigation {other:?}")),
    }
}

fn sidecar(feed: &Path, suffix: &str) -> PathBuf {
    let mut name = feed.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

fn usage(e: SimError) -> CliError {
    CliError::Usage(e.to_string())
}

pub fn run(args: Args) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("synth", Some(args.seed));
    let (graph, monitors) = load_graph(&args.topology, Some(&args.monitors), &mut manifest)?;
    if args.base_ts < prefixguard_core::feeds::HIJACK_LEAD {
        return Err(CliError::Usage(format!(
            "--base-ts must be at least {}",
            prefixguard_core::feeds::HIJACK_LEAD
        )));
    }
    let class = HijackClass::new(args.prefix_dim, args.path_type);
    let mut scenario = HijackScenario::new(args.victim, args.hijacker, class, args.prefix);
    if let Some(hops) = args.forged_hops {
        scenario = scenario.with_forged_hops(hops);
    }
    let outcome = simulate_hijack(&graph, &scenario).map_err(usage)?;
    let hijack = synth_hijack_feed(&outcome, &monitors, args.base_ts, args.jitter, args.seed);

    let (feed, residual) = match &args.mitigate {
        None => (hijack, None),
        Some(strategy) => {
            let mitigated = simulate_mitigation(&graph, &outcome, strategy).map_err(usage)?;
            let mitigators = match strategy {
                MitigationStrategy::Moas(m) => m.clone(),
                _ => Vec::new(),
            };
            let at = args.base_ts + args.mitigation_delay;
            let feed =
                synth_mitigation_feed(&hijack, &mitigated, &mitigators, at, args.jitter, args.seed);
            (feed, Some(mitigated))
        }
    };

    write_feed(&feed, &args.out).map_err(|e| CliError::output(&args.out, e))?;
    crate::write_file(
        &sidecar(&args.out, ".detection.toml"),
        detection_config(&graph, &scenario).as_bytes(),
    )?;
    crate::write_file(
        &sidecar(&args.out, ".verified"),
        verified_links(&feed).as_bytes(),
    )?;
    manifest.write(&sidecar(&args.out, ".run.json"))?;

    println!(
        "victim {} hijacker {} class {} prefix {}",
        args.victim,
        args.hijacker,
        label(class),
        outcome.hijacked_prefix
    );
    println!(
        "impact {:.4} ({} of {} ASes polluted, {} pre-polluted)",
        impact(&outcome),
        outcome.polluted.len(),
        graph.node_count(),
        outcome.pre_polluted.len()
    );
    println!(
        "polluted monitors {} of {}",
        outcome.polluted_monitors.len(),
        monitors.len()
    );
    println!("polluted {}", join(&outcome.polluted));
    if let Some(m) = residual {
        println!(
            "after mitigation {} ASes polluted: {}",
            m.polluted.len(),
            join(&m.polluted)
        );
    }
    match feed.manifest.min_jitter {
        Some(j) => println!("first polluted monitor sees the hijack {j}s after it starts"),
        None => println!("no monitor sees the hijack"),
    }
    println!("{} updates -> {}", feed.updates.len(), args.out.display());
    Ok(())
}

fn label(class: HijackClass) -> String {
    format!("{}/{}", class.prefix_dim.label(), class.path_dim)
}

/// Lists at most `SHOWN` ASNs; longer lists end with a count of the rest.
fn join(asns: &[Asn]) -> String {
    const SHOWN: usize = 20;
    if asns.is_empty() {
        return "-".into();
    }
    let mut parts: Vec<String> = asns.iter().take(SHOWN).map(|a| a.to_string()).collect();
    if asns.len() > SHOWN {
        parts.push(format!("and {} more", asns.len() - SHOWN));
    }
    parts.join(" ")
}

/// Ground truth as the victim's operator would write it.
fn detection_config(graph: &AsGraph, scenario: &HijackScenario) -> String {
    let prefix = scenario.victim_prefix;
    let mut out = format!("owned = [\"{prefix}\"]\n");
    if scenario.class.prefix_dim != PrefixDim::Squatting {
        let neighbors: Vec<String> = graph
            .neighbors(scenario.victim)
            .iter()
            .map(|a| a.value().to_string())
            .collect();
        out.push_str(&format!(
            "\n[announced.\"{prefix}\"]\norigins = [{}]\nneighbors = [{}]\n",
            scenario.victim.value(),
            neighbors.join(", ")
        ));
    }
    out
}

/// Links of the legitimate-phase paths, one `FROM TO` pair per line.
fn verified_links(feed: &SynthFeed) -> String {
    let hijack_ts = feed.manifest.hijack_ts;
    let links: BTreeSet<DirectedLink> = feed
        .updates
        .iter()
        .filter(|u| u.timestamp < hijack_ts)
        .filter_map(|u| u.path())
        .flat_map(|p| p.collapse_prepending().links().unwrap_or_default())
        .collect();
    links
        .iter()
        .map(|l| format!("{} {}\n", l.from.value(), l.to.value()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jitter_and_mitigation_flags() {
        assert_eq!(parse_jitter("1,10").unwrap(), (1, 10));
        assert!(parse_jitter("10,1").is_err());
        assert!(parse_jitter("5").is_err());
        assert_eq!(
            parse_mitigation("deagg").unwrap(),
            MitigationStrategy::Deaggregation
        );
        assert_eq!(
            parse_mitigation("moas:7,9").unwrap(),
            MitigationStrategy::Moas(vec![Asn::new(7).unwrap(), Asn::new(9).unwrap()])
        );
        assert!(parse_mitigation("anycast:1").is_err());
    }
}
