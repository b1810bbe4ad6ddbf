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

//! Batched hijack experiments over random (victim, hijacker) pairs.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::hijack::{
    impact, simulate_hijack_from, simulate_mitigation, Baseline, HijackScenario, MitigationStrategy,
};
use super::SimError;
use crate::topology::{AsGraph, DegreeRankings};
use crate::types::{Asn, HijackClass, PathDim, Prefix, PrefixDim};

pub const CSV_HEADER: [&str; 9] = [
    "run",
    "victim",
    "hijacker",
    "type",
    "prefix_dim",
    "impact",
    "visible_monitors",
    "strategy",
    "residual_impact",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentFamily {
    Impact,
    Visibility,
    Mitigation,
}

impl FromStr for ExperimentFamily {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, SimError> {
        match s {
            "impact" => Ok(ExperimentFamily::Impact),
            "visibility" => Ok(ExperimentFamily::Visibility),
            "mitigation" => Ok(ExperimentFamily::Mitigation),
            other => Err(SimError::BadExperiment(format!("unknown family {other:?}"))),
        }
    }
}

/// How mitigating or filtering ASes are chosen for each run. The victim and
/// the hijacker are never chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MitigatorSelection {
    TopCone(usize),
    TopProviders(usize),
    Random(usize),
    Asns(Vec<Asn>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StrategySpec {
    Deaggregation,
    Moas(MitigatorSelection),
    Filtering(MitigatorSelection),
}

impl FromStr for StrategySpec {
    type Err = SimError;

    /// `deagg`, `moas:<sel>` or `filter:<sel>`, where `<sel>` is one of
    /// `top-cone:K`, `providers:K`, `random:K` or `asns:A,B,...`.
    fn from_str(s: &str) -> Result<Self, SimError> {
        let bad = || SimError::BadStrategy(s.to_string());
        if s == "deagg" {
            return Ok(StrategySpec::Deaggregation);
        }
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        let (sel, arg) = rest.split_once(':').ok_or_else(bad)?;
        let count = || arg.parse::<usize>().ok().filter(|k| *k > 0).ok_or_else(bad);
        let selection = match sel {
            "top-cone" => MitigatorSelection::TopCone(count()?),
            "providers" => MitigatorSelection::TopProviders(count()?),
            "random" => MitigatorSelection::Random(count()?),
            "asns" => {
                let asns = arg
                    .split(',')
                    .map(|a| a.trim().parse::<Asn>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| bad())?;
                if asns.is_empty() {
                    return Err(bad());
                }
                MitigatorSelection::Asns(asns)
            }
            _ => return Err(bad()),
        };
        match kind {
            "moas" => Ok(StrategySpec::Moas(selection)),
            "filter" => Ok(StrategySpec::Filtering(selection)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for MitigatorSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MitigatorSelection::TopCone(k) => write!(f, "top-cone:{k}"),
            MitigatorSelection::TopProviders(k) => write!(f, "providers:{k}"),
            MitigatorSelection::Random(k) => write!(f, "random:{k}"),
            MitigatorSelection::Asns(asns) => {
                let list: Vec<String> = asns.iter().map(|a| a.to_string()).collect();
                write!(f, "asns:{}", list.join(","))
            }
        }
    }
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategySpec::Deaggregation => f.write_str("deagg"),
            StrategySpec::Moas(sel) => write!(f, "moas:{sel}"),
            StrategySpec::Filtering(sel) => write!(f, "filter:{sel}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentSpec {
    pub family: ExperimentFamily,
    pub prefix_dim: PrefixDim,
    pub types: Vec<PathDim>,
    pub pairs: usize,
    pub seed: u64,
    pub victim_prefix: Prefix,
    pub strategy: Option<StrategySpec>,
}

impl ExperimentSpec {
    pub fn new(family: ExperimentFamily, types: Vec<PathDim>, pairs: usize, seed: u64) -> Self {
        ExperimentSpec {
            family,
            prefix_dim: PrefixDim::ExactPrefix,
            types,
            pairs,
            seed,
            victim_prefix: Prefix::v4(10, 0, 0, 0, 23).expect("valid"),
            strategy: None,
        }
    }

    pub fn with_strategy(mut self, strategy: StrategySpec) -> Self {
        self.strategy = Some(strategy);
        self
    }

    fn validate(&self) -> Result<(), SimError> {
        if self.types.is_empty() {
            return Err(SimError::BadExperiment("no hijack types".into()));
        }
        match (self.family, &self.strategy) {
            (ExperimentFamily::Mitigation, None) => Err(SimError::BadExperiment(
                "mitigation experiments need a strategy".into(),
            )),
            (ExperimentFamily::Impact | ExperimentFamily::Visibility, Some(_)) => Err(
                SimError::BadExperiment("a strategy only applies to mitigation experiments".into()),
            ),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub run: usize,
    pub victim: Asn,
    pub hijacker: Asn,
    pub path_dim: PathDim,
    pub prefix_dim: PrefixDim,
    pub impact: f64,
    pub visible_monitors: usize,
    pub strategy: Option<String>,
    pub residual_impact: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    #[serde(rename = "type")]
    pub path_type: String,
    pub prefix_dim: PrefixDim,
    pub strategy: Option<String>,
    pub runs: usize,
    pub mean_impact: f64,
    pub median_impact: f64,
    pub invisible_fraction: f64,
    pub mean_visible_monitors: f64,
    pub mean_residual_impact: Option<f64>,
    pub median_residual_impact: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<RunRow>,
    pub aggregates: Vec<Aggregate>,
}

impl ExperimentResult {
    pub fn aggregate_for(&self, path_dim: PathDim) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.path_type == path_dim.label())
    }

    pub fn write_csv(&self, out: impl Write) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.run.to_string(),
                r.victim.to_string(),
                r.hijacker.to_string(),
                r.path_dim.label(),
                r.prefix_dim.label().to_string(),
                format!("{:.6}", r.impact),
                r.visible_monitors.to_string(),
                r.strategy.clone().unwrap_or_default(),
                r.residual_impact
                    .map(|x| format!("{x:.6}"))
                    .unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn aggregates_json(&self) -> String {
        serde_json::to_string_pretty(&self.aggregates).expect("aggregates serialize")
    }
}

/// Draws `count` ordered (victim, hijacker) pairs of distinct nodes uniformly
/// without replacement.
pub fn sample_pairs(graph: &AsGraph, count: usize, seed: u64) -> Result<Vec<(Asn, Asn)>, SimError> {
    let n = graph.node_count() as u64;
    let available = n.saturating_mul(n.saturating_sub(1));
    if count as u64 > available {
        return Err(SimError::TooManyPairs {
            requested: count as u64,
            available,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = index::sample(&mut rng, available as usize, count);
    let m = n as usize - 1;
    Ok(picks
        .into_iter()
        .map(|k| {
            let v = k / m.max(1);
            let mut h = k % m.max(1);
            if h >= v {
                h += 1;
            }
            (graph.asn_at(v), graph.asn_at(h))
        })
        .collect())
}

fn select(
    graph: &AsGraph,
    rankings: &DegreeRankings,
    sel: &MitigatorSelection,
    exclude: &[Asn],
    seed: u64,
    run: usize,
) -> Vec<Asn> {
    match sel {
        MitigatorSelection::TopCone(k) => rankings.top_cone(*k, exclude),
        MitigatorSelection::TopProviders(k) => rankings.top_providers(*k, exclude),
        MitigatorSelection::Random(k) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0000_0000_0000 ^ run as u64);
            let pool: Vec<Asn> = graph
                .asns()
                .iter()
                .copied()
                .filter(|a| !exclude.contains(a))
                .collect();
            let k = (*k).min(pool.len());
            let mut picked: Vec<Asn> = index::sample(&mut rng, pool.len(), k)
                .into_iter()
                .map(|i| pool[i])
                .collect();
            picked.sort_unstable();
            picked
        }
        MitigatorSelection::Asns(asns) => asns
            .iter()
            .copied()
            .filter(|a| !exclude.contains(a))
            .collect(),
    }
}

fn strategy_for(
    graph: &AsGraph,
    rankings: &DegreeRankings,
    spec: &StrategySpec,
    exclude: &[Asn],
    seed: u64,
    run: usize,
) -> MitigationStrategy {
    match spec {
        StrategySpec::Deaggregation => MitigationStrategy::Deaggregation,
        StrategySpec::Moas(sel) => {
            MitigationStrategy::Moas(select(graph, rankings, sel, exclude, seed, run))
        }
        StrategySpec::Filtering(sel) => {
            MitigationStrategy::Filtering(select(graph, rankings, sel, exclude, seed, run))
        }
    }
}

fn run_pair(
    graph: &AsGraph,
    rankings: Option<&DegreeRankings>,
    spec: &ExperimentSpec,
    run: usize,
    victim: Asn,
    hijacker: Asn,
) -> Result<Vec<RunRow>, SimError> {
    let first = HijackScenario::new(
        victim,
        hijacker,
        HijackClass::new(spec.prefix_dim, spec.types[0]),
        spec.victim_prefix,
    );
    let baseline = Baseline::compute(graph, &first)?;
    let strategy = match (&spec.strategy, rankings) {
        (Some(s), Some(r)) => Some(strategy_for(
            graph,
            r,
            s,
            &[victim, hijacker],
            spec.seed,
            run,
        )),
        _ => None,
    };
    let mut rows = Vec::with_capacity(spec.types.len());
    for &path_dim in &spec.types {
        let scenario = HijackScenario {
            class: HijackClass::new(spec.prefix_dim, path_dim),
            ..first.clone()
        };
        let outcome = simulate_hijack_from(graph, &scenario, &baseline)?;
        let residual = match &strategy {
            Some(m) => match m {
                MitigationStrategy::Moas(ms) if ms.is_empty() => Some(impact(&outcome)),
                _ => Some(impact(&simulate_mitigation(graph, &outcome, m)?)),
            },
            None => None,
        };
        rows.push(RunRow {
            run,
            victim,
            hijacker,
            path_dim,
            prefix_dim: spec.prefix_dim,
            impact: impact(&outcome),
            visible_monitors: outcome.polluted_monitors.len(),
            strategy: spec.strategy.as_ref().map(|s| s.to_string()),
            residual_impact: residual,
        });
    }
    Ok(rows)
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    }
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

fn aggregate(spec: &ExperimentSpec, rows: &[RunRow]) -> Vec<Aggregate> {
    spec.types
        .iter()
        .map(|&t| {
            let group: Vec<&RunRow> = rows.iter().filter(|r| r.path_dim == t).collect();
            let mut impacts: Vec<f64> = group.iter().map(|r| r.impact).collect();
            let mut residuals: Vec<f64> = group.iter().filter_map(|r| r.residual_impact).collect();
            let invisible = group.iter().filter(|r| r.visible_monitors == 0).count();
            let visible: Vec<f64> = group.iter().map(|r| r.visible_monitors as f64).collect();
            let has_residual = spec.strategy.is_some();
            Aggregate {
                path_type: t.label(),
                prefix_dim: spec.prefix_dim,
                strategy: spec.strategy.as_ref().map(|s| s.to_string()),
                runs: group.len(),
                mean_impact: mean(&impacts),
                median_impact: median(&mut impacts),
                invisible_fraction: if group.is_empty() {
                    0.0
                } else {
                    invisible as f64 / group.len() as f64
                },
                mean_visible_monitors: mean(&visible),
                mean_residual_impact: has_residual.then(|| mean(&residuals)),
                median_residual_impact: has_residual.then(|| median(&mut residuals)),
            }
        })
        .collect()
}

/// Runs every sampled pair against every requested hijack type. Rows come
/// back ordered by run index, then by type, whatever the thread count.
pub fn run_experiment(
    graph: &AsGraph,
    spec: &ExperimentSpec,
) -> Result<ExperimentResult, SimError> {
    spec.validate()?;
    let pairs = sample_pairs(graph, spec.pairs, spec.seed)?;
    let rankings = spec
        .strategy
        .as_ref()
        .map(|_| DegreeRankings::compute(graph));
    let per_run: Vec<Vec<RunRow>> = pairs
        .par_iter()
        .enumerate()
        .map(|(run, &(v, h))| run_pair(graph, rankings.as_ref(), spec, run, v, h))
        .collect::<Result<_, _>>()?;
    let rows: Vec<RunRow> = per_run.into_iter().flatten().collect();
    let aggregates = aggregate(spec, &rows);
    Ok(ExperimentResult { rows, aggregates })
}
