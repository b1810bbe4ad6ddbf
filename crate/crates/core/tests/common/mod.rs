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

//! Shared helpers for integration tests: a brute-force routing oracle and
//! random provider-DAG topologies.

#![allow(dead_code)]

use std::collections::HashMap;

use prefixguard_core::sim::{Announcement, LearnedFrom};
use prefixguard_core::topology::{AsGraph, NeighborKind};
use prefixguard_core::types::{AsPath, Asn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A route as the oracle sees it: the received path and its class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleRoute {
    pub path: Vec<Asn>,
    pub learned_from: LearnedFrom,
}

fn class_rank(c: LearnedFrom) -> u8 {
    match c {
        LearnedFrom::Origin => 0,
        LearnedFrom::Customer => 1,
        LearnedFrom::Peer => 2,
        LearnedFrom::Provider => 3,
    }
}

/// Every loop-free path over which `seed` could reach each AS while obeying
/// valley-free export, keyed by the receiving AS. Paths are stored as
/// received (receiving AS not included).
fn enumerate(graph: &AsGraph, seed: &AsPath) -> HashMap<Asn, Vec<(Vec<Asn>, LearnedFrom)>> {
    let mut out: HashMap<Asn, Vec<(Vec<Asn>, LearnedFrom)>> = HashMap::new();
    // (advertised path, advertiser's class) worklist, explored depth first.
    let mut stack = vec![(seed.hops().to_vec(), LearnedFrom::Origin)];
    while let Some((adv, class)) = stack.pop() {
        let from = adv[0];
        for to in graph.neighbors(from) {
            if adv.contains(&to) {
                continue;
            }
            // `to` sees `from` as this kind of neighbor.
            let rel = graph.relationship(to, from).expect("neighbors are related");
            let exportable = matches!(class, LearnedFrom::Origin | LearnedFrom::Customer)
                || rel == NeighborKind::Provider;
            if !exportable {
                continue;
            }
            let learned = match rel {
                NeighborKind::Customer => LearnedFrom::Customer,
                NeighborKind::Peer => LearnedFrom::Peer,
                NeighborKind::Provider => LearnedFrom::Provider,
            };
            out.entry(to).or_default().push((adv.clone(), learned));
            let mut next = Vec::with_capacity(adv.len() + 1);
            next.push(to);
            next.extend_from_slice(&adv);
            stack.push((next, learned));
        }
    }
    out
}

/// Stable routing state for one prefix, found by synchronous rounds over the
/// enumerated candidate paths: an AS may use a candidate only if the neighbor
/// it came through currently advertises exactly that path.
pub fn oracle_rib(
    graph: &AsGraph,
    origins: &[AsPath],
    filtering: &[Asn],
    banned: &[Asn],
) -> HashMap<Asn, OracleRoute> {
    let mut candidates: HashMap<Asn, Vec<(Vec<Asn>, LearnedFrom)>> = HashMap::new();
    for seed in origins {
        for (asn, paths) in enumerate(graph, seed) {
            candidates.entry(asn).or_default().extend(paths);
        }
    }
    let origin_of: HashMap<Asn, &AsPath> = origins.iter().map(|s| (s.head(), s)).collect();

    let mut current: HashMap<Asn, OracleRoute> = HashMap::new();
    for (asn, seed) in &origin_of {
        current.insert(
            *asn,
            OracleRoute {
                path: seed.hops().to_vec(),
                learned_from: LearnedFrom::Origin,
            },
        );
    }
    let advertised = |state: &HashMap<Asn, OracleRoute>, asn: Asn| -> Option<Vec<Asn>> {
        let r = state.get(&asn)?;
        if r.learned_from == LearnedFrom::Origin {
            return Some(r.path.clone());
        }
        let mut p = vec![asn];
        p.extend_from_slice(&r.path);
        Some(p)
    };

    let bound = 4 * graph.node_count() + 10;
    for _ in 0..bound {
        let mut next: HashMap<Asn, OracleRoute> = HashMap::new();
        for &asn in graph.asns() {
            if let Some(r) = current
                .get(&asn)
                .filter(|r| r.learned_from == LearnedFrom::Origin)
            {
                next.insert(asn, r.clone());
                continue;
            }
            let filters = filtering.contains(&asn);
            let best = candidates
                .get(&asn)
                .into_iter()
                .flatten()
                .filter(|(path, _)| {
                    advertised(&current, path[0]).as_deref() == Some(path.as_slice())
                })
                .filter(|(path, _)| !(filters && path.iter().any(|a| banned.contains(a))))
                .filter(|(path, class)| {
                    // The neighbor must be allowed to export what it selected.
                    let nb = path[0];
                    let nb_class = current[&nb].learned_from;
                    matches!(nb_class, LearnedFrom::Origin | LearnedFrom::Customer)
                        || *class == LearnedFrom::Provider
                })
                .min_by_key(|(path, class)| (class_rank(*class), path.len(), path[0]));
            if let Some((path, class)) = best {
                next.insert(
                    asn,
                    OracleRoute {
                        path: path.clone(),
                        learned_from: *class,
                    },
                );
            }
        }
        if next == current {
            return current;
        }
        current = next;
    }
    panic!("oracle did not converge within {bound} rounds");
}

pub fn oracle_for(
    graph: &AsGraph,
    ann: &Announcement,
    filtering: &[Asn],
    banned: &[Asn],
) -> HashMap<Asn, OracleRoute> {
    let seeds: Vec<AsPath> = ann.origins.iter().map(|o| o.seed().clone()).collect();
    oracle_rib(graph, &seeds, filtering, banned)
}

/// A random graph whose provider relation is acyclic: providers always come
/// earlier in a random ranking.
pub fn random_dag_graph(rng: &mut ChaCha8Rng, max_nodes: usize) -> AsGraph {
    let n = rng.gen_range(2..=max_nodes);
    let mut ids: Vec<u32> = (1..=(n as u32 * 3)).collect();
    for i in (1..ids.len()).rev() {
        let j = rng.gen_range(0..=i);
        ids.swap(i, j);
    }
    ids.truncate(n);
    let asns: Vec<Asn> = ids.into_iter().map(|v| Asn::new(v).unwrap()).collect();
    let density = rng.gen_range(0.15..0.6);
    let mut b = AsGraph::builder();
    for a in &asns {
        b.add_node(*a);
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                if rng.gen_bool(0.7) {
                    b.add_provider_customer(asns[i], asns[j]).unwrap();
                } else {
                    b.add_peers(asns[i], asns[j]).unwrap();
                }
            }
        }
    }
    b.build()
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
