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

//! Seeded generator for Internet-like AS topologies.
//!
//! A full-mesh tier-1 clique sits on top of a transit layer that attaches by
//! preferential attachment (the clique starts with extra weight so its
//! members end up with the largest customer cones); stubs buy transit from one to three providers and
//! a share of them peer at IXP-style fabrics. Providers are always created
//! before their customers, so the provider graph is acyclic, and every AS has
//! a provider chain that reaches the clique.

use std::collections::HashSet;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{AsGraph, AsGraphBuilder, DegreeRankings};
use crate::types::Asn;

#[derive(Debug, Clone)]
pub struct InternetLike {
    pub nodes: usize,
    pub tier1: usize,
    /// Share of non-tier-1 ASes that sell transit.
    pub transit_share: f64,
    /// Mean number of lateral peerings per transit AS.
    pub transit_peering: f64,
    /// Share of stubs present at a peering fabric.
    pub stub_peering_share: f64,
    /// Initial attachment weight of each tier-1 AS.
    pub clique_weight: usize,
    pub seed: u64,
}

impl InternetLike {
    pub fn new(nodes: usize, seed: u64) -> Self {
        InternetLike {
            nodes,
            tier1: 12.min(nodes),
            transit_share: 0.15,
            transit_peering: 4.0,
            stub_peering_share: 0.3,
            clique_weight: 20,
            seed,
        }
    }

    pub fn generate(&self) -> AsGraph {
        let n = self.nodes;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let space = (n as u32).saturating_mul(8).max(16);
        let mut asns: Vec<Asn> = index::sample(&mut rng, space as usize, n)
            .into_iter()
            .map(|v| Asn::new(v as u32 + 1).expect("non-zero"))
            .collect();
        asns.shuffle(&mut rng);

        let tier1 = self.tier1.min(n);
        let transit_end = tier1 + ((n - tier1) as f64 * self.transit_share).round() as usize;
        let mut b = AsGraphBuilder::new();
        let mut pairs: HashSet<(usize, usize)> = HashSet::new();
        let mut link = |b: &mut AsGraphBuilder, a: usize, c: usize, peer: bool| -> bool {
            let key = (a.min(c), a.max(c));
            if a == c || !pairs.insert(key) {
                return false;
            }
            if peer {
                b.add_peers(asns[a], asns[c]).expect("fresh pair");
            } else {
                b.add_provider_customer(asns[a], asns[c])
                    .expect("fresh pair");
            }
            true
        };
        for &a in &asns {
            b.add_node(a);
        }
        for i in 0..tier1 {
            for j in i + 1..tier1 {
                link(&mut b, i, j, true);
            }
        }

        // Preferential attachment: a provider appears once, plus once per customer.
        let mut attach: Vec<usize> = (0..tier1)
            .flat_map(|t| std::iter::repeat_n(t, self.clique_weight.max(1)))
            .collect();
        let pick_providers =
            |rng: &mut ChaCha8Rng, attach: &mut Vec<usize>, k: usize| -> Vec<usize> {
                let mut chosen = Vec::with_capacity(k);
                let mut guard = 0;
                while chosen.len() < k && guard < 64 {
                    let p = attach[rng.gen_range(0..attach.len())];
                    if !chosen.contains(&p) {
                        chosen.push(p);
                    }
                    guard += 1;
                }
                chosen
            };
        for i in tier1..n {
            let roll: f64 = rng.gen();
            let k = if i < transit_end {
                if roll < 0.35 {
                    1
                } else if roll < 0.75 {
                    2
                } else {
                    3
                }
            } else if roll < 0.5 {
                1
            } else if roll < 0.85 {
                2
            } else {
                3
            };
            for p in pick_providers(&mut rng, &mut attach, k) {
                if link(&mut b, p, i, false) {
                    attach.push(p);
                }
            }
            if i < transit_end {
                attach.push(i);
            }
        }

        if transit_end > tier1 + 1 {
            for i in tier1..transit_end {
                let k = rng.gen_range(0..=(2.0 * self.transit_peering).round() as usize);
                for _ in 0..k {
                    let j = rng.gen_range(tier1..transit_end);
                    link(&mut b, i, j, true);
                }
            }
        }
        if n > transit_end + 1 {
            for i in transit_end..n {
                if rng.gen::<f64>() >= self.stub_peering_share {
                    continue;
                }
                let k = rng.gen_range(1..=4);
                for _ in 0..k {
                    let j = rng.gen_range(tier1..n);
                    link(&mut b, i, j, true);
                }
            }
        }
        b.build()
    }
}

/// Picks `count` monitor ASes, half among the best-connected quarter of the
/// graph (route collectors mostly peer with large networks) and the rest
/// uniformly. Result is sorted.
pub fn sample_monitors(graph: &AsGraph, count: usize, seed: u64) -> Vec<Asn> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = count.min(graph.node_count());
    let rankings = DegreeRankings::compute(graph);
    let degree = |a: Asn| graph.neighbors(a).len() + rankings.cone_size(a).unwrap_or(0);
    let mut by_degree: Vec<Asn> = graph.asns().to_vec();
    by_degree.sort_by(|a, b| degree(*b).cmp(&degree(*a)).then(a.cmp(b)));
    let top = &by_degree[..(by_degree.len() / 4).max(1)];

    let mut chosen: Vec<Asn> = top
        .choose_multiple(&mut rng, (count / 2).min(top.len()))
        .copied()
        .collect();
    let mut rest: Vec<Asn> = graph
        .asns()
        .iter()
        .filter(|a| !chosen.contains(a))
        .copied()
        .collect();
    rest.shuffle(&mut rng);
    chosen.extend(rest.into_iter().take(count - chosen.len()));
    chosen.sort_unstable();
    chosen
}
