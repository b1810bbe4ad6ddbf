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

//! Gao-Rexford route propagation.
//!
//! Selection at every AS is (1) origination, then customer over peer over
//! provider routes, (2) shorter AS path, (3) lowest next-hop ASN. Export is
//! valley-free: customer-learned and self-originated routes go to everyone,
//! peer- and provider-learned routes go to customers only.
//!
//! Under these policies the stable state is unique and can be computed in
//! three sweeps instead of message rounds: customer routes climb the provider
//! DAG in order of path length, peer routes then cross one lateral hop, and
//! finally every selected route descends to customers, again in order of
//! length. Within a sweep a heap keyed by (path length, next-hop ASN) settles
//! each AS exactly once, so a settled route is final.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::sync::Arc;

use super::SimError;
use crate::topology::AsGraph;
use crate::types::{AsPath, Asn, Prefix};

/// One origin of an announcement: `seed` is injected at `asn`, which must be
/// its leftmost hop. The rightmost hop is the claimed origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Origination {
    asn: Asn,
    seed: AsPath,
}

impl Origination {
    pub fn new(seed: AsPath) -> Self {
        Origination {
            asn: seed.head(),
            seed,
        }
    }

    /// Plain origination: seed path `[asn]`.
    pub fn origin(asn: Asn) -> Self {
        Self::new(AsPath::single(asn))
    }

    pub fn asn(&self) -> Asn {
        self.asn
    }

    pub fn seed(&self) -> &AsPath {
        &self.seed
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Announcement {
    pub prefix: Prefix,
    pub origins: Vec<Origination>,
}

impl Announcement {
    pub fn new(prefix: Prefix, origins: Vec<Origination>) -> Self {
        Announcement { prefix, origins }
    }

    pub fn single(prefix: Prefix, origin: Asn) -> Self {
        Self::new(prefix, vec![Origination::origin(origin)])
    }
}

/// Where the selected route came from, in preference order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LearnedFrom {
    Origin,
    Customer,
    Peer,
    Provider,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Via {
    Seed(u32),
    Neighbor(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Route {
    learned_from: LearnedFrom,
    via: Via,
    /// Length of the selected path (excluding the owning AS unless it
    /// originated the route).
    len: u32,
}

/// Import restriction: the listed ASes drop every route whose path contains
/// one of the banned ASNs.
#[derive(Debug, Clone, Default)]
pub struct ImportFilter {
    pub filtering: Vec<Asn>,
    pub banned: Vec<Asn>,
}

impl ImportFilter {
    pub fn is_empty(&self) -> bool {
        self.filtering.is_empty() || self.banned.is_empty()
    }
}

/// Selected routes of every AS for one prefix.
#[derive(Debug, Clone)]
pub struct PrefixRib {
    prefix: Prefix,
    asns: Arc<[Asn]>,
    seeds: Vec<AsPath>,
    routes: Vec<Option<Route>>,
    /// Settling order; every next hop appears before the ASes using it.
    order: Vec<u32>,
}

/// A selected route in owned form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectedRoute {
    pub path: AsPath,
    pub learned_from: LearnedFrom,
}

impl PrefixRib {
    pub fn prefix(&self) -> Prefix {
        self.prefix
    }

    fn idx(&self, asn: Asn) -> Option<usize> {
        self.asns.binary_search(&asn).ok()
    }

    pub fn has_route(&self, asn: Asn) -> bool {
        self.idx(asn).is_some_and(|i| self.routes[i].is_some())
    }

    pub fn route_count(&self) -> usize {
        self.order.len()
    }

    /// The path `asn` selected, as received (origins hold their seed path).
    pub fn selected(&self, asn: Asn) -> Option<SelectedRoute> {
        let i = self.idx(asn)?;
        let r = self.routes[i]?;
        let path = match r.via {
            Via::Seed(s) => self.seeds[s as usize].clone(),
            Via::Neighbor(c) => self.advertised_at(c as usize),
        };
        Some(SelectedRoute {
            path,
            learned_from: r.learned_from,
        })
    }

    /// The path `asn` exports, i.e. what a collector peering with it records.
    pub fn advertised(&self, asn: Asn) -> Option<AsPath> {
        let i = self.idx(asn)?;
        self.routes[i]?;
        Some(self.advertised_at(i))
    }

    fn advertised_at(&self, mut i: usize) -> AsPath {
        let mut hops = Vec::with_capacity(self.routes[i].map_or(1, |r| r.len as usize + 1));
        loop {
            let r = self.routes[i].expect("next hops are always settled");
            match r.via {
                Via::Seed(s) => {
                    hops.extend_from_slice(self.seeds[s as usize].hops());
                    return AsPath::new(hops).expect("non-empty");
                }
                Via::Neighbor(c) => {
                    hops.push(self.asns[i]);
                    i = c as usize;
                }
            }
        }
    }

    /// For every node index, whether its selected path contains `asn`.
    /// Nodes without a route map to `false`.
    pub fn selected_contains(&self, asn: Asn) -> Vec<bool> {
        let n = self.routes.len();
        let mut adv = vec![false; n];
        let mut sel = vec![false; n];
        for &i in &self.order {
            let i = i as usize;
            let r = self.routes[i].expect("ordered nodes have routes");
            let s = match r.via {
                Via::Seed(s) => self.seeds[s as usize].hops()[1..].contains(&asn),
                Via::Neighbor(c) => adv[c as usize],
            };
            sel[i] = s;
            adv[i] = self.asns[i] == asn || s;
        }
        sel
    }
}

/// Per-prefix RIBs produced by one propagation.
#[derive(Debug, Clone, Default)]
pub struct RibState {
    ribs: BTreeMap<Prefix, PrefixRib>,
}

impl RibState {
    pub fn prefixes(&self) -> impl Iterator<Item = &Prefix> {
        self.ribs.keys()
    }

    pub fn get(&self, prefix: &Prefix) -> Option<&PrefixRib> {
        self.ribs.get(prefix)
    }

    pub fn iter(&self) -> impl Iterator<Item = &PrefixRib> {
        self.ribs.values()
    }

    pub fn selected(&self, asn: Asn, prefix: &Prefix) -> Option<SelectedRoute> {
        self.ribs.get(prefix)?.selected(asn)
    }
}

/// Propagates `announcements` to the stable state. Announcements for the
/// same prefix are merged into one multi-origin announcement.
pub fn propagate(graph: &AsGraph, announcements: &[Announcement]) -> Result<RibState, SimError> {
    propagate_filtered(graph, announcements, &ImportFilter::default())
}

pub fn propagate_filtered(
    graph: &AsGraph,
    announcements: &[Announcement],
    filter: &ImportFilter,
) -> Result<RibState, SimError> {
    let mut grouped: BTreeMap<Prefix, Vec<&Origination>> = BTreeMap::new();
    for a in announcements {
        grouped
            .entry(a.prefix)
            .or_default()
            .extend(a.origins.iter());
    }
    let mut filtering = vec![false; graph.node_count()];
    if !filter.is_empty() {
        for asn in &filter.filtering {
            let i = graph.index_of(*asn).ok_or(SimError::UnknownAs(*asn))?;
            filtering[i] = true;
        }
    }
    let mut ribs = BTreeMap::new();
    for (prefix, origins) in grouped {
        let rib = propagate_prefix(graph, prefix, &origins, &filtering, &filter.banned)?;
        ribs.insert(prefix, rib);
    }
    Ok(RibState { ribs })
}

struct Sweep<'a> {
    graph: &'a AsGraph,
    seeds: Vec<AsPath>,
    routes: Vec<Option<Route>>,
    order: Vec<u32>,
    filtering: &'a [bool],
    banned: &'a [Asn],
    tainted: Vec<bool>,
}

type Candidate = Reverse<(u32, u32, u32)>;

impl Sweep<'_> {
    fn adv_len(&self, i: usize) -> u32 {
        let r = self.routes[i].expect("settled");
        match r.via {
            Via::Seed(_) => r.len,
            Via::Neighbor(_) => r.len + 1,
        }
    }

    /// Whether `x` appears in the path that `from` advertises.
    fn in_path(&self, x: usize, mut from: usize) -> bool {
        let asn = self.graph.asn_at(x);
        loop {
            if from == x {
                return true;
            }
            match self.routes[from].expect("settled").via {
                Via::Seed(s) => return self.seeds[s as usize].contains(asn),
                Via::Neighbor(c) => from = c as usize,
            }
        }
    }

    fn accepts(&self, x: usize, from: usize) -> bool {
        !(self.filtering[x] && self.tainted[from]) && !self.in_path(x, from)
    }

    fn settle(&mut self, i: usize, learned_from: LearnedFrom, via: Via, len: u32) {
        debug_assert!(self.routes[i].is_none());
        self.routes[i] = Some(Route {
            learned_from,
            via,
            len,
        });
        self.order.push(i as u32);
        if !self.banned.is_empty() {
            let asn = self.graph.asn_at(i);
            self.tainted[i] = self.banned.contains(&asn)
                || match via {
                    Via::Seed(s) => self.seeds[s as usize]
                        .hops()
                        .iter()
                        .any(|a| self.banned.contains(a)),
                    Via::Neighbor(c) => self.tainted[c as usize],
                };
        }
    }

    fn push_up(&self, heap: &mut BinaryHeap<Candidate>, from: usize) {
        let len = self.adv_len(from);
        for &p in self.graph.provider_indices(from) {
            if self.routes[p].is_none() && self.accepts(p, from) {
                heap.push(Reverse((len, from as u32, p as u32)));
            }
        }
    }

    fn push_down(&self, heap: &mut BinaryHeap<Candidate>, from: usize) {
        let len = self.adv_len(from);
        for &c in self.graph.customer_indices(from) {
            if self.routes[c].is_none() && self.accepts(c, from) {
                heap.push(Reverse((len, from as u32, c as u32)));
            }
        }
    }

    fn drain(&mut self, heap: &mut BinaryHeap<Candidate>, class: LearnedFrom) {
        while let Some(Reverse((len, from, node))) = heap.pop() {
            let node = node as usize;
            if self.routes[node].is_some() {
                continue;
            }
            self.settle(node, class, Via::Neighbor(from), len);
            match class {
                LearnedFrom::Customer => self.push_up(heap, node),
                _ => self.push_down(heap, node),
            }
        }
    }
}

fn propagate_prefix(
    graph: &AsGraph,
    prefix: Prefix,
    origins: &[&Origination],
    filtering: &[bool],
    banned: &[Asn],
) -> Result<PrefixRib, SimError> {
    let n = graph.node_count();
    let mut sweep = Sweep {
        graph,
        seeds: origins.iter().map(|o| o.seed.clone()).collect(),
        routes: vec![None; n],
        order: Vec::new(),
        filtering,
        banned,
        tainted: vec![false; if banned.is_empty() { 0 } else { n }],
    };

    let mut heap = BinaryHeap::new();
    let mut origin_nodes = Vec::with_capacity(origins.len());
    for (s, o) in origins.iter().enumerate() {
        let i = graph.index_of(o.asn).ok_or(SimError::UnknownAs(o.asn))?;
        if sweep.routes[i].is_some() {
            return Err(SimError::DuplicateOrigin(o.asn, prefix));
        }
        sweep.settle(
            i,
            LearnedFrom::Origin,
            Via::Seed(s as u32),
            o.seed.len() as u32,
        );
        origin_nodes.push(i);
    }
    for &i in &origin_nodes {
        sweep.push_up(&mut heap, i);
    }
    sweep.drain(&mut heap, LearnedFrom::Customer);

    // Lateral hop: only origin/customer routes cross peer links, and peer
    // routes never travel further laterally, so decide all at once.
    let mut lateral = Vec::new();
    for x in 0..n {
        if sweep.routes[x].is_some() {
            continue;
        }
        let best = graph
            .peer_indices(x)
            .iter()
            .filter(|&&q| {
                matches!(
                    sweep.routes[q],
                    Some(Route {
                        learned_from: LearnedFrom::Origin | LearnedFrom::Customer,
                        ..
                    })
                ) && sweep.accepts(x, q)
            })
            .map(|&q| (sweep.adv_len(q), q))
            .min();
        if let Some((len, q)) = best {
            lateral.push((x, q, len));
        }
    }
    for (x, q, len) in lateral {
        sweep.settle(x, LearnedFrom::Peer, Via::Neighbor(q as u32), len);
    }

    let settled: Vec<u32> = sweep.order.clone();
    for i in settled {
        sweep.push_down(&mut heap, i as usize);
    }
    sweep.drain(&mut heap, LearnedFrom::Provider);

    Ok(PrefixRib {
        prefix,
        asns: graph.shared_asns(),
        seeds: sweep.seeds,
        routes: sweep.routes,
        order: sweep.order,
    })
}
