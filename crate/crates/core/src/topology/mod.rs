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

//! AS-relationship topology: CAIDA serial-1 ingest, the annotated AS graph
//! and monitor (route-collector peer) bookkeeping.

mod rankings;
pub mod synthetic;

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, BufReader, Read};
use std::sync::Arc;

use thiserror::Error;

use crate::types::{Asn, TypeError};

pub use rankings::{customer_cone, DegreeRankings};

/// Relationship annotation of an AS-relationship record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relationship {
    CustomerToProvider,
    PeerToPeer,
}

/// How a neighbor relates to a given AS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NeighborKind {
    Customer,
    Peer,
    Provider,
}

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("read error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: malformed record {content:?}")]
    Malformed { line: usize, content: String },
    #[error("line {line}: unknown relationship code {code}")]
    UnknownRelationship { line: usize, code: String },
    #[error("line {line}: self edge on {asn}")]
    SelfEdge { line: usize, asn: Asn },
    #[error("line {line}: duplicate edge {a}|{b}")]
    DuplicateEdge { line: usize, a: Asn, b: Asn },
    #[error("line {line}: conflicting relationship for {a}|{b}")]
    ConflictingEdge { line: usize, a: Asn, b: Asn },
    #[error("line {line}: {source}")]
    BadAsn { line: usize, source: TypeError },
    #[error("unknown AS {0}")]
    UnknownAs(Asn),
}

/// Accumulates relationships and rejects self, duplicate and conflicting
/// edges as they arrive.
#[derive(Debug, Default)]
pub struct AsGraphBuilder {
    nodes: BTreeSet<Asn>,
    // Keyed by (min, max); the value records who is the provider for c2p.
    edges: HashMap<(Asn, Asn), Edge>,
    order: Vec<(Asn, Asn)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Edge {
    ProviderCustomer { provider: Asn },
    Peer,
}

impl AsGraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, asn: Asn) -> &mut Self {
        self.nodes.insert(asn);
        self
    }

    pub fn add_provider_customer(
        &mut self,
        provider: Asn,
        customer: Asn,
    ) -> Result<&mut Self, TopologyError> {
        self.insert(0, provider, customer, Edge::ProviderCustomer { provider })
    }

    pub fn add_peers(&mut self, a: Asn, b: Asn) -> Result<&mut Self, TopologyError> {
        self.insert(0, a, b, Edge::Peer)
    }

    pub fn has_edge(&self, a: Asn, b: Asn) -> bool {
        self.edges.contains_key(&(a.min(b), a.max(b)))
    }

    fn insert(
        &mut self,
        line: usize,
        a: Asn,
        b: Asn,
        edge: Edge,
    ) -> Result<&mut Self, TopologyError> {
        if a == b {
            return Err(TopologyError::SelfEdge { line, asn: a });
        }
        let key = (a.min(b), a.max(b));
        if let Some(existing) = self.edges.get(&key) {
            return Err(if *existing == edge {
                TopologyError::DuplicateEdge { line, a, b }
            } else {
                TopologyError::ConflictingEdge { line, a, b }
            });
        }
        self.edges.insert(key, edge);
        self.order.push(key);
        self.nodes.insert(a);
        self.nodes.insert(b);
        Ok(self)
    }

    pub fn build(self) -> AsGraph {
        let asns: Vec<Asn> = self.nodes.into_iter().collect();
        let index: HashMap<Asn, usize> = asns.iter().enumerate().map(|(i, a)| (*a, i)).collect();
        let n = asns.len();
        let mut providers = vec![Vec::new(); n];
        let mut customers = vec![Vec::new(); n];
        let mut peers = vec![Vec::new(); n];
        for key in &self.order {
            let (a, b) = (index[&key.0], index[&key.1]);
            match self.edges[key] {
                Edge::Peer => {
                    peers[a].push(b);
                    peers[b].push(a);
                }
                Edge::ProviderCustomer { provider } => {
                    let (p, c) = if provider == key.0 { (a, b) } else { (b, a) };
                    providers[c].push(p);
                    customers[p].push(c);
                }
            }
        }
        for list in providers
            .iter_mut()
            .chain(customers.iter_mut())
            .chain(peers.iter_mut())
        {
            list.sort_unstable();
        }
        AsGraph {
            asns: asns.into(),
            index,
            providers,
            customers,
            peers,
            monitors: BTreeSet::new(),
            edge_count: self.order.len(),
        }
    }
}

/// Annotated AS-level topology.
///
/// Nodes are stored in ascending ASN order, so node indices sort the same
/// way as AS numbers. Immutable once built apart from the monitor set.
#[derive(Debug, Clone)]
pub struct AsGraph {
    asns: Arc<[Asn]>,
    index: HashMap<Asn, usize>,
    providers: Vec<Vec<usize>>,
    customers: Vec<Vec<usize>>,
    peers: Vec<Vec<usize>>,
    monitors: BTreeSet<Asn>,
    edge_count: usize,
}

impl AsGraph {
    pub fn builder() -> AsGraphBuilder {
        AsGraphBuilder::new()
    }

    pub fn node_count(&self) -> usize {
        self.asns.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn asns(&self) -> &[Asn] {
        &self.asns
    }

    /// Shared handle on the node list, cheap to clone into results.
    pub fn shared_asns(&self) -> Arc<[Asn]> {
        Arc::clone(&self.asns)
    }

    pub fn contains(&self, asn: Asn) -> bool {
        self.index.contains_key(&asn)
    }

    pub fn index_of(&self, asn: Asn) -> Option<usize> {
        self.index.get(&asn).copied()
    }

    pub fn asn_at(&self, idx: usize) -> Asn {
        self.asns[idx]
    }

    pub fn provider_indices(&self, idx: usize) -> &[usize] {
        &self.providers[idx]
    }

    pub fn customer_indices(&self, idx: usize) -> &[usize] {
        &self.customers[idx]
    }

    pub fn peer_indices(&self, idx: usize) -> &[usize] {
        &self.peers[idx]
    }

    fn map(&self, list: &[usize]) -> Vec<Asn> {
        list.iter().map(|&i| self.asns[i]).collect()
    }

    pub fn providers(&self, asn: Asn) -> Vec<Asn> {
        self.index_of(asn)
            .map(|i| self.map(&self.providers[i]))
            .unwrap_or_default()
    }

    pub fn customers(&self, asn: Asn) -> Vec<Asn> {
        self.index_of(asn)
            .map(|i| self.map(&self.customers[i]))
            .unwrap_or_default()
    }

    pub fn peers(&self, asn: Asn) -> Vec<Asn> {
        self.index_of(asn)
            .map(|i| self.map(&self.peers[i]))
            .unwrap_or_default()
    }

    /// All neighbors of `asn` in ascending ASN order.
    pub fn neighbors(&self, asn: Asn) -> Vec<Asn> {
        let mut all = self.providers(asn);
        all.extend(self.customers(asn));
        all.extend(self.peers(asn));
        all.sort_unstable();
        all
    }

    /// What `b` is to `a`, if they are adjacent.
    pub fn relationship(&self, a: Asn, b: Asn) -> Option<NeighborKind> {
        let (ia, ib) = (self.index_of(a)?, self.index_of(b)?);
        if self.providers[ia].binary_search(&ib).is_ok() {
            Some(NeighborKind::Provider)
        } else if self.customers[ia].binary_search(&ib).is_ok() {
            Some(NeighborKind::Customer)
        } else if self.peers[ia].binary_search(&ib).is_ok() {
            Some(NeighborKind::Peer)
        } else {
            None
        }
    }

    /// Replaces the monitor set. ASNs missing from the graph are skipped and
    /// their count returned.
    pub fn set_monitors(&mut self, asns: &[Asn]) -> usize {
        self.monitors.clear();
        let mut skipped = 0;
        for &asn in asns {
            if self.contains(asn) {
                self.monitors.insert(asn);
            } else {
                skipped += 1;
            }
        }
        skipped
    }

    /// Builder-style [`set_monitors`](Self::set_monitors).
    pub fn with_monitors(mut self, asns: &[Asn]) -> (Self, usize) {
        let skipped = self.set_monitors(asns);
        (self, skipped)
    }

    pub fn monitors(&self) -> &BTreeSet<Asn> {
        &self.monitors
    }

    pub fn is_monitor(&self, asn: Asn) -> bool {
        self.monitors.contains(&asn)
    }

    /// Full scan of the relationship-symmetry and simple-graph invariants.
    pub fn check_invariants(&self) -> Result<(), String> {
        for i in 0..self.node_count() {
            for &p in &self.providers[i] {
                if self.customers[p].binary_search(&i).is_err() {
                    return Err(format!(
                        "{} lists provider {} without reverse",
                        self.asns[i], self.asns[p]
                    ));
                }
            }
            for &c in &self.customers[i] {
                if self.providers[c].binary_search(&i).is_err() {
                    return Err(format!(
                        "{} lists customer {} without reverse",
                        self.asns[i], self.asns[c]
                    ));
                }
            }
            for &q in &self.peers[i] {
                if self.peers[q].binary_search(&i).is_err() {
                    return Err(format!(
                        "{} lists peer {} without reverse",
                        self.asns[i], self.asns[q]
                    ));
                }
            }
            let mut all: Vec<usize> = self.providers[i]
                .iter()
                .chain(&self.customers[i])
                .chain(&self.peers[i])
                .copied()
                .collect();
            if all.contains(&i) {
                return Err(format!("self edge on {}", self.asns[i]));
            }
            let before = all.len();
            all.sort_unstable();
            all.dedup();
            if all.len() != before {
                return Err(format!(
                    "{} has a neighbor with two relationships",
                    self.asns[i]
                ));
            }
        }
        Ok(())
    }
}

/// Parses a CAIDA serial-1 AS-relationship file (`asn1|asn2|rel`).
///
/// `rel = -1` makes asn1 the provider of asn2, `rel = 0` makes them peers.
/// A trailing fourth field (the serial-2 source tag) is tolerated and ignored.
pub fn parse_as_rel(source: impl Read) -> Result<AsGraph, TopologyError> {
    let mut builder = AsGraphBuilder::new();
    for (i, line) in BufReader::new(source).lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.trim_end_matches('\r').trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('|').collect();
        if fields.len() != 3 && fields.len() != 4 {
            return Err(TopologyError::Malformed {
                line: line_no,
                content: line.to_string(),
            });
        }
        let asn = |s: &str| {
            s.trim().parse::<Asn>().map_err(|source| match source {
                TypeError::MalformedAsn(_) => TopologyError::Malformed {
                    line: line_no,
                    content: line.to_string(),
                },
                source => TopologyError::BadAsn {
                    line: line_no,
                    source,
                },
            })
        };
        let (a, b) = (asn(fields[0])?, asn(fields[1])?);
        let edge = match fields[2].trim() {
            "-1" => Edge::ProviderCustomer { provider: a },
            "0" => Edge::Peer,
            other => {
                return Err(TopologyError::UnknownRelationship {
                    line: line_no,
                    code: other.to_string(),
                })
            }
        };
        builder.insert(line_no, a, b, edge)?;
    }
    Ok(builder.build())
}

/// Parses a monitor list: one ASN per line, `#` starts a comment.
pub fn parse_monitor_list(source: impl Read) -> Result<Vec<Asn>, TopologyError> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(source).lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let asn = body
            .parse::<Asn>()
            .map_err(|source| TopologyError::BadAsn {
                line: i + 1,
                source,
            })?;
        out.push(asn);
    }
    Ok(out)
}

/// Renders a graph back into serial-1 text, providers first then peers, in
/// ascending ASN order.
pub fn write_as_rel(graph: &AsGraph, mut out: impl std::io::Write) -> std::io::Result<()> {
    for i in 0..graph.node_count() {
        for &c in graph.customer_indices(i) {
            writeln!(out, "{}|{}|-1", graph.asn_at(i), graph.asn_at(c))?;
        }
    }
    for i in 0..graph.node_count() {
        for &p in graph.peer_indices(i) {
            if p > i {
                writeln!(out, "{}|{}|0", graph.asn_at(i), graph.asn_at(p))?;
            }
        }
    }
    Ok(())
}
