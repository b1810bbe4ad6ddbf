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

use rayon::prelude::*;

use super::AsGraph;
use crate::types::Asn;

/// Provider counts and customer-cone sizes for every AS, with descending
/// rankings (ties broken by ascending ASN).
#[derive(Debug, Clone)]
pub struct DegreeRankings {
    provider_count: Vec<usize>,
    cone_size: Vec<usize>,
    by_providers: Vec<Asn>,
    by_cone: Vec<Asn>,
    asns: Vec<Asn>,
}

impl DegreeRankings {
    pub fn compute(graph: &AsGraph) -> Self {
        let n = graph.node_count();
        let provider_count: Vec<usize> = (0..n).map(|i| graph.provider_indices(i).len()).collect();
        let cone_size: Vec<usize> = (0..n)
            .into_par_iter()
            .map_init(
                || (vec![u32::MAX; n], Vec::new()),
                |(seen, stack), root| cone_walk(graph, root, seen, stack, |_| ()),
            )
            .collect();
        let rank = |key: &[usize]| {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| key[b].cmp(&key[a]).then(a.cmp(&b)));
            order
                .into_iter()
                .map(|i| graph.asn_at(i))
                .collect::<Vec<_>>()
        };
        DegreeRankings {
            by_providers: rank(&provider_count),
            by_cone: rank(&cone_size),
            provider_count,
            cone_size,
            asns: graph.asns().to_vec(),
        }
    }

    fn idx(&self, asn: Asn) -> Option<usize> {
        self.asns.binary_search(&asn).ok()
    }

    pub fn provider_count(&self, asn: Asn) -> Option<usize> {
        self.idx(asn).map(|i| self.provider_count[i])
    }

    pub fn cone_size(&self, asn: Asn) -> Option<usize> {
        self.idx(asn).map(|i| self.cone_size[i])
    }

    pub fn by_providers(&self) -> &[Asn] {
        &self.by_providers
    }

    pub fn by_cone(&self) -> &[Asn] {
        &self.by_cone
    }

    /// The first `k` ASes by cone size, skipping `exclude`.
    pub fn top_cone(&self, k: usize, exclude: &[Asn]) -> Vec<Asn> {
        self.by_cone
            .iter()
            .filter(|a| !exclude.contains(a))
            .take(k)
            .copied()
            .collect()
    }

    pub fn top_providers(&self, k: usize, exclude: &[Asn]) -> Vec<Asn> {
        self.by_providers
            .iter()
            .filter(|a| !exclude.contains(a))
            .take(k)
            .copied()
            .collect()
    }
}

/// Customer cone of `root`: every AS reachable through provider-to-customer
/// edges, excluding `root` itself.
pub fn customer_cone(graph: &AsGraph, root: Asn) -> Vec<Asn> {
    let Some(r) = graph.index_of(root) else {
        return Vec::new();
    };
    let mut seen = vec![u32::MAX; graph.node_count()];
    let mut out = Vec::new();
    cone_walk(graph, r, &mut seen, &mut Vec::new(), |i| {
        out.push(graph.asn_at(i))
    });
    out.sort_unstable();
    out
}

fn cone_walk(
    graph: &AsGraph,
    root: usize,
    seen: &mut [u32],
    stack: &mut Vec<usize>,
    mut visit: impl FnMut(usize),
) -> usize {
    let stamp = root as u32;
    seen[root] = stamp;
    stack.clear();
    stack.push(root);
    let mut count = 0;
    while let Some(x) = stack.pop() {
        for &c in graph.customer_indices(x) {
            if seen[c] != stamp {
                seen[c] = stamp;
                count += 1;
                visit(c);
                stack.push(c);
            }
        }
    }
    count
}
