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

//! Directed AS-link history used by the new-link rules.

use std::collections::{HashMap, HashSet};

use crate::types::{AsPath, Asn, DirectedLink};

pub const DAY: u64 = 86_400;
/// Ten 30-day months.
pub const DEFAULT_RETENTION: u64 = 300 * DAY;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    Monitor,
    LocalRouter,
}

/// History of one directed link.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkRecord {
    pub first_seen: u64,
    pub last_seen: u64,
    /// Intersection, over every observed path carrying this link, of the
    /// ASes left of the link. Sorted.
    pub common_left: Vec<Asn>,
}

#[derive(Debug, Clone, Default)]
pub struct LinkHistory {
    links: HashMap<DirectedLink, LinkRecord>,
}

impl LinkHistory {
    pub fn get(&self, link: &DirectedLink) -> Option<&LinkRecord> {
        self.links.get(link)
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    fn observe(&mut self, path: &[Asn], ts: u64) {
        for i in 0..path.len().saturating_sub(1) {
            let link = DirectedLink {
                from: path[i],
                to: path[i + 1],
            };
            match self.links.get_mut(&link) {
                Some(rec) => {
                    rec.first_seen = rec.first_seen.min(ts);
                    rec.last_seen = rec.last_seen.max(ts);
                    if !rec.common_left.is_empty() {
                        let left = &path[..i];
                        rec.common_left.retain(|a| left.contains(a));
                    }
                }
                None => {
                    let mut left = path[..i].to_vec();
                    left.sort_unstable();
                    self.links.insert(
                        link,
                        LinkRecord {
                            first_seen: ts,
                            last_seen: ts,
                            common_left: left,
                        },
                    );
                }
            }
        }
    }

    fn expire(&mut self, cutoff: u64) -> usize {
        let before = self.links.len();
        self.links.retain(|_, r| r.last_seen >= cutoff);
        before - self.links.len()
    }
}

/// Verified links plus monitor- and local-router-observed history.
#[derive(Debug, Clone)]
pub struct LinkStores {
    pub verified: HashSet<DirectedLink>,
    pub monitor_history: LinkHistory,
    pub local_history: LinkHistory,
    pub retention: u64,
}

impl Default for LinkStores {
    fn default() -> Self {
        LinkStores {
            verified: HashSet::new(),
            monitor_history: LinkHistory::default(),
            local_history: LinkHistory::default(),
            retention: DEFAULT_RETENTION,
        }
    }
}

impl LinkStores {
    pub fn with_verified(links: impl IntoIterator<Item = DirectedLink>) -> Self {
        LinkStores {
            verified: links.into_iter().collect(),
            ..Default::default()
        }
    }

    pub fn is_verified(&self, link: &DirectedLink) -> bool {
        self.verified.contains(link)
    }

    pub fn verify(&mut self, link: DirectedLink) {
        self.verified.insert(link);
    }

    pub fn revoke(&mut self, link: &DirectedLink) -> bool {
        self.verified.remove(link)
    }

    /// Whether `link` has been seen by either history.
    pub fn observed(&self, link: &DirectedLink) -> bool {
        self.monitor_history.get(link).is_some() || self.local_history.get(link).is_some()
    }

    /// Latest sighting of `link` in either history.
    pub fn last_seen(&self, link: &DirectedLink) -> Option<u64> {
        let m = self.monitor_history.get(link).map(|r| r.last_seen);
        let l = self.local_history.get(link).map(|r| r.last_seen);
        m.max(l)
    }

    /// ASes left of `link` in every stored path that carries it. `None` when
    /// the link was never observed.
    pub fn common_left(&self, link: &DirectedLink) -> Option<Vec<Asn>> {
        match (self.monitor_history.get(link), self.local_history.get(link)) {
            (None, None) => None,
            (Some(r), None) | (None, Some(r)) => Some(r.common_left.clone()),
            (Some(a), Some(b)) => Some(
                a.common_left
                    .iter()
                    .filter(|x| b.common_left.binary_search(x).is_ok())
                    .copied()
                    .collect(),
            ),
        }
    }

    /// Records every link of an announced path. Paths with loops are
    /// dropped whole; returns whether the path was recorded.
    pub fn ingest(&mut self, path: &AsPath, ts: u64, source: Source) -> bool {
        let path = path.collapse_prepending();
        if path.has_loop() {
            return false;
        }
        match source {
            Source::Monitor => self.monitor_history.observe(path.hops(), ts),
            Source::LocalRouter => self.local_history.observe(path.hops(), ts),
        }
        true
    }

    /// Drops history entries last seen before `now - retention`. Verified
    /// links never expire. Returns the number of entries removed.
    pub fn expire(&mut self, now: u64) -> usize {
        let cutoff = now.saturating_sub(self.retention);
        self.monitor_history.expire(cutoff) + self.local_history.expire(cutoff)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(v: &[u32]) -> AsPath {
        AsPath::from_u32s(v).unwrap()
    }

    fn link(a: u32, b: u32) -> DirectedLink {
        DirectedLink::new(Asn::new(a).unwrap(), Asn::new(b).unwrap()).unwrap()
    }

    #[test]
    fn looped_paths_leave_no_trace() {
        let mut s = LinkStores::default();
        assert!(!s.ingest(&path(&[1, 2, 1]), 10, Source::Monitor));
        assert!(s.monitor_history.is_empty());
    }

    #[test]
    fn records_links_and_advances_last_seen() {
        let mut s = LinkStores::default();
        s.ingest(&path(&[5, 4, 3]), 10, Source::Monitor);
        assert!(s.observed(&link(5, 4)));
        assert!(s.observed(&link(4, 3)));
        assert!(!s.observed(&link(4, 5)));
        s.ingest(&path(&[5, 4, 3]), 20, Source::Monitor);
        let r = s.monitor_history.get(&link(4, 3)).unwrap();
        assert_eq!((r.first_seen, r.last_seen), (10, 20));
    }

    #[test]
    fn prepending_collapsed_before_loop_check() {
        let mut s = LinkStores::default();
        assert!(s.ingest(&path(&[5, 4, 4, 4, 3]), 1, Source::LocalRouter));
        assert!(s.local_history.get(&link(4, 3)).is_some());
        assert_eq!(s.local_history.len(), 2);
    }

    #[test]
    fn left_sets_intersect() {
        let mut s = LinkStores::default();
        s.ingest(&path(&[9, 8, 2, 1]), 1, Source::Monitor);
        s.ingest(&path(&[7, 8, 2, 1]), 2, Source::Monitor);
        assert_eq!(s.common_left(&link(2, 1)), Some(vec![Asn::new(8).unwrap()]));
        s.ingest(&path(&[6, 8, 2, 1]), 3, Source::LocalRouter);
        assert_eq!(s.common_left(&link(2, 1)), Some(vec![Asn::new(8).unwrap()]));
        s.ingest(&path(&[6, 2, 1]), 4, Source::LocalRouter);
        assert_eq!(s.common_left(&link(2, 1)), Some(vec![]));
        assert_eq!(s.common_left(&link(3, 1)), None);
    }

    #[test]
    fn retention_window() {
        let mut s = LinkStores::with_verified([link(1, 2)]);
        let now = 1_000 * DAY;
        s.ingest(&path(&[3, 4]), now - 301 * DAY, Source::Monitor);
        s.ingest(&path(&[5, 6]), now - 299 * DAY, Source::Monitor);
        s.ingest(&path(&[7, 8]), now - 301 * DAY, Source::LocalRouter);
        let verified_before = s.verified.clone();
        assert_eq!(s.expire(now), 2);
        assert!(!s.observed(&link(3, 4)));
        assert!(s.observed(&link(5, 6)));
        assert!(!s.observed(&link(7, 8)));
        assert_eq!(s.verified, verified_before);
    }
}
