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

//! Per-monitor recovery delays observed in an update stream.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::feeds::{FeedError, FeedSource};
use crate::types::{longest_match_any, Asn, Prefix, UpdateKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoveryContext {
    pub victim_prefix: Prefix,
    /// Legitimate origins plus any mitigators.
    pub authorized: BTreeSet<Asn>,
    /// Pollution observed before this time is ignored.
    pub since: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryReport {
    /// Seconds from pollution to the first fully legitimate view, per monitor.
    pub delays: BTreeMap<Asn, u64>,
    pub median: Option<f64>,
    pub max: Option<u64>,
    pub unrecovered: Vec<Asn>,
}

#[derive(Default)]
struct MonitorView {
    routes: Vec<(Prefix, Asn)>,
    polluted_at: Option<u64>,
    recovered_at: Option<u64>,
}

/// A monitor counts as polluted while any address of the victim prefix is
/// forwarded (longest match) towards an unauthorized origin, and as
/// recovered the first time afterwards that every covered address is
/// forwarded towards an authorized one.
pub fn track_recovery(
    mut feed: impl FeedSource,
    ctx: &RecoveryContext,
) -> Result<RecoveryReport, FeedError> {
    let mut views: BTreeMap<Asn, MonitorView> = BTreeMap::new();
    while let Some(u) = feed.next_update() {
        let u = u?;
        if !u.prefix.overlaps(&ctx.victim_prefix) {
            continue;
        }
        let view = views.entry(u.monitor).or_default();
        view.routes.retain(|(p, _)| *p != u.prefix);
        if let UpdateKind::Announcement(path) = &u.kind {
            view.routes.push((u.prefix, path.origin()));
        }
        if ctx.since.is_some_and(|s| u.timestamp < s) {
            continue;
        }
        let bad = longest_match_any(&ctx.victim_prefix, &view.routes, |o| {
            !ctx.authorized.contains(o)
        });
        match (view.polluted_at, view.recovered_at) {
            (None, _) if bad => view.polluted_at = Some(u.timestamp),
            (Some(_), None) if !bad && !view.routes.is_empty() => {
                view.recovered_at = Some(u.timestamp)
            }
            _ => {}
        }
    }
    let mut delays = BTreeMap::new();
    let mut unrecovered = Vec::new();
    for (m, v) in &views {
        match (v.polluted_at, v.recovered_at) {
            (Some(p), Some(r)) => {
                delays.insert(*m, r - p);
            }
            (Some(_), None) => unrecovered.push(*m),
            _ => {}
        }
    }
    let mut sorted: Vec<u64> = delays.values().copied().collect();
    sorted.sort_unstable();
    let median = match sorted.len() {
        0 => None,
        n if n % 2 == 1 => Some(sorted[n / 2] as f64),
        n => Some((sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0),
    };
    Ok(RecoveryReport {
        delays,
        median,
        max: sorted.last().copied(),
        unrecovered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feeds::VecFeed;
    use crate::types::{AsPath, BgpUpdate};

    fn asn(v: u32) -> Asn {
        Asn::new(v).unwrap()
    }

    fn ann(ts: u64, monitor: u32, prefix: &str, path: &[u32]) -> BgpUpdate {
        BgpUpdate::announce(
            ts,
            asn(monitor),
            prefix.parse().unwrap(),
            AsPath::from_u32s(path).unwrap(),
        )
    }

    fn ctx(prefix: &str) -> RecoveryContext {
        RecoveryContext {
            victim_prefix: prefix.parse().unwrap(),
            authorized: BTreeSet::from([asn(1), asn(50)]),
            since: None,
        }
    }

    #[test]
    fn delay_is_a_subtraction() {
        let feed = VecFeed::new(
            "f",
            vec![
                ann(50, 7, "10.0.0.0/24", &[7, 3, 1]),
                ann(100, 7, "10.0.0.0/24", &[7, 9]),
                ann(130, 7, "10.0.0.0/24", &[7, 4, 50]),
            ],
        );
        let r = track_recovery(feed, &ctx("10.0.0.0/24")).unwrap();
        assert_eq!(r.delays[&asn(7)], 30);
        assert_eq!(r.median, Some(30.0));
        assert!(r.unrecovered.is_empty());
    }

    #[test]
    fn never_recovers() {
        let feed = VecFeed::new("f", vec![ann(100, 7, "10.0.0.0/23", &[7, 9])]);
        let r = track_recovery(feed, &ctx("10.0.0.0/23")).unwrap();
        assert!(r.delays.is_empty());
        assert_eq!(r.unrecovered, vec![asn(7)]);
        assert_eq!(r.median, None);
    }

    #[test]
    fn deaggregation_needs_both_halves() {
        let feed = VecFeed::new(
            "f",
            vec![
                ann(100, 7, "10.0.0.0/23", &[7, 9]),
                ann(140, 7, "10.0.0.0/24", &[7, 3, 1]),
                ann(150, 7, "10.0.1.0/24", &[7, 3, 1]),
            ],
        );
        let r = track_recovery(feed, &ctx("10.0.0.0/23")).unwrap();
        assert_eq!(r.delays[&asn(7)], 50);
    }

    #[test]
    fn subprefix_pollution_and_withdrawal() {
        let feed = VecFeed::new(
            "f",
            vec![
                ann(10, 7, "10.0.0.0/23", &[7, 3, 1]),
                ann(100, 7, "10.0.1.0/24", &[7, 9]),
                BgpUpdate::withdraw(160, asn(7), "10.0.1.0/24".parse().unwrap()),
            ],
        );
        let r = track_recovery(feed, &ctx("10.0.0.0/23")).unwrap();
        assert_eq!(r.delays[&asn(7)], 60);
    }
}
