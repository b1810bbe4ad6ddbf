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

//! Control-plane hijack detection against operator ground truth and
//! AS-link history.

mod config;
mod engine;
mod stores;

use std::collections::BTreeSet;

use serde::Serialize;
use sha2::{Digest, Sha256};

pub use config::{AnnouncedPrefix, ConfigError, DetectionConfig, Placement};
pub use engine::{AlertSink, Engine, EngineParams, JsonLinesSink, PendingEvent};
pub use stores::{LinkHistory, LinkRecord, LinkStores, Source, DAY, DEFAULT_RETENTION};

use crate::feeds::UpdateRecord;
use crate::types::{AsPath, Asn, BgpUpdate, DirectedLink, HijackClass, PathDim, Prefix, PrefixDim};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Confidence {
    Certain,
    Stage1Suspicious,
    Stage2Confirmed,
}

impl Confidence {
    pub fn label(self) -> &'static str {
        match self {
            Confidence::Certain => "certain",
            Confidence::Stage1Suspicious => "stage1-suspicious",
            Confidence::Stage2Confirmed => "stage2-confirmed",
        }
    }
}

/// Outcome of the new-link rules, least suspicious first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage1Verdict {
    Legitimate,
    SuspiciousRule2,
    SuspiciousRule1,
}

/// What a single update revealed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub prefix: Prefix,
    pub class: HijackClass,
    pub confidence: Confidence,
    pub offending: BTreeSet<Asn>,
    /// The new link a Type-N finding hinges on.
    pub link: Option<DirectedLink>,
    pub rule: Option<Stage1Verdict>,
    /// ASes left of the link in the triggering path.
    pub left_of_link: Vec<Asn>,
    /// Several unverified links were present, so N is a best guess.
    pub type_uncertain: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    NotMine,
    /// Withdrawals and looped paths carry nothing to judge.
    Ignored,
    /// `promote` lists new links cleared by the left-AS rule.
    Legitimate {
        promote: Vec<DirectedLink>,
    },
    Alert(Finding),
    Pending(Finding),
}

/// Judges one new link `from -> to` found in `path` at two or more hops from
/// the origin.
pub fn stage1_filter(stores: &LinkStores, path: &AsPath, link: DirectedLink) -> Stage1Verdict {
    let reverse = link.reversed();
    let Some(old_left) = stores.common_left(&reverse) else {
        return Stage1Verdict::SuspiciousRule1;
    };
    if old_left.is_empty() {
        return Stage1Verdict::Legitimate;
    }
    let hops = path.hops();
    let new_left = match hops.iter().position(|a| *a == link.from) {
        Some(i) => &hops[..i],
        None => &[],
    };
    if new_left.iter().any(|a| old_left.binary_search(a).is_ok()) {
        Stage1Verdict::SuspiciousRule2
    } else {
        Stage1Verdict::Legitimate
    }
}

fn certain(prefix: Prefix, prefix_dim: PrefixDim, path_dim: PathDim, offending: Asn) -> Verdict {
    Verdict::Alert(Finding {
        prefix,
        class: HijackClass::new(prefix_dim, path_dim),
        confidence: Confidence::Certain,
        offending: BTreeSet::from([offending]),
        link: None,
        rule: None,
        left_of_link: Vec::new(),
        type_uncertain: false,
    })
}

/// Classifies an update. Pure: any store changes the verdict implies are
/// left to the caller.
pub fn check_update(config: &DetectionConfig, stores: &LinkStores, update: &BgpUpdate) -> Verdict {
    let placement = config.place(&update.prefix);
    if placement == Placement::NotMine {
        return Verdict::NotMine;
    }
    let Some(path) = update.path() else {
        return Verdict::Ignored;
    };
    let path = path.collapse_prepending();
    if path.has_loop() {
        return Verdict::Ignored;
    }
    let origin = path.origin();
    let announced = match placement {
        Placement::NotMine => unreachable!("handled above"),
        Placement::InsideAnnounced(_) => {
            return certain(
                update.prefix,
                PrefixDim::SubPrefix,
                PathDim::TypeN(0),
                origin,
            );
        }
        Placement::Unannounced => {
            return certain(
                update.prefix,
                PrefixDim::Squatting,
                PathDim::TypeN(0),
                origin,
            );
        }
        Placement::Exact(a) => a,
    };
    if announced.delegates.contains(&origin) {
        return Verdict::Legitimate {
            promote: Vec::new(),
        };
    }
    if !announced.origins.contains(&origin) {
        return certain(
            update.prefix,
            PrefixDim::ExactPrefix,
            PathDim::TypeN(0),
            origin,
        );
    }
    if let Some(neighbor) = path.origin_neighbor() {
        if !announced.neighbors.contains(&neighbor) {
            return certain(
                update.prefix,
                PrefixDim::ExactPrefix,
                PathDim::TypeN(1),
                neighbor,
            );
        }
    }

    let hops = path.hops();
    let k = hops.len();
    let mut promote = Vec::new();
    let mut unverified = 0usize;
    // (verdict, position of the link's right end)
    let mut worst: Option<(Stage1Verdict, usize)> = None;
    for j in (1..k.saturating_sub(1)).rev() {
        let link = DirectedLink {
            from: hops[j - 1],
            to: hops[j],
        };
        if stores.is_verified(&link) {
            continue;
        }
        unverified += 1;
        match stage1_filter(stores, &path, link) {
            Stage1Verdict::Legitimate => promote.push(link),
            v => {
                if worst.is_none_or(|(w, _)| v > w) {
                    worst = Some((v, j));
                }
            }
        }
    }
    let Some((rule, j)) = worst else {
        return Verdict::Legitimate { promote };
    };
    let link = DirectedLink {
        from: hops[j - 1],
        to: hops[j],
    };
    let n = (k - j) as u8;
    Verdict::Pending(Finding {
        prefix: update.prefix,
        class: HijackClass::new(PrefixDim::ExactPrefix, PathDim::TypeN(n)),
        confidence: Confidence::Stage1Suspicious,
        offending: BTreeSet::from([link.from]),
        link: Some(link),
        rule: Some(rule),
        left_of_link: hops[..j - 1].to_vec(),
        type_uncertain: unverified > 1,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stage2Outcome {
    Confirmed {
        polluted_monitors: usize,
    },
    /// The reverse link showed up during the window.
    ReverseObserved,
    BelowThreshold {
        polluted_monitors: usize,
    },
}

/// Resolves a pending event once its window has closed.
pub fn stage2_evaluate(
    stores: &LinkStores,
    pending: &PendingEvent,
    threshold: usize,
    now: u64,
) -> Stage2Outcome {
    debug_assert!(now >= pending.deadline);
    let reverse = pending.link.reversed();
    if stores
        .last_seen(&reverse)
        .is_some_and(|t| t >= pending.opened_at)
    {
        return Stage2Outcome::ReverseObserved;
    }
    let polluted_monitors = pending.monitors.len();
    if polluted_monitors < threshold {
        Stage2Outcome::BelowThreshold { polluted_monitors }
    } else {
        Stage2Outcome::Confirmed { polluted_monitors }
    }
}

/// A detection verdict ready for reporting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alert {
    pub event_id: String,
    pub prefix: Prefix,
    pub class: HijackClass,
    pub confidence: Confidence,
    pub offending: BTreeSet<Asn>,
    pub polluted_monitors: usize,
    pub first_update: BgpUpdate,
    pub detected_at: u64,
    pub link: Option<DirectedLink>,
    pub type_uncertain: bool,
}

#[derive(Serialize)]
struct AlertRecord<'a> {
    event_id: &'a str,
    ts: u64,
    prefix: String,
    prefix_dim: &'static str,
    path_type: String,
    confidence: &'static str,
    offending: Vec<u32>,
    monitors: usize,
    trigger_update: UpdateRecord,
}

impl Alert {
    pub fn from_finding(
        finding: &Finding,
        update: &BgpUpdate,
        polluted_monitors: usize,
        detected_at: u64,
    ) -> Self {
        Alert {
            event_id: event_id(finding, update),
            prefix: finding.prefix,
            class: finding.class,
            confidence: finding.confidence,
            offending: finding.offending.clone(),
            polluted_monitors,
            first_update: update.clone(),
            detected_at,
            link: finding.link,
            type_uncertain: finding.type_uncertain,
        }
    }

    /// One-line JSON log record.
    pub fn to_json(&self) -> String {
        let rec = AlertRecord {
            event_id: &self.event_id,
            ts: self.detected_at,
            prefix: self.prefix.to_string(),
            prefix_dim: self.class.prefix_dim.label(),
            path_type: self.class.path_dim.label(),
            confidence: self.confidence.label(),
            offending: self.offending.iter().map(|a| a.value()).collect(),
            monitors: self.polluted_monitors,
            trigger_update: UpdateRecord::from_update(&self.first_update),
        };
        serde_json::to_string(&rec).expect("alert records serialize")
    }
}

/// Stable identifier derived from what was detected and the update that
/// first revealed it.
fn event_id(finding: &Finding, update: &BgpUpdate) -> String {
    let mut h = Sha256::new();
    h.update(finding.prefix.to_string());
    h.update(b"|");
    h.update(finding.class.prefix_dim.label());
    h.update(b"|");
    h.update(finding.class.path_dim.label());
    for a in &finding.offending {
        h.update(b"|");
        h.update(a.to_string());
    }
    if let Some(l) = finding.link {
        h.update(format!("|{}>{}", l.from, l.to));
    }
    h.update(b"|");
    h.update(crate::feeds::to_line(update));
    let digest = h.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn asn(v: u32) -> Asn {
        Asn::new(v).unwrap()
    }

    fn path(v: &[u32]) -> AsPath {
        AsPath::from_u32s(v).unwrap()
    }

    fn link(a: u32, b: u32) -> DirectedLink {
        DirectedLink::new(asn(a), asn(b)).unwrap()
    }

    fn config() -> DetectionConfig {
        DetectionConfig::parse(
            "owned = [\"10.0.0.0/22\"]\n[announced.\"10.0.0.0/23\"]\norigins = [1]\nneighbors = [2, 3]\n",
        )
        .unwrap()
    }

    fn ann(prefix: &str, p: &[u32]) -> BgpUpdate {
        BgpUpdate::announce(100, asn(p[0]), prefix.parse().unwrap(), path(p))
    }

    fn finding(v: Verdict) -> Finding {
        match v {
            Verdict::Alert(f) | Verdict::Pending(f) => f,
            other => panic!("expected a finding, got {other:?}"),
        }
    }

    #[test]
    fn subprefix_and_squatting() {
        let s = LinkStores::default();
        let f = finding(check_update(&config(), &s, &ann("10.0.0.0/24", &[9, 2, 1])));
        assert_eq!(f.class.prefix_dim, PrefixDim::SubPrefix);
        assert_eq!(f.confidence, Confidence::Certain);
        let f = finding(check_update(&config(), &s, &ann("10.0.3.0/24", &[9, 2, 1])));
        assert_eq!(f.class.prefix_dim, PrefixDim::Squatting);
        assert_eq!(
            check_update(&config(), &s, &ann("10.9.0.0/24", &[9, 1])),
            Verdict::NotMine
        );
    }

    #[test]
    fn type0_and_type1() {
        let s = LinkStores::default();
        let f = finding(check_update(&config(), &s, &ann("10.0.0.0/23", &[9, 7, 2])));
        assert_eq!(f.class, HijackClass::exact(0));
        assert_eq!(f.offending, BTreeSet::from([asn(2)]));
        let f = finding(check_update(&config(), &s, &ann("10.0.0.0/23", &[9, 7, 1])));
        assert_eq!(f.class, HijackClass::exact(1));
        assert_eq!(f.offending, BTreeSet::from([asn(7)]));
        assert_eq!(f.confidence, Confidence::Certain);
    }

    #[test]
    fn legitimate_when_everything_verified() {
        let s = LinkStores::with_verified([link(9, 8), link(8, 2)]);
        assert_eq!(
            check_update(&config(), &s, &ann("10.0.0.0/23", &[9, 8, 2, 1])),
            Verdict::Legitimate { promote: vec![] }
        );
        // Origin-only and one-hop paths have nothing to check past the neighbor.
        assert!(matches!(
            check_update(&config(), &s, &ann("10.0.0.0/23", &[1])),
            Verdict::Legitimate { .. }
        ));
    }

    #[test]
    fn prepending_is_collapsed() {
        let s = LinkStores::with_verified([link(9, 2)]);
        assert!(matches!(
            check_update(&config(), &s, &ann("10.0.0.0/23", &[9, 9, 2, 2, 1, 1])),
            Verdict::Legitimate { .. }
        ));
    }

    #[test]
    fn rule1_when_reverse_never_seen() {
        let s = LinkStores::with_verified([link(9, 5)]);
        let f = finding(check_update(
            &config(),
            &s,
            &ann("10.0.0.0/23", &[9, 5, 2, 1]),
        ));
        assert_eq!(f.rule, Some(Stage1Verdict::SuspiciousRule1));
        assert_eq!(f.link, Some(link(5, 2)));
        assert_eq!(f.class.path_dim, PathDim::TypeN(2));
        assert_eq!(f.left_of_link, vec![asn(9)]);
        assert!(!f.type_uncertain);
    }

    #[test]
    fn rule2_common_left_as() {
        // The hijacker 7 announced both directions of the fake 5-6 link.
        let mut s = LinkStores::default();
        s.ingest(&path(&[10, 7, 6, 5, 40]), 1, Source::Monitor);
        s.ingest(&path(&[11, 7, 6, 5, 41]), 2, Source::Monitor);
        let p = path(&[12, 7, 5, 6, 2, 1]);
        assert_eq!(
            stage1_filter(&s, &p, link(5, 6)),
            Stage1Verdict::SuspiciousRule2
        );
    }

    #[test]
    fn rule2_disjoint_left_sets_are_legitimate() {
        let mut s = LinkStores::default();
        s.ingest(&path(&[10, 6, 5, 40]), 1, Source::Monitor);
        s.ingest(&path(&[11, 6, 5, 41]), 2, Source::Monitor);
        let p = path(&[10, 5, 6, 2, 1]);
        assert_eq!(stage1_filter(&s, &p, link(5, 6)), Stage1Verdict::Legitimate);
        let v = check_update(&config(), &s, &ann("10.0.0.0/23", &[10, 5, 6, 2, 1]));
        // 6->2 is still unverified with no reverse: Rule 1 dominates.
        let f = finding(v);
        assert_eq!(f.rule, Some(Stage1Verdict::SuspiciousRule1));
        assert_eq!(f.link, Some(link(6, 2)));
        assert!(f.type_uncertain);
    }

    #[test]
    fn rule2_left_set_nonempty_but_disjoint_from_new() {
        let mut s = LinkStores::default();
        s.ingest(&path(&[10, 7, 6, 5, 40]), 1, Source::Monitor);
        s.ingest(&path(&[11, 7, 6, 5, 41]), 2, Source::Monitor);
        let p = path(&[12, 8, 5, 6, 2, 1]);
        assert_eq!(stage1_filter(&s, &p, link(5, 6)), Stage1Verdict::Legitimate);
    }

    #[test]
    fn promotion_list_reported() {
        let mut s = LinkStores::with_verified([link(6, 2), link(10, 5)]);
        s.ingest(&path(&[10, 6, 5, 40]), 1, Source::Monitor);
        s.ingest(&path(&[11, 6, 5, 41]), 2, Source::Monitor);
        assert_eq!(
            check_update(&config(), &s, &ann("10.0.0.0/23", &[10, 5, 6, 2, 1])),
            Verdict::Legitimate {
                promote: vec![link(5, 6)]
            }
        );
    }

    #[test]
    fn stage2_outcomes() {
        let mut s = LinkStores::default();
        let mut p = PendingEvent::new(link(5, 2), vec![asn(9)], 1000, 300);
        p.monitors.insert(asn(9));
        assert_eq!(
            stage2_evaluate(&s, &p, 2, 1300),
            Stage2Outcome::BelowThreshold {
                polluted_monitors: 1
            }
        );
        for m in [10, 11, 12, 13] {
            p.monitors.insert(asn(m));
        }
        assert_eq!(
            stage2_evaluate(&s, &p, 2, 1300),
            Stage2Outcome::Confirmed {
                polluted_monitors: 5
            }
        );
        s.ingest(&path(&[8, 2, 5, 4]), 1299, Source::Monitor);
        assert_eq!(
            stage2_evaluate(&s, &p, 2, 1300),
            Stage2Outcome::ReverseObserved
        );
    }

    #[test]
    fn alert_json_shape() {
        let u = ann("10.0.0.0/23", &[9, 7, 2]);
        let f = finding(check_update(&config(), &LinkStores::default(), &u));
        let a = Alert::from_finding(&f, &u, 1, 100);
        let json = a.to_json();
        assert!(json.starts_with(&format!(
            r#"{{"event_id":"{}","ts":100,"prefix":"10.0.0.0/23","prefix_dim":"exact","path_type":"0","confidence":"certain","offending":[2],"monitors":1,"trigger_update":{{"ts":100"#,
            a.event_id
        )));
        assert_eq!(a.event_id.len(), 16);
        assert_eq!(a.event_id, Alert::from_finding(&f, &u, 1, 100).event_id);
    }

    proptest! {
        // Any update consistent with the configuration is legitimate.
        #[test]
        fn no_false_positives(
            origin_pick in 0usize..2,
            neighbor_pick in 0usize..3,
            upstream in proptest::collection::vec(100u32..10_000, 0..6),
            monitor_known in any::<bool>(),
        ) {
            let origins = [1u32, 4];
            let neighbors = [2u32, 3, 5];
            let cfg = DetectionConfig::parse(
                "owned = [\"10.0.0.0/22\"]\n[announced.\"10.0.0.0/23\"]\norigins = [1, 4]\nneighbors = [2, 3, 5]\n",
            ).unwrap();
            let mut hops: Vec<u32> = upstream;
            hops.dedup();
            hops.push(neighbors[neighbor_pick]);
            hops.push(origins[origin_pick]);
            let p = path(&hops);
            prop_assume!(!p.has_loop());
            let stores = LinkStores::with_verified(p.links().unwrap());
            let mut u = ann("10.0.0.0/23", &hops);
            if !monitor_known {
                u.monitor = asn(65000);
            }
            let v = check_update(&cfg, &stores, &u);
            prop_assert!(matches!(v, Verdict::Legitimate { .. }), "{:?}", v);
        }
    }
}
