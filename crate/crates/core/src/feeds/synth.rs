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

//! Synthetic replay feeds derived from simulated hijacks.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::record::to_line;
use crate::sim::SimOutcome;
use crate::types::{Asn, BgpUpdate, Prefix};

/// Gap between the legitimate announcements and the hijack.
pub const HIJACK_LEAD: u64 = 1200;

/// Sidecar describing how a synthetic feed was made.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthManifest {
    pub victim: Asn,
    pub hijacker: Asn,
    pub victim_prefix: Prefix,
    pub hijacked_prefix: Prefix,
    pub prefix_dim: String,
    pub path_type: String,
    /// Timestamp of the hijacker's announcement.
    pub hijack_ts: u64,
    pub jitter: (u64, u64),
    pub seed: u64,
    pub polluted_monitors: Vec<Asn>,
    /// Smallest delay drawn for a polluted monitor.
    pub min_jitter: Option<u64>,
    /// Phase start, for mitigation feeds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mitigation_ts: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mitigators: Vec<Asn>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthFeed {
    pub updates: Vec<BgpUpdate>,
    pub manifest: SynthManifest,
}

/// Announcements `monitor` would export for every simulated prefix that
/// overlaps `target`.
fn monitor_view(
    outcome_rib: &crate::sim::RibState,
    monitor: Asn,
    target: &Prefix,
    ts: u64,
) -> Vec<BgpUpdate> {
    outcome_rib
        .iter()
        .filter(|r| r.prefix().overlaps(target))
        .filter_map(|r| {
            r.advertised(monitor)
                .map(|p| BgpUpdate::announce(ts, monitor, r.prefix(), p))
        })
        .collect()
}

fn jitter_draw(rng: &mut ChaCha8Rng, jitter: (u64, u64)) -> u64 {
    rng.gen_range(jitter.0..=jitter.1)
}

fn sort(updates: &mut [BgpUpdate]) {
    updates.sort_by(|a, b| {
        (a.timestamp, a.monitor, a.prefix).cmp(&(b.timestamp, b.monitor, b.prefix))
    });
}

/// Legitimate routes seen by every monitor at `base_ts - HIJACK_LEAD`, then
/// one hijack-phase announcement per polluted monitor at `base_ts` plus a
/// uniform delay from `jitter` (inclusive, seconds).
pub fn synth_hijack_feed(
    outcome: &SimOutcome,
    monitors: &[Asn],
    base_ts: u64,
    jitter: (u64, u64),
    seed: u64,
) -> SynthFeed {
    assert!(jitter.0 <= jitter.1, "jitter range is inverted");
    assert!(
        base_ts >= HIJACK_LEAD,
        "base timestamp leaves no room for the legitimate phase"
    );
    let s = &outcome.scenario;
    let legit_ts = base_ts - HIJACK_LEAD;
    let mut updates = Vec::new();
    for &m in monitors {
        if let Some(rib) = outcome.baseline.get(&s.victim_prefix) {
            if let Some(p) = rib.advertised(m) {
                updates.push(BgpUpdate::announce(legit_ts, m, s.victim_prefix, p));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let polluted: Vec<Asn> = monitors
        .iter()
        .copied()
        .filter(|m| outcome.is_polluted(*m))
        .collect();
    let mut min_jitter = None;
    let hijacked = outcome.hijacked_prefix;
    for &m in &polluted {
        let d = jitter_draw(&mut rng, jitter);
        min_jitter = Some(min_jitter.map_or(d, |x: u64| x.min(d)));
        if let Some(p) = outcome.rib.get(&hijacked).and_then(|r| r.advertised(m)) {
            updates.push(BgpUpdate::announce(base_ts + d, m, hijacked, p));
        }
    }
    sort(&mut updates);
    SynthFeed {
        updates,
        manifest: SynthManifest {
            victim: s.victim,
            hijacker: s.hijacker,
            victim_prefix: s.victim_prefix,
            hijacked_prefix: hijacked,
            prefix_dim: s.class.prefix_dim.label().to_string(),
            path_type: s.class.path_dim.label(),
            hijack_ts: base_ts,
            jitter,
            seed,
            polluted_monitors: polluted,
            min_jitter,
            mitigation_ts: None,
            mitigators: Vec::new(),
        },
    }
}

/// Appends the mitigation phase to a hijack feed: each monitor polluted by
/// the hijack but not after mitigation re-announces its new routes at
/// `mitigation_ts` plus a uniform delay from `jitter`.
pub fn synth_mitigation_feed(
    hijack: &SynthFeed,
    mitigated: &SimOutcome,
    mitigators: &[Asn],
    mitigation_ts: u64,
    jitter: (u64, u64),
    seed: u64,
) -> SynthFeed {
    assert!(jitter.0 <= jitter.1, "jitter range is inverted");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d69_7469_6761_7465);
    let mut updates = hijack.updates.clone();
    let target = hijack.manifest.victim_prefix;
    for &m in &hijack.manifest.polluted_monitors {
        if mitigated.is_polluted(m) {
            continue;
        }
        let d = jitter_draw(&mut rng, jitter);
        // Only routes that differ from what the monitor last announced.
        let changed: Vec<BgpUpdate> = monitor_view(&mitigated.rib, m, &target, mitigation_ts + d)
            .into_iter()
            .filter(|u| {
                let last = hijack
                    .updates
                    .iter()
                    .rev()
                    .find(|h| h.monitor == m && h.prefix == u.prefix);
                last.is_none_or(|h| h.path() != u.path())
            })
            .collect();
        updates.extend(changed);
    }
    sort(&mut updates);
    let mut manifest = hijack.manifest.clone();
    manifest.mitigation_ts = Some(mitigation_ts);
    manifest.mitigators = mitigators.to_vec();
    SynthFeed { updates, manifest }
}

/// `<file>.manifest.json` next to a replay file.
pub fn manifest_path(feed: &Path) -> PathBuf {
    let mut name = feed.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Writes the replay file and its manifest sidecar.
pub fn write_feed(feed: &SynthFeed, path: &Path) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for u in &feed.updates {
        out.write_all(to_line(u).as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    let manifest = serde_json::to_string_pretty(&feed.manifest).expect("manifest serializes");
    std::fs::write(manifest_path(path), manifest + "\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{simulate_hijack, simulate_mitigation, HijackScenario, MitigationStrategy};
    use crate::topology::synthetic::{sample_monitors, InternetLike};
    use crate::topology::AsGraph;
    use crate::types::HijackClass;

    fn setup() -> (AsGraph, SimOutcome) {
        let g = InternetLike::new(300, 4).generate();
        let monitors = sample_monitors(&g, 40, 4);
        let g = g.with_monitors(&monitors).0;
        let asns = g.asns();
        // Find a pair with at least two polluted monitors.
        for i in 0..asns.len() {
            let s = HijackScenario::new(
                asns[i],
                asns[(i * 7 + 3) % asns.len()],
                HijackClass::exact(0),
                "10.0.0.0/23".parse().unwrap(),
            );
            if s.victim == s.hijacker {
                continue;
            }
            let out = simulate_hijack(&g, &s).unwrap();
            if out.polluted_monitors.len() >= 2 {
                return (g, out);
            }
        }
        panic!("no visible hijack found");
    }

    #[test]
    fn one_record_per_polluted_monitor() {
        let (g, out) = setup();
        let monitors: Vec<Asn> = g.monitors().iter().copied().collect();
        let feed = synth_hijack_feed(&out, &monitors, 10_000, (1, 10), 3);
        let hijack_phase: Vec<_> = feed
            .updates
            .iter()
            .filter(|u| u.timestamp >= 10_000)
            .collect();
        assert_eq!(hijack_phase.len(), out.polluted_monitors.len());
        assert!(hijack_phase
            .iter()
            .all(|u| u.path().unwrap().contains(out.scenario.hijacker)));
        let legit: Vec<_> = feed
            .updates
            .iter()
            .filter(|u| u.timestamp == 10_000 - HIJACK_LEAD)
            .collect();
        assert_eq!(legit.len(), monitors.len());
        let first = hijack_phase.iter().map(|u| u.timestamp).min().unwrap();
        assert_eq!(first - 10_000, feed.manifest.min_jitter.unwrap());
        assert!(hijack_phase
            .iter()
            .all(|u| (10_001..=10_010).contains(&u.timestamp)));
    }

    #[test]
    fn deterministic_bytes() {
        let (g, out) = setup();
        let monitors: Vec<Asn> = g.monitors().iter().copied().collect();
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.ndjson");
        let b = dir.path().join("b.ndjson");
        write_feed(&synth_hijack_feed(&out, &monitors, 5_000, (1, 10), 9), &a).unwrap();
        write_feed(&synth_hijack_feed(&out, &monitors, 5_000, (1, 10), 9), &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        assert_eq!(
            std::fs::read(manifest_path(&a)).unwrap(),
            std::fs::read(manifest_path(&b)).unwrap()
        );
        let m: SynthManifest =
            serde_json::from_slice(&std::fs::read(manifest_path(&a)).unwrap()).unwrap();
        assert_eq!(m.hijack_ts, 5_000);
    }

    #[test]
    fn mitigation_phase_reannounces_recovered_monitors() {
        let (g, out) = setup();
        let monitors: Vec<Asn> = g.monitors().iter().copied().collect();
        let feed = synth_hijack_feed(&out, &monitors, 5_000, (1, 10), 9);
        let fixed = simulate_mitigation(&g, &out, &MitigationStrategy::Deaggregation).unwrap();
        let both = synth_mitigation_feed(&feed, &fixed, &[out.scenario.victim], 5_100, (10, 50), 9);
        let late: Vec<_> = both
            .updates
            .iter()
            .filter(|u| u.timestamp >= 5_100)
            .collect();
        // Both halves per recovered monitor.
        assert_eq!(late.len(), 2 * out.polluted_monitors.len());
        assert!(late.iter().all(|u| u.prefix.len() == 24));
    }

    #[test]
    fn no_monitors_means_empty_hijack_phase() {
        let (_, out) = setup();
        let feed = synth_hijack_feed(&out, &[], 5_000, (1, 10), 9);
        assert!(feed.updates.is_empty());
        assert_eq!(feed.manifest.min_jitter, None);
    }
}
