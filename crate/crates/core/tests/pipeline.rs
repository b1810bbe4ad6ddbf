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

//! Feeds, detection, policy and recovery wired together.

use std::collections::{BTreeMap, BTreeSet};

use prefixguard_core::detection::{
    AnnouncedPrefix, Confidence, DetectionConfig, Engine, EngineParams, LinkStores, Source,
};
use prefixguard_core::feeds::{
    collect, manifest_path, merge, open_replay, spawn_merge, synth_hijack_feed,
    synth_mitigation_feed, write_feed, ChannelFeed, FeedSource, Speed, SynthManifest, VecFeed,
};
use prefixguard_core::mitigation::{track_recovery, ActionKind, MitigationPolicy, RecoveryContext};
use prefixguard_core::sim::{
    sample_pairs, simulate_hijack, simulate_mitigation, HijackScenario, SimOutcome,
};
use prefixguard_core::topology::synthetic::{sample_monitors, InternetLike};
use prefixguard_core::topology::AsGraph;
use prefixguard_core::types::{Asn, BgpUpdate, HijackClass, Prefix};

const BASE: u64 = 1_500_000_000;

fn pfx(s: &str) -> Prefix {
    s.parse().unwrap()
}

fn world() -> (AsGraph, Vec<Asn>) {
    let g = InternetLike::new(800, 21).generate();
    let monitors = sample_monitors(&g, 50, 21);
    (g.with_monitors(&monitors).0, monitors)
}

/// First sampled Type-0 hijack on `prefix` that at least `min` monitors see.
fn visible_hijack(g: &AsGraph, prefix: Prefix, min: usize) -> SimOutcome {
    sample_pairs(g, 400, 21)
        .unwrap()
        .into_iter()
        .map(|(v, h)| {
            simulate_hijack(g, &HijackScenario::new(v, h, HijackClass::exact(0), prefix)).unwrap()
        })
        .find(|o| o.polluted_monitors.len() >= min)
        .expect("a visible hijack")
}

fn config_for(g: &AsGraph, victim: Asn, prefix: Prefix) -> DetectionConfig {
    let mut announced = BTreeMap::new();
    announced.insert(prefix, AnnouncedPrefix::new([victim], g.neighbors(victim)));
    DetectionConfig::new(vec![prefix], announced).unwrap()
}

fn verified(updates: &[BgpUpdate], before: u64) -> Vec<prefixguard_core::types::DirectedLink> {
    updates
        .iter()
        .filter(|u| u.timestamp < before)
        .filter_map(|u| u.path())
        .flat_map(|p| p.links().unwrap())
        .collect()
}

#[test]
fn written_feed_replays_identically() {
    let (g, monitors) = world();
    let out = visible_hijack(&g, pfx("10.0.0.0/23"), 1);
    let feed = synth_hijack_feed(&out, &monitors, BASE, (1, 10), 8);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("feed.ndjson");
    write_feed(&feed, &path).unwrap();
    let back = collect(open_replay(&path, Speed::AsFastAsPossible, true).unwrap()).unwrap();
    assert_eq!(back, feed.updates);
    let m: SynthManifest =
        serde_json::from_str(&std::fs::read_to_string(manifest_path(&path)).unwrap()).unwrap();
    assert_eq!(m, feed.manifest);
}

#[test]
fn split_files_merge_back_in_time_order() {
    let (g, monitors) = world();
    let out = visible_hijack(&g, pfx("10.0.0.0/23"), 3);
    let feed = synth_hijack_feed(&out, &monitors, BASE, (1, 30), 3);
    let dir = tempfile::tempdir().unwrap();
    let mut paths = Vec::new();
    for part in 0..3u32 {
        let lines: String = feed
            .updates
            .iter()
            .filter(|u| u.monitor.value() % 3 == part)
            .map(|u| prefixguard_core::feeds::to_line(u) + "\n")
            .collect();
        let p = dir.path().join(format!("part{part}.ndjson"));
        std::fs::write(&p, lines).unwrap();
        paths.push(p);
    }
    let sources: Vec<_> = paths
        .iter()
        .map(|p| open_replay(p, Speed::AsFastAsPossible, true).unwrap())
        .collect();
    let merged = collect(merge(sources).unwrap()).unwrap();
    // Oracle: concatenate in label order, stable sort by time.
    let mut expected: Vec<BgpUpdate> = (0..3u32)
        .flat_map(|part| {
            feed.updates
                .iter()
                .filter(move |u| u.monitor.value() % 3 == part)
                .cloned()
        })
        .collect();
    expected.sort_by_key(|u| u.timestamp);
    assert_eq!(merged, expected);
}

#[test]
fn live_channel_merges_with_recorded_feed() {
    let recorded: Vec<BgpUpdate> = (0..50)
        .map(|i| BgpUpdate::withdraw(i * 2, Asn::new(100).unwrap(), pfx("10.0.0.0/23")))
        .collect();
    let live: Vec<BgpUpdate> = (0..50)
        .map(|i| BgpUpdate::withdraw(i * 2 + 1, Asn::new(200).unwrap(), pfx("10.0.0.0/23")))
        .collect();
    let (channel, sender) = ChannelFeed::new("live", 4);
    let to_send = live.clone();
    let producer = std::thread::spawn(move || {
        for u in to_send {
            sender.send(u).unwrap();
        }
    });
    let sources: Vec<Box<dyn FeedSource>> = vec![
        Box::new(VecFeed::new("recorded", recorded.clone())),
        Box::new(channel),
    ];
    let merged = collect(spawn_merge(sources, 2).unwrap()).unwrap();
    producer.join().unwrap();
    let ts: Vec<u64> = merged.iter().map(|u| u.timestamp).collect();
    assert_eq!(ts, (0..100).collect::<Vec<_>>());
}

#[test]
fn detect_decide_mitigate_recover() {
    let (g, monitors) = world();
    let victim_prefix = pfx("10.0.0.0/24");
    let out = visible_hijack(&g, victim_prefix, 3);
    let victim = out.scenario.victim;
    let feed = synth_hijack_feed(&out, &monitors, BASE, (2, 20), 5);

    let mut engine = Engine::new(
        config_for(&g, victim, victim_prefix),
        LinkStores::with_verified(verified(&feed.updates, BASE)),
        EngineParams::default(),
    );
    let mitigator = g
        .asns()
        .iter()
        .copied()
        .filter(|a| *a != victim && *a != out.scenario.hijacker)
        .max_by_key(|a| g.customers(*a).len())
        .unwrap();
    // A /24 cannot be split, so the default policy outsources.
    let policy = MitigationPolicy::default_for(victim, vec![mitigator]).unwrap();
    let mut alerts = Vec::new();
    for u in &feed.updates {
        alerts.extend(engine.process(u, Source::Monitor));
    }
    alerts.extend(engine.finish());
    assert_eq!(alerts.len(), 1);
    let alert = &alerts[0];
    assert_eq!(alert.confidence, Confidence::Certain);
    assert_eq!(alert.detected_at, BASE + feed.manifest.min_jitter.unwrap());

    let action = policy.decide(alert);
    assert_eq!(action.kind, ActionKind::OutsourceMoas);
    assert_eq!(action.issued_at, alert.detected_at);
    let strategy = action.to_strategy().unwrap();
    let mitigated = simulate_mitigation(&g, &out, &strategy).unwrap();
    assert!(mitigated.polluted.len() < out.polluted.len());

    let at = alert.detected_at + 30;
    let full = synth_mitigation_feed(&feed, &mitigated, &[mitigator], at, (2, 20), 5);
    let ctx = RecoveryContext {
        victim_prefix,
        authorized: BTreeSet::from([victim, mitigator]),
        since: None,
    };
    let report = track_recovery(VecFeed::new("feed", full.updates.clone()), &ctx).unwrap();
    let still: Vec<Asn> = out
        .polluted_monitors
        .iter()
        .copied()
        .filter(|m| mitigated.is_polluted(*m))
        .collect();
    assert_eq!(report.unrecovered, still);
    for (m, delay) in &report.delays {
        let polluted_at = feed
            .updates
            .iter()
            .find(|u| u.monitor == *m && u.timestamp >= BASE)
            .unwrap()
            .timestamp;
        assert!(
            *delay >= at + 2 - polluted_at && *delay <= at + 20 - polluted_at,
            "{m}: {delay}"
        );
    }
    assert_eq!(
        report.delays.len() + report.unrecovered.len(),
        out.polluted_monitors.len()
    );
}

#[test]
fn shipped_configs_parse() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../config");
    let cfg = DetectionConfig::load(&root.join("detection.toml")).unwrap();
    assert_eq!(cfg.announced().len(), 3);
    let policy = MitigationPolicy::load(&root.join("policy.toml")).unwrap();
    assert_eq!(policy.rules().len(), 3);
}
