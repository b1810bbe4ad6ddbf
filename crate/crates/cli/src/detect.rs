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

//! `detect`: replays feeds through detection and the mitigation policy.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use prefixguard_core::detection::{
    Alert, DetectionConfig, Engine, EngineParams, LinkStores, Source,
};
use prefixguard_core::feeds::{
    manifest_path, merge, open_replay, to_line, FeedError, FeedSource, ReplayFeed, Speed,
    SynthManifest,
};
use prefixguard_core::mitigation::{
    track_recovery, MitigationPolicy, RecoveryContext, RecoveryReport,
};
use prefixguard_core::types::{Asn, BgpUpdate, DirectedLink, Prefix};
use serde::Serialize;

use crate::manifest::RunManifest;
use crate::{create_dir, out_file, CliError};

#[derive(clap::Args)]
pub struct Args {
    /// Owned and announced prefixes with their origins and neighbors (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Newline-delimited JSON update files; merged by timestamp.
    #[arg(long, required = true, num_args = 1..)]
    replay: Vec<PathBuf>,
    /// Mitigation rules (TOML). Without one, no actions are issued.
    #[arg(long)]
    policy: Option<PathBuf>,
    /// Verified links, one `FROM TO` pair per line.
    #[arg(long)]
    verified: Vec<PathBuf>,
    /// Second-stage window in seconds.
    #[arg(long, default_value_t = 300)]
    ts2: u64,
    /// Polluted monitors needed to confirm in the second stage.
    #[arg(long, default_value_t = 2)]
    th2: usize,
    /// fast, or real:X to replay at X times recorded speed.
    #[arg(long, default_value = "fast")]
    speed: Speed,
    /// Abort on malformed or out-of-order records instead of skipping them.
    #[arg(long)]
    strict: bool,
    /// Output directory; receives alerts.ndjson, actions.ndjson,
    /// intents.ndjson, summary.json and manifest.json.
    #[arg(long)]
    out: PathBuf,
}

/// Keeps a replay's skip count readable after the merge takes ownership.
struct Counted {
    inner: ReplayFeed<File>,
    skipped: Arc<AtomicUsize>,
}

impl FeedSource for Counted {
    fn label(&self) -> &str {
        self.inner.label()
    }

    fn next_update(&mut self) -> Option<Result<BgpUpdate, FeedError>> {
        let next = self.inner.next_update();
        self.skipped.store(self.inner.skipped(), Ordering::Relaxed);
        next
    }
}

pub fn parse_verified(path: &Path) -> Result<Vec<DirectedLink>, CliError> {
    let file = File::open(path).map_err(|e| CliError::input(path, e))?;
    let mut links = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::input(path, e))?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let bad = |what: String| CliError::input(path, format!("line {}: {what}", i + 1));
        let mut parts = body
            .split(|c: char| c.is_whitespace() || c == '|')
            .filter(|p| !p.is_empty());
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(bad(format!("expected FROM TO, got {body:?}")));
        };
        let a: Asn = a.parse().map_err(|e| bad(format!("{e}")))?;
        let b: Asn = b.parse().map_err(|e| bad(format!("{e}")))?;
        links.push(DirectedLink::new(a, b).map_err(|e| bad(format!("{e}")))?);
    }
    Ok(links)
}

#[derive(Serialize)]
struct DelayReport {
    replay: String,
    hijacked_prefix: String,
    hijack_ts: u64,
    first_alert_ts: Option<u64>,
    detection_delay: Option<u64>,
    min_jitter: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    recovery: Option<RecoveryReport>,
}

#[derive(Serialize)]
struct Summary {
    updates: usize,
    skipped_records: usize,
    alerts: usize,
    alerts_by_confidence: BTreeMap<&'static str, usize>,
    actions: usize,
    pending_at_end: usize,
    detection: Vec<DelayReport>,
}

pub fn run(args: Args) -> Result<(), CliError> {
    if args.th2 == 0 {
        return Err(CliError::Usage("--th2 must be at least 1".into()));
    }
    let mut manifest = RunManifest::new("detect", None);
    // Everything that can be rejected is loaded before the stream starts.
    let config =
        DetectionConfig::load(&args.config).map_err(|e| CliError::input(&args.config, e))?;
    manifest.add_input(&args.config)?;
    let policy = match &args.policy {
        Some(p) => {
            let policy = MitigationPolicy::load(p).map_err(|e| CliError::input(p, e))?;
            manifest.add_input(p)?;
            Some(policy)
        }
        None => None,
    };
    let mut verified = Vec::new();
    for v in &args.verified {
        verified.extend(parse_verified(v)?);
        manifest.add_input(v)?;
    }
    let mut sources = Vec::new();
    let mut counters = Vec::new();
    let mut synth = Vec::new();
    for r in &args.replay {
        let feed = open_replay(r, args.speed, args.strict).map_err(|e| CliError::input(r, e))?;
        let skipped = Arc::new(AtomicUsize::new(0));
        counters.push(skipped.clone());
        sources.push(Counted {
            inner: feed,
            skipped,
        });
        manifest.add_input(r)?;
        let side = manifest_path(r);
        if side.exists() {
            let text = std::fs::read_to_string(&side).map_err(|e| CliError::input(&side, e))?;
            let m: SynthManifest =
                serde_json::from_str(&text).map_err(|e| CliError::input(&side, e))?;
            manifest.add_input(&side)?;
            synth.push((r.clone(), m));
        }
    }

    create_dir(&args.out)?;
    let open = |name: &str| -> Result<(PathBuf, BufWriter<File>), CliError> {
        let path = out_file(&args.out, name);
        let file = File::create(&path).map_err(|e| CliError::output(&path, e))?;
        Ok((path, BufWriter::new(file)))
    };
    let (alerts_path, mut alerts_out) = open("alerts.ndjson")?;
    let (actions_path, mut actions_out) = open("actions.ndjson")?;
    let (intents_path, mut intents_out) = open("intents.ndjson")?;

    let params = EngineParams {
        ts2: args.ts2,
        th2: args.th2,
        ..EngineParams::default()
    };
    let mut live_config = config.clone();
    let mut engine = Engine::new(config, LinkStores::with_verified(verified), params);
    let mut feed = merge(sources).map_err(|e| CliError::Internal(e.to_string()))?;
    let mut updates = 0usize;
    let mut alerts: Vec<Alert> = Vec::new();
    let mut actions = 0usize;
    // Returns the announcements the policy asked for.
    let mut emit =
        |batch: Vec<Alert>, alerts: &mut Vec<Alert>| -> Result<Vec<(Prefix, Asn)>, CliError> {
            let mut issued = Vec::new();
            for a in batch {
                writeln!(alerts_out, "{}", a.to_json())
                    .map_err(|e| CliError::output(&alerts_path, e))?;
                if let Some(policy) = &policy {
                    let action = policy.decide(&a);
                    writeln!(actions_out, "{}", action.to_json())
                        .map_err(|e| CliError::output(&actions_path, e))?;
                    for intent in &action.announcements {
                        writeln!(
                            intents_out,
                            "{}",
                            to_line(&intent.to_update(action.issued_at))
                        )
                        .map_err(|e| CliError::output(&intents_path, e))?;
                        issued.push((intent.prefix, intent.origin));
                    }
                    actions += 1;
                }
                alerts.push(a);
            }
            Ok(issued)
        };
    while let Some(next) = feed.next_update() {
        let u = next.map_err(|e| match e {
            FeedError::Io { .. } | FeedError::Malformed { .. } | FeedError::OutOfOrder { .. } => {
                CliError::Input(e.to_string())
            }
            other => CliError::Internal(other.to_string()),
        })?;
        updates += 1;
        let batch = engine.process(&u, Source::Monitor);
        let issued = emit(batch, &mut alerts)?;
        if !issued.is_empty() {
            // Our own mitigation announcements are not hijacks.
            for (prefix, origin) in issued {
                live_config.adopt(prefix, origin);
            }
            engine.reload_config(live_config.clone());
        }
    }
    let pending_at_end = engine.pending_count();
    let batch = engine.finish();
    emit(batch, &mut alerts)?;
    for (path, mut w) in [
        (&alerts_path, alerts_out),
        (&actions_path, actions_out),
        (&intents_path, intents_out),
    ] {
        w.flush().map_err(|e| CliError::output(path, e))?;
    }

    let mut by_confidence = BTreeMap::new();
    for a in &alerts {
        *by_confidence.entry(a.confidence.label()).or_insert(0) += 1;
    }
    let mut detection = Vec::new();
    for (path, m) in &synth {
        let first = alerts
            .iter()
            .filter(|a| a.prefix.overlaps(&m.hijacked_prefix) && a.detected_at >= m.hijack_ts)
            .map(|a| a.detected_at)
            .min();
        let recovery = match m.mitigation_ts {
            Some(ts) => {
                let feed = open_replay(path, Speed::AsFastAsPossible, false)
                    .map_err(|e| CliError::input(path, e))?;
                let mut authorized: BTreeSet<Asn> = BTreeSet::from([m.victim]);
                authorized.extend(m.mitigators.iter().copied());
                let ctx = RecoveryContext {
                    victim_prefix: m.victim_prefix,
                    authorized,
                    since: Some(m.hijack_ts.min(ts)),
                };
                Some(track_recovery(feed, &ctx).map_err(|e| CliError::input(path, e))?)
            }
            None => None,
        };
        detection.push(DelayReport {
            replay: path.display().to_string(),
            hijacked_prefix: m.hijacked_prefix.to_string(),
            hijack_ts: m.hijack_ts,
            first_alert_ts: first,
            detection_delay: first.map(|t| t - m.hijack_ts),
            min_jitter: m.min_jitter,
            recovery,
        });
    }
    let summary = Summary {
        updates,
        skipped_records: counters.iter().map(|c| c.load(Ordering::Relaxed)).sum(),
        alerts: alerts.len(),
        alerts_by_confidence: by_confidence,
        actions,
        pending_at_end,
        detection,
    };
    let text =
        serde_json::to_string_pretty(&summary).map_err(|e| CliError::Internal(e.to_string()))?;
    crate::write_file(
        &out_file(&args.out, "summary.json"),
        (text + "\n").as_bytes(),
    )?;
    manifest.write(&out_file(&args.out, "manifest.json"))?;

    println!(
        "{} updates ({} skipped), {} alerts, {} actions",
        summary.updates, summary.skipped_records, summary.alerts, summary.actions
    );
    for (confidence, n) in &summary.alerts_by_confidence {
        println!("  {confidence}: {n}");
    }
    for d in &summary.detection {
        match d.detection_delay {
            Some(delay) => println!("  {}: detected {delay}s after the hijack", d.replay),
            None => println!("  {}: hijack not detected", d.replay),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verified_file_format() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v");
        std::fs::write(&p, "# links\n1 2\n3|4  # trailing\n\n").unwrap();
        let links = parse_verified(&p).unwrap();
        assert_eq!(links.len(), 2);
        assert_eq!(links[1].from, Asn::new(3).unwrap());
        std::fs::write(&p, "1 2 3\n").unwrap();
        assert!(matches!(parse_verified(&p), Err(CliError::Input(_))));
    }
}
