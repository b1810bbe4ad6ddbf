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

//! Stateful detection: one serialized consumer owning link history and
//! pending second-stage checks.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::{self, Write};
use std::sync::mpsc::Sender;
use std::sync::Arc;

use super::stores::{LinkStores, Source, DAY};
use super::{
    check_update, stage2_evaluate, Alert, Confidence, DetectionConfig, Finding, Stage2Outcome,
    Verdict,
};
use crate::types::{Asn, BgpUpdate, DirectedLink, Prefix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineParams {
    /// Second-stage window in seconds.
    pub ts2: u64,
    /// Distinct polluted monitors needed to confirm in the second stage.
    pub th2: usize,
    pub retention: u64,
    /// How often (in stream time) history expiry runs.
    pub expiry_interval: u64,
}

impl Default for EngineParams {
    fn default() -> Self {
        EngineParams {
            ts2: 300,
            th2: 2,
            retention: super::DEFAULT_RETENTION,
            expiry_interval: DAY,
        }
    }
}

/// A first-stage suspicion awaiting its second-stage verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PendingEvent {
    pub link: DirectedLink,
    pub left_of_link: Vec<Asn>,
    pub opened_at: u64,
    pub deadline: u64,
    pub monitors: BTreeSet<Asn>,
}

impl PendingEvent {
    pub fn new(link: DirectedLink, left_of_link: Vec<Asn>, opened_at: u64, window: u64) -> Self {
        PendingEvent {
            link,
            left_of_link,
            opened_at,
            deadline: opened_at + window,
            monitors: BTreeSet::new(),
        }
    }
}

struct Open {
    pending: PendingEvent,
    finding: Finding,
    trigger: BgpUpdate,
}

pub trait AlertSink {
    fn emit(&mut self, alert: &Alert) -> io::Result<()>;
}

impl AlertSink for Vec<Alert> {
    fn emit(&mut self, alert: &Alert) -> io::Result<()> {
        self.push(alert.clone());
        Ok(())
    }
}

impl AlertSink for Sender<Alert> {
    fn emit(&mut self, alert: &Alert) -> io::Result<()> {
        self.send(alert.clone())
            .map_err(|_| io::Error::new(io::ErrorKind::BrokenPipe, "alert receiver dropped"))
    }
}

/// Writes one JSON object per line.
pub struct JsonLinesSink<W: Write>(pub W);

impl<W: Write> AlertSink for JsonLinesSink<W> {
    fn emit(&mut self, alert: &Alert) -> io::Result<()> {
        writeln!(self.0, "{}", alert.to_json())
    }
}

type EventKey = (Prefix, DirectedLink);

pub struct Engine {
    config: Arc<DetectionConfig>,
    params: EngineParams,
    stores: LinkStores,
    open: HashMap<EventKey, Open>,
    deadlines: BTreeSet<(u64, EventKey)>,
    /// Everything already reported, so repeated sightings stay silent.
    reported: HashSet<String>,
    clock: u64,
    next_expiry: Option<u64>,
}

impl Engine {
    pub fn new(config: DetectionConfig, stores: LinkStores, params: EngineParams) -> Self {
        let mut stores = stores;
        stores.retention = params.retention;
        Engine {
            config: Arc::new(config),
            params,
            stores,
            open: HashMap::new(),
            deadlines: BTreeSet::new(),
            reported: HashSet::new(),
            clock: 0,
            next_expiry: None,
        }
    }

    pub fn stores(&self) -> &LinkStores {
        &self.stores
    }

    pub fn stores_mut(&mut self) -> &mut LinkStores {
        &mut self.stores
    }

    pub fn params(&self) -> EngineParams {
        self.params
    }

    /// Swaps in a new configuration; the next update sees it whole.
    pub fn reload_config(&mut self, config: DetectionConfig) {
        self.config = Arc::new(config);
    }

    pub fn pending_count(&self) -> usize {
        self.open.len()
    }

    /// Handles one update and returns the alerts it (and any second-stage
    /// deadlines that passed before it) produced.
    pub fn process(&mut self, update: &BgpUpdate, source: Source) -> Vec<Alert> {
        let mut alerts = self.advance(update.timestamp);
        let Some(path) = update.path() else {
            return alerts;
        };
        if source == Source::LocalRouter {
            self.stores.ingest(path, update.timestamp, source);
            return alerts;
        }

        let verdict = check_update(&self.config, &self.stores, update);
        if !self.open.is_empty() && verdict != Verdict::NotMine {
            let path = path.collapse_prepending();
            if let Ok(links) = path.links() {
                for l in links {
                    if let Some(o) = self.open.get_mut(&(update.prefix, l)) {
                        o.pending.monitors.insert(update.monitor);
                    }
                }
            }
        }
        match verdict {
            Verdict::NotMine | Verdict::Ignored => {}
            Verdict::Legitimate { promote } => {
                for l in promote {
                    self.stores.verify(l);
                }
            }
            Verdict::Alert(f) => {
                if self.reported.insert(dedup_key(&f)) {
                    alerts.push(Alert::from_finding(&f, update, 1, update.timestamp));
                }
            }
            Verdict::Pending(f) => {
                let link = f.link.expect("pending findings carry a link");
                let key = (update.prefix, link);
                if !self.open.contains_key(&key) && self.reported.insert(dedup_key(&f)) {
                    let mut pending = PendingEvent::new(
                        link,
                        f.left_of_link.clone(),
                        update.timestamp,
                        self.params.ts2,
                    );
                    pending.monitors.insert(update.monitor);
                    alerts.push(Alert::from_finding(&f, update, 1, update.timestamp));
                    self.deadlines.insert((pending.deadline, key));
                    self.open.insert(
                        key,
                        Open {
                            pending,
                            finding: f,
                            trigger: update.clone(),
                        },
                    );
                }
            }
        }
        self.stores.ingest(path, update.timestamp, Source::Monitor);
        alerts
    }

    /// Moves stream time to `now`: closes windows whose deadline is strictly
    /// earlier and runs history expiry when due.
    pub fn advance(&mut self, now: u64) -> Vec<Alert> {
        self.clock = self.clock.max(now);
        let mut alerts = Vec::new();
        while let Some(&(deadline, key)) = self.deadlines.first() {
            if deadline >= self.clock {
                break;
            }
            self.deadlines.pop_first();
            alerts.extend(self.resolve(key, deadline));
        }
        match self.next_expiry {
            None => self.next_expiry = Some(self.clock + self.params.expiry_interval),
            Some(t) if self.clock >= t => {
                self.stores.expire(self.clock);
                self.next_expiry = Some(self.clock + self.params.expiry_interval);
            }
            Some(_) => {}
        }
        alerts
    }

    /// Closes every open window (end of stream).
    pub fn finish(&mut self) -> Vec<Alert> {
        let mut alerts = Vec::new();
        while let Some((deadline, key)) = self.deadlines.pop_first() {
            alerts.extend(self.resolve(key, deadline));
        }
        alerts
    }

    fn resolve(&mut self, key: EventKey, deadline: u64) -> Option<Alert> {
        let open = self.open.remove(&key)?;
        match stage2_evaluate(&self.stores, &open.pending, self.params.th2, deadline) {
            Stage2Outcome::ReverseObserved => {
                self.stores.verify(open.pending.link);
                None
            }
            Stage2Outcome::BelowThreshold { .. } => None,
            Stage2Outcome::Confirmed { polluted_monitors } => {
                let mut alert =
                    Alert::from_finding(&open.finding, &open.trigger, polluted_monitors, deadline);
                alert.confidence = Confidence::Stage2Confirmed;
                Some(alert)
            }
        }
    }
}

fn dedup_key(f: &Finding) -> String {
    let offending: Vec<String> = f.offending.iter().map(|a| a.to_string()).collect();
    let link = f
        .link
        .map(|l| format!("{}>{}", l.from, l.to))
        .unwrap_or_default();
    format!(
        "{}|{}|{}|{}|{}",
        f.prefix,
        f.class.prefix_dim.label(),
        f.class.path_dim.label(),
        offending.join(","),
        link
    )
}
