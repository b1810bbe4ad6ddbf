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

//! Policy-driven reactions to alerts and recovery measurement.

mod policy;
mod recovery;

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

pub use policy::{decide, ActionSpec, Matcher, MitigationPolicy, PolicyError, PrefixMatch, Rule};
pub use recovery::{track_recovery, RecoveryContext, RecoveryReport};

use crate::sim::{subprefix_len, MitigationStrategy};
use crate::types::{AsPath, Asn, BgpUpdate, Prefix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MitigationError {
    #[error("{0} is too specific to deaggregate")]
    TooSpecific(Prefix),
    #[error("no mitigators given")]
    NoMitigators,
}

/// One announcement the operator (or a mitigator) should originate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Intent {
    pub origin: Asn,
    pub prefix: Prefix,
    pub seed: AsPath,
}

impl Intent {
    pub fn originate(origin: Asn, prefix: Prefix) -> Self {
        Intent {
            origin,
            prefix,
            seed: AsPath::single(origin),
        }
    }

    /// The intent as a replay record observed at the originating AS.
    pub fn to_update(&self, ts: u64) -> BgpUpdate {
        BgpUpdate::announce(ts, self.origin, self.prefix, self.seed.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActionKind {
    Manual,
    Deaggregate,
    OutsourceMoas,
    Both,
}

impl ActionKind {
    pub fn label(self) -> &'static str {
        match self {
            ActionKind::Manual => "manual",
            ActionKind::Deaggregate => "deaggregate",
            ActionKind::OutsourceMoas => "outsource-moas",
            ActionKind::Both => "both",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MitigationAction {
    pub kind: ActionKind,
    pub announcements: Vec<Intent>,
    pub event_id: String,
    pub issued_at: u64,
    /// Name of the rule that matched.
    pub rule: String,
    /// Anything an operator still has to do by hand.
    pub note: Option<String>,
}

#[derive(Serialize)]
struct IntentRecord {
    origin: u32,
    prefix: String,
}

#[derive(Serialize)]
struct ActionRecord<'a> {
    event_id: &'a str,
    action: &'static str,
    announcements: Vec<IntentRecord>,
    ts: u64,
}

impl MitigationAction {
    /// One-line JSON log record.
    pub fn to_json(&self) -> String {
        let rec = ActionRecord {
            event_id: &self.event_id,
            action: self.kind.label(),
            announcements: self
                .announcements
                .iter()
                .map(|i| IntentRecord {
                    origin: i.origin.value(),
                    prefix: i.prefix.to_string(),
                })
                .collect(),
            ts: self.issued_at,
        };
        serde_json::to_string(&rec).expect("action records serialize")
    }

    /// The simulator strategy closest to this action. For `Both`, only the
    /// deaggregation half is represented.
    pub fn to_strategy(&self) -> Option<MitigationStrategy> {
        match self.kind {
            ActionKind::Manual => None,
            ActionKind::Deaggregate | ActionKind::Both => Some(MitigationStrategy::Deaggregation),
            ActionKind::OutsourceMoas => Some(MitigationStrategy::Moas(
                self.announcements.iter().map(|i| i.origin).collect(),
            )),
        }
    }
}

/// The two halves of `prefix`, each originated by `origin`. Only one level
/// of splitting is done, and never below /24 (/48 for IPv6).
pub fn deaggregate(prefix: Prefix, origin: Asn) -> Result<[Intent; 2], MitigationError> {
    if prefix.len() >= subprefix_len(prefix.family()) {
        return Err(MitigationError::TooSpecific(prefix));
    }
    let (lo, hi) = prefix
        .halves()
        .ok_or(MitigationError::TooSpecific(prefix))?;
    Ok([Intent::originate(origin, lo), Intent::originate(origin, hi)])
}

/// One origination of the same prefix per distinct mitigator.
pub fn moas_announcements(
    prefix: Prefix,
    mitigators: &[Asn],
) -> Result<Vec<Intent>, MitigationError> {
    if mitigators.is_empty() {
        return Err(MitigationError::NoMitigators);
    }
    let unique: BTreeSet<Asn> = mitigators.iter().copied().collect();
    Ok(unique
        .into_iter()
        .map(|m| Intent::originate(m, prefix))
        .collect())
}
