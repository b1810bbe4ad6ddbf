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

//! Canonical newline-delimited JSON form of a routing update.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::{AsPath, Asn, BgpUpdate, Prefix, TypeError, UpdateKind};

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("unknown update kind {0:?}")]
    UnknownKind(String),
    #[error("announcement without a path")]
    MissingPath,
    #[error("withdrawal carrying a path")]
    UnexpectedPath,
}

/// Wire form. Field order here is the serialized key order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UpdateRecord {
    pub ts: u64,
    pub monitor: u32,
    pub kind: String,
    pub prefix: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<u32>>,
}

impl UpdateRecord {
    pub fn from_update(u: &BgpUpdate) -> Self {
        let (kind, path) = match &u.kind {
            UpdateKind::Announcement(p) => {
                ("A", Some(p.hops().iter().map(|a| a.value()).collect()))
            }
            UpdateKind::Withdrawal => ("W", None),
        };
        UpdateRecord {
            ts: u.timestamp,
            monitor: u.monitor.value(),
            kind: kind.to_string(),
            prefix: u.prefix.to_string(),
            path,
        }
    }

    pub fn to_update(&self) -> Result<BgpUpdate, RecordError> {
        let monitor = Asn::new(self.monitor)?;
        let prefix: Prefix = self.prefix.parse()?;
        match (self.kind.as_str(), &self.path) {
            ("A", Some(p)) => Ok(BgpUpdate::announce(
                self.ts,
                monitor,
                prefix,
                AsPath::from_u32s(p)?,
            )),
            ("A", None) => Err(RecordError::MissingPath),
            ("W", None) => Ok(BgpUpdate::withdraw(self.ts, monitor, prefix)),
            ("W", Some(_)) => Err(RecordError::UnexpectedPath),
            (other, _) => Err(RecordError::UnknownKind(other.to_string())),
        }
    }
}

/// Canonical single-line rendering (no whitespace, fixed key order, no
/// trailing newline).
pub fn to_line(u: &BgpUpdate) -> String {
    serde_json::to_string(&UpdateRecord::from_update(u)).expect("records always serialize")
}

pub fn parse_line(line: &str) -> Result<BgpUpdate, RecordError> {
    let rec: UpdateRecord = serde_json::from_str(line)?;
    rec.to_update()
}
