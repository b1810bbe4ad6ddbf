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

//! Shared BGP vocabulary: AS numbers, prefixes, AS paths, updates and the
//! three-axis hijack taxonomy.

mod path;
mod prefix;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use path::{AsPath, Asn, DirectedLink};
pub use prefix::{longest_match_any, Family, Prefix};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TypeError {
    #[error("malformed prefix {0:?}")]
    MalformedPrefix(String),
    #[error("prefix length {len} exceeds family maximum {max}")]
    LengthOutOfRange { len: u32, max: u8 },
    #[error("prefix {0} has host bits set")]
    HostBitsSet(String),
    #[error("address family mismatch between {0} and {1}")]
    FamilyMismatch(Prefix, Prefix),
    #[error("malformed AS number {0:?}")]
    MalformedAsn(String),
    #[error("AS number 0 is reserved")]
    ZeroAsn,
    #[error("AS path is empty")]
    EmptyPath,
    #[error("AS path {0} contains a loop")]
    LoopedPath(AsPath),
    #[error("link from {0} to itself")]
    SelfLink(Asn),
}

/// Announcement carries its path, so a withdrawal can never hold one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UpdateKind {
    Announcement(AsPath),
    Withdrawal,
}

/// One routing update as observed at a vantage point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BgpUpdate {
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub monitor: Asn,
    pub prefix: Prefix,
    pub kind: UpdateKind,
}

impl BgpUpdate {
    pub fn announce(timestamp: u64, monitor: Asn, prefix: Prefix, path: AsPath) -> Self {
        BgpUpdate {
            timestamp,
            monitor,
            prefix,
            kind: UpdateKind::Announcement(path),
        }
    }

    pub fn withdraw(timestamp: u64, monitor: Asn, prefix: Prefix) -> Self {
        BgpUpdate {
            timestamp,
            monitor,
            prefix,
            kind: UpdateKind::Withdrawal,
        }
    }

    pub fn path(&self) -> Option<&AsPath> {
        match &self.kind {
            UpdateKind::Announcement(p) => Some(p),
            UpdateKind::Withdrawal => None,
        }
    }

    pub fn is_announcement(&self) -> bool {
        matches!(self.kind, UpdateKind::Announcement(_))
    }
}

/// Which prefix the attacker announces relative to the victim's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrefixDim {
    ExactPrefix,
    SubPrefix,
    Squatting,
}

impl PrefixDim {
    pub fn label(self) -> &'static str {
        match self {
            PrefixDim::ExactPrefix => "exact",
            PrefixDim::SubPrefix => "sub-prefix",
            PrefixDim::Squatting => "squatting",
        }
    }
}

impl fmt::Display for PrefixDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for PrefixDim {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(PrefixDim::ExactPrefix),
            "sub-prefix" | "subprefix" | "sub" => Ok(PrefixDim::SubPrefix),
            "squatting" => Ok(PrefixDim::Squatting),
            other => Err(format!("unknown prefix dimension {other:?}")),
        }
    }
}

/// Position of the rightmost fake link in the announced path, or `TypeU`
/// when the path is left untouched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PathDim {
    TypeN(u8),
    TypeU,
}

impl PathDim {
    pub fn label(self) -> String {
        match self {
            PathDim::TypeN(n) => n.to_string(),
            PathDim::TypeU => "U".to_string(),
        }
    }
}

impl fmt::Display for PathDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathDim::TypeN(n) => write!(f, "Type-{n}"),
            PathDim::TypeU => f.write_str("Type-U"),
        }
    }
}

impl std::str::FromStr for PathDim {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.strip_prefix("Type-").unwrap_or(s);
        if t.eq_ignore_ascii_case("u") {
            return Ok(PathDim::TypeU);
        }
        t.parse::<u8>()
            .map(PathDim::TypeN)
            .map_err(|_| format!("unknown path type {s:?}"))
    }
}

/// Data-plane behaviour. Control-plane detection always reports `Unknown`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DataPlane {
    Blackhole,
    Imposture,
    ManInTheMiddle,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HijackClass {
    pub prefix_dim: PrefixDim,
    pub path_dim: PathDim,
    pub data_plane: DataPlane,
}

impl HijackClass {
    pub fn new(prefix_dim: PrefixDim, path_dim: PathDim) -> Self {
        HijackClass {
            prefix_dim,
            path_dim,
            data_plane: DataPlane::Unknown,
        }
    }

    pub fn exact(n: u8) -> Self {
        Self::new(PrefixDim::ExactPrefix, PathDim::TypeN(n))
    }

    pub fn with_data_plane(mut self, data_plane: DataPlane) -> Self {
        self.data_plane = data_plane;
        self
    }
}

impl fmt::Display for HijackClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.prefix_dim, self.path_dim)
    }
}
