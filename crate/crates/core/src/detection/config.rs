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

//! Operator ground truth: owned space and what is announced from it.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::types::{Asn, Prefix};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config syntax: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("announced prefix {0} is not inside any owned prefix")]
    NotOwned(Prefix),
    #[error("announced prefix {0} lists no origins")]
    NoOrigins(Prefix),
    #[error("announced prefix {0} lists no neighbors")]
    NoNeighbors(Prefix),
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnouncedPrefix {
    pub origins: BTreeSet<Asn>,
    pub neighbors: BTreeSet<Asn>,
    /// Third parties allowed to originate the prefix on the owner's behalf,
    /// such as outsourced mitigators. Their paths are trusted as is.
    #[serde(default)]
    pub delegates: BTreeSet<Asn>,
}

impl AnnouncedPrefix {
    pub fn new(
        origins: impl IntoIterator<Item = Asn>,
        neighbors: impl IntoIterator<Item = Asn>,
    ) -> Self {
        AnnouncedPrefix {
            origins: origins.into_iter().collect(),
            neighbors: neighbors.into_iter().collect(),
            delegates: BTreeSet::new(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    owned: Vec<Prefix>,
    #[serde(default)]
    announced: BTreeMap<Prefix, AnnouncedPrefix>,
}

/// Where an update's prefix falls relative to the configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement<'a> {
    NotMine,
    Exact(&'a AnnouncedPrefix),
    /// Strictly inside an announced prefix (the most specific one).
    InsideAnnounced(Prefix),
    /// Owned but outside everything announced.
    Unannounced,
}

/// ```toml
/// owned = ["10.0.0.0/22"]
///
/// [announced."10.0.0.0/23"]
/// origins = [65001]
/// neighbors = [174, 3356]
/// ```
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectionConfig {
    owned: Vec<Prefix>,
    announced: BTreeMap<Prefix, AnnouncedPrefix>,
}

impl DetectionConfig {
    pub fn new(
        owned: Vec<Prefix>,
        announced: BTreeMap<Prefix, AnnouncedPrefix>,
    ) -> Result<Self, ConfigError> {
        for (p, a) in &announced {
            if !owned.iter().any(|o| o.contains(p)) {
                return Err(ConfigError::NotOwned(*p));
            }
            if a.origins.is_empty() {
                return Err(ConfigError::NoOrigins(*p));
            }
            if a.neighbors.is_empty() {
                return Err(ConfigError::NoNeighbors(*p));
            }
        }
        let mut owned = owned;
        owned.sort();
        owned.dedup();
        Ok(DetectionConfig { owned, announced })
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text)?;
        Self::new(raw.owned, raw.announced)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn owned(&self) -> &[Prefix] {
        &self.owned
    }

    pub fn announced(&self) -> &BTreeMap<Prefix, AnnouncedPrefix> {
        &self.announced
    }

    /// Records an announcement the owner made itself (or had made), so that
    /// it is not reported. A more-specific of an announced prefix inherits
    /// the parent's entry; an origin outside the entry becomes a delegate.
    /// Returns false when `prefix` is not owned.
    pub fn adopt(&mut self, prefix: Prefix, origin: Asn) -> bool {
        if !self.owned.iter().any(|o| o.contains(&prefix)) {
            return false;
        }
        if !self.announced.contains_key(&prefix) {
            let entry = match self.place(&prefix) {
                Placement::InsideAnnounced(parent) => self.announced[&parent].clone(),
                _ => AnnouncedPrefix::new([], []),
            };
            self.announced.insert(prefix, entry);
        }
        let entry = self.announced.get_mut(&prefix).expect("inserted above");
        if !entry.origins.contains(&origin) {
            entry.delegates.insert(origin);
        }
        true
    }

    pub fn place(&self, prefix: &Prefix) -> Placement<'_> {
        if !self.owned.iter().any(|o| o.contains(prefix)) {
            return Placement::NotMine;
        }
        if let Some(a) = self.announced.get(prefix) {
            return Placement::Exact(a);
        }
        match self
            .announced
            .keys()
            .filter(|p| p.contains(prefix))
            .max_by_key(|p| p.len())
        {
            Some(parent) => Placement::InsideAnnounced(*parent),
            None => Placement::Unannounced,
        }
    }
}
