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

//! Ordered first-match rules mapping alerts to actions.

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use super::{deaggregate, moas_announcements, ActionKind, Intent, MitigationAction};
use crate::detection::{Alert, Confidence};
use crate::types::{Asn, Prefix};

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("policy syntax: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("rule {0:?}: unknown action {1:?}")]
    UnknownAction(String, String),
    #[error("rule {0:?}: unknown confidence {1:?}")]
    UnknownConfidence(String, String),
    #[error("rule {0:?} needs at least one mitigator")]
    NoMitigators(String),
    #[error("rule {0:?} can never match: an earlier rule matches everything")]
    Unreachable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PrefixMatch {
    Exact,
    #[default]
    Within,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Matcher {
    pub prefix: Option<(Prefix, PrefixMatch)>,
    pub max_prefix_len: Option<u8>,
    pub min_monitors: Option<usize>,
    pub min_confidence: Option<Confidence>,
}

fn strength(c: Confidence) -> u8 {
    match c {
        Confidence::Stage1Suspicious => 0,
        Confidence::Stage2Confirmed => 1,
        Confidence::Certain => 2,
    }
}

impl Matcher {
    pub fn is_catch_all(&self) -> bool {
        *self == Matcher::default()
    }

    pub fn matches(&self, alert: &Alert) -> bool {
        if let Some((p, how)) = self.prefix {
            let ok = match how {
                PrefixMatch::Exact => alert.prefix == p,
                PrefixMatch::Within => p.contains(&alert.prefix),
            };
            if !ok {
                return false;
            }
        }
        if self.max_prefix_len.is_some_and(|m| alert.prefix.len() > m) {
            return false;
        }
        if self
            .min_monitors
            .is_some_and(|m| alert.polluted_monitors < m)
        {
            return false;
        }
        if self
            .min_confidence
            .is_some_and(|c| strength(alert.confidence) < strength(c))
        {
            return false;
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActionSpec {
    Manual,
    Deaggregate,
    OutsourceMoas(Vec<Asn>),
    /// Deaggregate, outsource to any listed mitigators, and flag for an
    /// operator to contact upstreams.
    Both(Vec<Asn>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub matcher: Matcher,
    pub action: ActionSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRule {
    name: Option<String>,
    prefix: Option<Prefix>,
    #[serde(default)]
    prefix_match: PrefixMatch,
    max_prefix_len: Option<u8>,
    min_monitors: Option<usize>,
    min_confidence: Option<String>,
    action: String,
    #[serde(default)]
    mitigators: Vec<Asn>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolicy {
    origin: Asn,
    #[serde(default, rename = "rule")]
    rules: Vec<RawRule>,
}

/// ```toml
/// origin = 65001
///
/// [[rule]]
/// name = "shorter-than-24"
/// max_prefix_len = 23
/// action = "deaggregate"
///
/// [[rule]]
/// name = "exactly-24"
/// max_prefix_len = 24
/// action = "outsource-moas"
/// mitigators = [64500]
/// ```
///
/// A manual catch-all is appended when the last rule is not one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MitigationPolicy {
    /// The operator's own ASN, used as origin for deaggregated halves.
    pub origin: Asn,
    rules: Vec<Rule>,
}

impl MitigationPolicy {
    pub fn new(origin: Asn, rules: Vec<Rule>) -> Result<Self, PolicyError> {
        let mut rules = rules;
        for (i, r) in rules.iter().enumerate() {
            if let ActionSpec::OutsourceMoas(m) = &r.action {
                if m.is_empty() {
                    return Err(PolicyError::NoMitigators(r.name.clone()));
                }
            }
            if r.matcher.is_catch_all() {
                if let Some(next) = rules.get(i + 1) {
                    return Err(PolicyError::Unreachable(next.name.clone()));
                }
            }
        }
        if !rules.last().is_some_and(|r| r.matcher.is_catch_all()) {
            rules.push(Rule {
                name: "default".into(),
                matcher: Matcher::default(),
                action: ActionSpec::Manual,
            });
        }
        Ok(MitigationPolicy { origin, rules })
    }

    /// Deaggregate anything shorter than /24, outsource /24s to `mitigators`,
    /// and leave the rest to an operator.
    pub fn default_for(origin: Asn, mitigators: Vec<Asn>) -> Result<Self, PolicyError> {
        Self::new(
            origin,
            vec![
                Rule {
                    name: "shorter-than-24".into(),
                    matcher: Matcher {
                        max_prefix_len: Some(23),
                        ..Matcher::default()
                    },
                    action: ActionSpec::Deaggregate,
                },
                Rule {
                    name: "exactly-24".into(),
                    matcher: Matcher {
                        max_prefix_len: Some(24),
                        ..Matcher::default()
                    },
                    action: ActionSpec::OutsourceMoas(mitigators),
                },
            ],
        )
    }

    pub fn parse(text: &str) -> Result<Self, PolicyError> {
        let raw: RawPolicy = toml::from_str(text)?;
        let mut rules = Vec::with_capacity(raw.rules.len());
        for (i, r) in raw.rules.into_iter().enumerate() {
            let name = r.name.unwrap_or_else(|| format!("rule-{}", i + 1));
            let min_confidence = match r.min_confidence.as_deref() {
                None => None,
                Some("stage1-suspicious") => Some(Confidence::Stage1Suspicious),
                Some("stage2-confirmed") => Some(Confidence::Stage2Confirmed),
                Some("certain") => Some(Confidence::Certain),
                Some(other) => return Err(PolicyError::UnknownConfidence(name, other.to_string())),
            };
            let action = match r.action.as_str() {
                "manual" => ActionSpec::Manual,
                "deaggregate" => ActionSpec::Deaggregate,
                "outsource-moas" => ActionSpec::OutsourceMoas(r.mitigators),
                "both" => ActionSpec::Both(r.mitigators),
                other => return Err(PolicyError::UnknownAction(name, other.to_string())),
            };
            rules.push(Rule {
                name,
                matcher: Matcher {
                    prefix: r.prefix.map(|p| (p, r.prefix_match)),
                    max_prefix_len: r.max_prefix_len,
                    min_monitors: r.min_monitors,
                    min_confidence,
                },
                action,
            });
        }
        Self::new(raw.origin, rules)
    }

    pub fn load(path: &Path) -> Result<Self, PolicyError> {
        let text = std::fs::read_to_string(path).map_err(|source| PolicyError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// First matching rule's action for `alert`, issued at its detection
    /// time. A rule that cannot be carried out (say, deaggregating a /24)
    /// degrades to manual handling with a note.
    pub fn decide(&self, alert: &Alert) -> MitigationAction {
        let rule = self
            .rules
            .iter()
            .find(|r| r.matcher.matches(alert))
            .expect("policies end with a catch-all");
        let mut action = MitigationAction {
            kind: ActionKind::Manual,
            announcements: Vec::new(),
            event_id: alert.event_id.clone(),
            issued_at: alert.detected_at,
            rule: rule.name.clone(),
            note: None,
        };
        let halves = || deaggregate(alert.prefix, self.origin).map(|h| h.to_vec());
        match &rule.action {
            ActionSpec::Manual => action.note = Some("manual handling".into()),
            ActionSpec::Deaggregate => match halves() {
                Ok(h) => {
                    action.kind = ActionKind::Deaggregate;
                    action.announcements = h;
                }
                Err(e) => action.note = Some(e.to_string()),
            },
            ActionSpec::OutsourceMoas(m) => {
                action.kind = ActionKind::OutsourceMoas;
                action.announcements =
                    moas_announcements(alert.prefix, m).expect("validated non-empty");
            }
            ActionSpec::Both(m) => {
                let mut intents: Vec<Intent> = Vec::new();
                let mut notes = vec!["contact upstream operators".to_string()];
                match halves() {
                    Ok(h) => intents.extend(h),
                    Err(e) => notes.push(e.to_string()),
                }
                if let Ok(extra) = moas_announcements(alert.prefix, m) {
                    intents.extend(extra);
                }
                action.kind = ActionKind::Both;
                action.announcements = intents;
                action.note = Some(notes.join("; "));
            }
        }
        action
    }
}

/// Free-function form of [`MitigationPolicy::decide`].
pub fn decide(policy: &MitigationPolicy, alert: &Alert) -> MitigationAction {
    policy.decide(alert)
}
