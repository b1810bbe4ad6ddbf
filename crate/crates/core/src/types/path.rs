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

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::TypeError;

/// An autonomous system number. Zero is reserved and never constructed.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Asn(u32);

impl Asn {
    pub fn new(value: u32) -> Result<Self, TypeError> {
        if value == 0 {
            return Err(TypeError::ZeroAsn);
        }
        Ok(Asn(value))
    }

    pub fn value(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Asn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Asn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AS{}", self.0)
    }
}

impl FromStr for Asn {
    type Err = TypeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let t = t
            .strip_prefix("AS")
            .or_else(|| t.strip_prefix("as"))
            .unwrap_or(t);
        let v: u32 = t
            .parse()
            .map_err(|_| TypeError::MalformedAsn(s.to_string()))?;
        Asn::new(v)
    }
}

impl TryFrom<u32> for Asn {
    type Error = TypeError;

    fn try_from(value: u32) -> Result<Self, Self::Error> {
        Asn::new(value)
    }
}

impl Serialize for Asn {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u32(self.0)
    }
}

impl<'de> Deserialize<'de> for Asn {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Asn::new(u32::deserialize(deserializer)?).map_err(serde::de::Error::custom)
    }
}

/// A directed AS adjacency as it appears in an AS path: `from` is the AS
/// farther from the origin.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DirectedLink {
    pub from: Asn,
    pub to: Asn,
}

impl DirectedLink {
    pub fn new(from: Asn, to: Asn) -> Result<Self, TypeError> {
        if from == to {
            return Err(TypeError::SelfLink(from));
        }
        Ok(DirectedLink { from, to })
    }

    pub fn reversed(self) -> DirectedLink {
        DirectedLink {
            from: self.to,
            to: self.from,
        }
    }
}

impl fmt::Debug for DirectedLink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.from, self.to)
    }
}

impl fmt::Display for DirectedLink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// AS path with the most recent appender leftmost and the origin rightmost.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AsPath(Vec<Asn>);

impl AsPath {
    pub fn new(hops: Vec<Asn>) -> Result<Self, TypeError> {
        if hops.is_empty() {
            return Err(TypeError::EmptyPath);
        }
        Ok(AsPath(hops))
    }

    pub fn from_u32s(hops: &[u32]) -> Result<Self, TypeError> {
        let hops = hops
            .iter()
            .map(|&v| Asn::new(v))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(hops)
    }

    pub fn single(asn: Asn) -> Self {
        AsPath(vec![asn])
    }

    pub fn origin(&self) -> Asn {
        *self.0.last().expect("AsPath is never empty")
    }

    /// The leftmost AS, i.e. the neighbor that announced this path.
    pub fn head(&self) -> Asn {
        self.0[0]
    }

    /// Neighbor of the origin, if the path has one.
    pub fn origin_neighbor(&self) -> Option<Asn> {
        let n = self.0.len();
        (n >= 2).then(|| self.0[n - 2])
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn hops(&self) -> &[Asn] {
        &self.0
    }

    pub fn contains(&self, asn: Asn) -> bool {
        self.0.contains(&asn)
    }

    pub fn has_loop(&self) -> bool {
        let h = &self.0;
        (1..h.len()).any(|i| h[..i].contains(&h[i]))
    }

    /// Removes consecutive duplicates introduced by AS-path prepending.
    pub fn collapse_prepending(&self) -> AsPath {
        let mut hops = self.0.clone();
        hops.dedup();
        AsPath(hops)
    }

    /// Directed links from left to right. Looped paths are rejected.
    pub fn links(&self) -> Result<Vec<DirectedLink>, TypeError> {
        if self.has_loop() {
            return Err(TypeError::LoopedPath(self.clone()));
        }
        Ok(self
            .0
            .windows(2)
            .map(|w| DirectedLink {
                from: w[0],
                to: w[1],
            })
            .collect())
    }

    pub fn prepend(&self, asn: Asn) -> AsPath {
        let mut hops = Vec::with_capacity(self.0.len() + 1);
        hops.push(asn);
        hops.extend_from_slice(&self.0);
        AsPath(hops)
    }
}

impl fmt::Debug for AsPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for AsPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Serialize for AsPath {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for AsPath {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        AsPath::new(Vec::<Asn>::deserialize(deserializer)?).map_err(serde::de::Error::custom)
    }
}
