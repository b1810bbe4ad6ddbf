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
use std::net::{IpAddr, Ipv4Addr, Ipv6Addr};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::TypeError;

/// Address family of a [`Prefix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    V4,
    V6,
}

impl Family {
    pub fn max_len(self) -> u8 {
        match self {
            Family::V4 => 32,
            Family::V6 => 128,
        }
    }
}

/// An IP prefix in canonical form (all host bits below the length are zero).
///
/// The address is kept right-aligned in a `u128`, so IPv4 prefixes only use
/// the low 32 bits. Ordering is by family, then address, then length.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prefix {
    family: Family,
    bits: u128,
    len: u8,
}

fn mask(len: u8, width: u8) -> u128 {
    if len == 0 {
        return 0;
    }
    let ones = if len == 128 {
        u128::MAX
    } else {
        (1u128 << len) - 1
    };
    ones << (width - len)
}

impl Prefix {
    /// Strict constructor: rejects host bits set below `len`.
    pub fn new(addr: IpAddr, len: u8) -> Result<Self, TypeError> {
        let p = Self::truncating(addr, len)?;
        if p.addr() != addr {
            return Err(TypeError::HostBitsSet(format!("{addr}/{len}")));
        }
        Ok(p)
    }

    /// Builds a prefix, zeroing host bits instead of rejecting them.
    pub fn truncating(addr: IpAddr, len: u8) -> Result<Self, TypeError> {
        let (family, raw) = match addr {
            IpAddr::V4(a) => (Family::V4, u32::from(a) as u128),
            IpAddr::V6(a) => (Family::V6, u128::from(a)),
        };
        if len > family.max_len() {
            return Err(TypeError::LengthOutOfRange {
                len: len as u32,
                max: family.max_len(),
            });
        }
        Ok(Prefix {
            family,
            bits: raw & mask(len, family.max_len()),
            len,
        })
    }

    pub fn v4(a: u8, b: u8, c: u8, d: u8, len: u8) -> Result<Self, TypeError> {
        Self::new(IpAddr::V4(Ipv4Addr::new(a, b, c, d)), len)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> u8 {
        self.len
    }

    pub fn is_default(&self) -> bool {
        self.len == 0
    }

    pub fn addr(&self) -> IpAddr {
        match self.family {
            Family::V4 => IpAddr::V4(Ipv4Addr::from(self.bits as u32)),
            Family::V6 => IpAddr::V6(Ipv6Addr::from(self.bits)),
        }
    }

    /// True if `other` lies inside `self` (equality included).
    pub fn contains(&self, other: &Prefix) -> bool {
        self.family == other.family
            && other.len >= self.len
            && other.bits & mask(self.len, self.family.max_len()) == self.bits
    }

    /// True iff `self` is strictly more specific than `parent` and inside it.
    pub fn is_subprefix_of(&self, parent: &Prefix) -> Result<bool, TypeError> {
        if self.family != parent.family {
            return Err(TypeError::FamilyMismatch(*self, *parent));
        }
        Ok(self.len > parent.len && parent.contains(self))
    }

    pub fn overlaps(&self, other: &Prefix) -> bool {
        self.contains(other) || other.contains(self)
    }

    /// Splits the prefix into its two `len + 1` halves.
    pub fn halves(&self) -> Option<(Prefix, Prefix)> {
        if self.len >= self.family.max_len() {
            return None;
        }
        let len = self.len + 1;
        let high = 1u128 << (self.family.max_len() - len);
        let lo = Prefix { len, ..*self };
        let hi = Prefix {
            bits: self.bits | high,
            len,
            ..*self
        };
        Some((lo, hi))
    }

    /// The first (lowest-addressed) prefix of length `len` inside `self`.
    pub fn first_subprefix(&self, len: u8) -> Option<Prefix> {
        if len < self.len || len > self.family.max_len() {
            return None;
        }
        Some(Prefix { len, ..*self })
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.addr(), self.len)
    }
}

impl fmt::Debug for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Prefix {
    type Err = TypeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (addr, len) = s
            .trim()
            .split_once('/')
            .ok_or_else(|| TypeError::MalformedPrefix(s.to_string()))?;
        let addr: IpAddr = addr
            .parse()
            .map_err(|_| TypeError::MalformedPrefix(s.to_string()))?;
        if len.is_empty() || len.len() > 3 || !len.bytes().all(|b| b.is_ascii_digit()) {
            return Err(TypeError::MalformedPrefix(s.to_string()));
        }
        let len: u32 = len
            .parse()
            .map_err(|_| TypeError::MalformedPrefix(s.to_string()))?;
        let max = if addr.is_ipv4() { 32 } else { 128 };
        if len > max {
            return Err(TypeError::LengthOutOfRange {
                len,
                max: max as u8,
            });
        }
        Prefix::new(addr, len as u8)
    }
}

impl Serialize for Prefix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Prefix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Longest-prefix-match query over a small routing table.
///
/// Returns true when at least one address inside `target` is forwarded, under
/// longest-prefix match across `routes`, by a route for which `pred` holds.
/// Addresses with no covering route are ignored.
pub fn longest_match_any<T>(
    target: &Prefix,
    routes: &[(Prefix, T)],
    pred: impl Fn(&T) -> bool + Copy,
) -> bool {
    let relevant: Vec<&(Prefix, T)> = routes.iter().filter(|(p, _)| p.overlaps(target)).collect();
    region_any(target, &relevant, pred)
}

fn region_any<T>(
    region: &Prefix,
    routes: &[&(Prefix, T)],
    pred: impl Fn(&T) -> bool + Copy,
) -> bool {
    let has_inner = routes
        .iter()
        .any(|(p, _)| p.len() > region.len() && region.contains(p));
    if !has_inner {
        return routes
            .iter()
            .filter(|(p, _)| p.contains(region))
            .max_by_key(|(p, _)| p.len())
            .is_some_and(|(_, v)| pred(v));
    }
    match region.halves() {
        Some((lo, hi)) => region_any(&lo, routes, pred) || region_any(&hi, routes, pred),
        None => false,
    }
}
