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

//! Update sources: file replay, ordered multi-source merge, live channels,
//! and synthetic hijack feeds.

mod merge;
mod record;
mod replay;
mod synth;

pub use merge::{merge, spawn_merge, MergedFeed, ThreadedMerge};
pub use record::{parse_line, to_line, RecordError, UpdateRecord};
pub use replay::{open_replay, ChannelFeed, LiveSender, ReplayFeed, Speed};
pub use synth::{
    manifest_path, synth_hijack_feed, synth_mitigation_feed, write_feed, SynthFeed, SynthManifest,
    HIJACK_LEAD,
};

use thiserror::Error;

use crate::types::BgpUpdate;

#[derive(Debug, Error)]
pub enum FeedError {
    #[error("{label}: I/O error: {source}")]
    Io {
        label: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{label} line {line}: {source}")]
    Malformed {
        label: String,
        line: usize,
        #[source]
        source: RecordError,
    },
    #[error("{label}: timestamp went backwards from {previous} to {current}")]
    OutOfOrder {
        label: String,
        previous: u64,
        current: u64,
    },
    #[error("merge needs at least one source")]
    NoSources,
    #[error("source thread for {0} panicked")]
    SourcePanicked(String),
}

/// An ordered stream of updates with non-decreasing timestamps.
pub trait FeedSource: Send {
    fn label(&self) -> &str;

    /// The next update, `None` at end of stream.
    fn next_update(&mut self) -> Option<Result<BgpUpdate, FeedError>>;
}

impl<S: FeedSource + ?Sized> FeedSource for Box<S> {
    fn label(&self) -> &str {
        (**self).label()
    }

    fn next_update(&mut self) -> Option<Result<BgpUpdate, FeedError>> {
        (**self).next_update()
    }
}

/// In-memory source, mostly for tests and synthetic runs.
#[derive(Debug, Clone)]
pub struct VecFeed {
    label: String,
    updates: std::vec::IntoIter<BgpUpdate>,
    last: Option<u64>,
}

impl VecFeed {
    pub fn new(label: impl Into<String>, updates: Vec<BgpUpdate>) -> Self {
        VecFeed {
            label: label.into(),
            updates: updates.into_iter(),
            last: None,
        }
    }
}

impl FeedSource for VecFeed {
    fn label(&self) -> &str {
        &self.label
    }

    fn next_update(&mut self) -> Option<Result<BgpUpdate, FeedError>> {
        let u = self.updates.next()?;
        Some(check_order(&self.label, &mut self.last, u))
    }
}

pub(crate) fn check_order(
    label: &str,
    last: &mut Option<u64>,
    u: BgpUpdate,
) -> Result<BgpUpdate, FeedError> {
    if let Some(prev) = *last {
        if u.timestamp < prev {
            return Err(FeedError::OutOfOrder {
                label: label.to_string(),
                previous: prev,
                current: u.timestamp,
            });
        }
    }
    *last = Some(u.timestamp);
    Ok(u)
}

/// Drains a source, stopping at the first error.
pub fn collect(mut source: impl FeedSource) -> Result<Vec<BgpUpdate>, FeedError> {
    let mut out = Vec::new();
    while let Some(u) = source.next_update() {
        out.push(u?);
    }
    Ok(out)
}
