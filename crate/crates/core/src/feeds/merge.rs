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

//! Deterministic k-way merge of timestamp-ordered sources.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::sync::mpsc::{sync_channel, Receiver};
use std::thread::JoinHandle;

use super::{FeedError, FeedSource};
use crate::types::BgpUpdate;

/// Merges sources into one stream ordered by timestamp; ties go to the
/// source whose label sorts first, then to file order.
pub struct MergedFeed<S> {
    label: String,
    sources: Vec<S>,
    heap: BinaryHeap<Reverse<(u64, usize, u64)>>,
    heads: Vec<Option<BgpUpdate>>,
    seq: Vec<u64>,
    error: Option<FeedError>,
    primed: bool,
}

pub fn merge<S: FeedSource>(mut sources: Vec<S>) -> Result<MergedFeed<S>, FeedError> {
    if sources.is_empty() {
        return Err(FeedError::NoSources);
    }
    // Stable sort keeps the caller's order among equal labels.
    sources.sort_by(|a, b| a.label().cmp(b.label()));
    let labels: Vec<&str> = sources.iter().map(|s| s.label()).collect();
    let label = format!("merge({})", labels.join(","));
    let n = sources.len();
    Ok(MergedFeed {
        label,
        sources,
        heap: BinaryHeap::with_capacity(n),
        heads: vec![None; n],
        seq: vec![0; n],
        error: None,
        primed: false,
    })
}

impl<S: FeedSource> MergedFeed<S> {
    fn pull(&mut self, i: usize) {
        match self.sources[i].next_update() {
            Some(Ok(u)) => {
                self.heap.push(Reverse((u.timestamp, i, self.seq[i])));
                self.seq[i] += 1;
                self.heads[i] = Some(u);
            }
            Some(Err(e)) if self.error.is_none() => self.error = Some(e),
            Some(Err(_)) => {}
            None => {}
        }
    }
}

impl<S: FeedSource> FeedSource for MergedFeed<S> {
    fn label(&self) -> &str {
        &self.label
    }

    fn next_update(&mut self) -> Option<Result<BgpUpdate, FeedError>> {
        if !self.primed {
            self.primed = true;
            for i in 0..self.sources.len() {
                self.pull(i);
            }
        }
        if let Some(e) = self.error.take() {
            self.heap.clear();
            return Some(Err(e));
        }
        let Reverse((_, i, _)) = self.heap.pop()?;
        let u = self.heads[i].take().expect("heap entries have heads");
        self.pull(i);
        Some(Ok(u))
    }
}

/// Forwards a source's updates over a bounded channel.
struct ChannelSource {
    label: String,
    rx: Receiver<Result<BgpUpdate, FeedError>>,
}

impl FeedSource for ChannelSource {
    fn label(&self) -> &str {
        &self.label
    }

    fn next_update(&mut self) -> Option<Result<BgpUpdate, FeedError>> {
        self.rx.recv().ok()
    }
}

/// A merge whose sources each run on their own thread. Every source and the
/// merged output sit behind channels of `buffer` entries, so producers block
/// while the consumer lags.
pub struct ThreadedMerge {
    label: String,
    rx: Receiver<Result<BgpUpdate, FeedError>>,
    handles: Vec<JoinHandle<()>>,
}

pub fn spawn_merge<S: FeedSource + 'static>(
    sources: Vec<S>,
    buffer: usize,
) -> Result<ThreadedMerge, FeedError> {
    if sources.is_empty() {
        return Err(FeedError::NoSources);
    }
    let buffer = buffer.max(1);
    let mut handles = Vec::new();
    let mut channels = Vec::new();
    for mut s in sources {
        let (tx, rx) = sync_channel(buffer);
        channels.push(ChannelSource {
            label: s.label().to_string(),
            rx,
        });
        handles.push(std::thread::spawn(move || {
            while let Some(u) = s.next_update() {
                let stop = u.is_err();
                if tx.send(u).is_err() || stop {
                    break;
                }
            }
        }));
    }
    let mut merged = merge(channels)?;
    let label = merged.label().to_string();
    let (tx, rx) = sync_channel(buffer);
    handles.push(std::thread::spawn(move || {
        while let Some(u) = merged.next_update() {
            let stop = u.is_err();
            if tx.send(u).is_err() || stop {
                break;
            }
        }
    }));
    Ok(ThreadedMerge { label, rx, handles })
}

impl FeedSource for ThreadedMerge {
    fn label(&self) -> &str {
        &self.label
    }

    fn next_update(&mut self) -> Option<Result<BgpUpdate, FeedError>> {
        match self.rx.recv() {
            Ok(u) => Some(u),
            Err(_) => {
                for h in self.handles.drain(..) {
                    if h.join().is_err() {
                        return Some(Err(FeedError::SourcePanicked(self.label.clone())));
                    }
                }
                None
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feeds::{collect, VecFeed};
    use crate::types::{AsPath, Asn};
    use proptest::prelude::*;

    fn update(ts: u64, monitor: u32) -> BgpUpdate {
        BgpUpdate::announce(
            ts,
            Asn::new(monitor).unwrap(),
            "10.0.0.0/23".parse().unwrap(),
            AsPath::from_u32s(&[monitor, 1]).unwrap(),
        )
    }

    #[test]
    fn orders_by_timestamp() {
        let a = VecFeed::new("a", vec![update(5, 2)]);
        let b = VecFeed::new("b", vec![update(3, 3)]);
        let got = collect(merge(vec![a, b]).unwrap()).unwrap();
        assert_eq!(
            got.iter().map(|u| u.timestamp).collect::<Vec<_>>(),
            vec![3, 5]
        );
    }

    #[test]
    fn ties_follow_label_then_file_order() {
        let b = VecFeed::new("b", vec![update(7, 20), update(7, 21)]);
        let a = VecFeed::new("a", vec![update(7, 10), update(7, 11)]);
        let got = collect(merge(vec![b, a]).unwrap()).unwrap();
        let monitors: Vec<u32> = got.iter().map(|u| u.monitor.value()).collect();
        assert_eq!(monitors, vec![10, 11, 20, 21]);
    }

    #[test]
    fn single_source_is_identity() {
        let ups = vec![update(1, 2), update(1, 3), update(4, 2)];
        let got = collect(merge(vec![VecFeed::new("x", ups.clone())]).unwrap()).unwrap();
        assert_eq!(got, ups);
    }

    #[test]
    fn errors_propagate() {
        let bad = VecFeed::new("bad", vec![update(5, 2), update(4, 2)]);
        let ok = VecFeed::new("ok", vec![update(6, 3)]);
        assert!(matches!(
            collect(merge(vec![bad, ok]).unwrap()),
            Err(FeedError::OutOfOrder { .. })
        ));
        assert!(matches!(
            merge(Vec::<VecFeed>::new()),
            Err(FeedError::NoSources)
        ));
    }

    fn sources_strategy() -> impl Strategy<Value = Vec<Vec<u64>>> {
        proptest::collection::vec(
            proptest::collection::vec(0u64..50, 0..30).prop_map(|mut v| {
                v.sort_unstable();
                v
            }),
            1..6,
        )
    }

    fn build(sources: &[Vec<u64>]) -> Vec<VecFeed> {
        sources
            .iter()
            .enumerate()
            .map(|(i, ts)| {
                let ups = ts.iter().map(|t| update(*t, i as u32 + 1)).collect();
                VecFeed::new(format!("s{i}"), ups)
            })
            .collect()
    }

    proptest! {
        #[test]
        fn stable_k_way_merge(sources in sources_strategy()) {
            let got = collect(merge(build(&sources)).unwrap()).unwrap();
            let total: usize = sources.iter().map(Vec::len).sum();
            prop_assert_eq!(got.len(), total);
            // Oracle: concatenate in label order and stable-sort by timestamp.
            let mut expected: Vec<(u64, u32)> = Vec::new();
            for (i, ts) in sources.iter().enumerate() {
                expected.extend(ts.iter().map(|t| (*t, i as u32 + 1)));
            }
            expected.sort_by_key(|(t, _)| *t);
            let got: Vec<(u64, u32)> = got.iter().map(|u| (u.timestamp, u.monitor.value())).collect();
            prop_assert_eq!(got, expected);
        }

        #[test]
        fn threaded_merge_matches_sequential(sources in sources_strategy(), buffer in 1usize..4) {
            let seq = collect(merge(build(&sources)).unwrap()).unwrap();
            let thr = collect(spawn_merge(build(&sources), buffer).unwrap()).unwrap();
            prop_assert_eq!(seq, thr);
        }
    }
}
