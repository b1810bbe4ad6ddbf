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

//! Newline-delimited JSON replay and a channel-fed live source.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::sync::mpsc::{sync_channel, Receiver, SyncSender};
use std::time::Duration;

use super::record::parse_line;
use super::{check_order, FeedError, FeedSource};
use crate::types::BgpUpdate;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Speed {
    AsFastAsPossible,
    /// Sleep between records for the recorded gap divided by the multiplier.
    RealTime(f64),
}

impl std::str::FromStr for Speed {
    type Err = String;

    /// `fast` or `real:X`.
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "fast" {
            return Ok(Speed::AsFastAsPossible);
        }
        let m = s
            .strip_prefix("real:")
            .and_then(|x| x.parse::<f64>().ok())
            .filter(|x| x.is_finite() && *x > 0.0)
            .ok_or_else(|| format!("invalid speed {s:?}, expected fast or real:MULTIPLIER"))?;
        Ok(Speed::RealTime(m))
    }
}

pub struct ReplayFeed<R> {
    label: String,
    lines: std::io::Lines<BufReader<R>>,
    line_no: usize,
    speed: Speed,
    strict: bool,
    last: Option<u64>,
    skipped: usize,
}

impl<R: Read> ReplayFeed<R> {
    pub fn new(label: impl Into<String>, reader: R, speed: Speed) -> Self {
        ReplayFeed {
            label: label.into(),
            lines: BufReader::new(reader).lines(),
            line_no: 0,
            speed,
            strict: false,
            last: None,
            skipped: 0,
        }
    }

    /// In strict mode malformed or out-of-order records abort the stream;
    /// otherwise they are skipped and counted.
    pub fn strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    pub fn skipped(&self) -> usize {
        self.skipped
    }
}

/// Opens a replay file labelled with its path.
pub fn open_replay(path: &Path, speed: Speed, strict: bool) -> Result<ReplayFeed<File>, FeedError> {
    let label = path.display().to_string();
    let file = File::open(path).map_err(|source| FeedError::Io {
        label: label.clone(),
        source,
    })?;
    Ok(ReplayFeed::new(label, file, speed).strict(strict))
}

impl<R: Read + Send> FeedSource for ReplayFeed<R> {
    fn label(&self) -> &str {
        &self.label
    }

    fn next_update(&mut self) -> Option<Result<BgpUpdate, FeedError>> {
        loop {
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(source) => {
                    return Some(Err(FeedError::Io {
                        label: self.label.clone(),
                        source,
                    }))
                }
            };
            self.line_no += 1;
            if line.is_empty() {
                continue;
            }
            let update = match parse_line(&line) {
                Ok(u) => u,
                Err(source) if self.strict => {
                    return Some(Err(FeedError::Malformed {
                        label: self.label.clone(),
                        line: self.line_no,
                        source,
                    }))
                }
                Err(_) => {
                    self.skipped += 1;
                    continue;
                }
            };
            let previous = self.last;
            match check_order(&self.label, &mut self.last, update) {
                Ok(u) => {
                    if let (Speed::RealTime(m), Some(prev)) = (self.speed, previous) {
                        let gap = (u.timestamp - prev) as f64 / m;
                        if gap > 0.0 {
                            std::thread::sleep(Duration::from_secs_f64(gap));
                        }
                    }
                    return Some(Ok(u));
                }
                Err(e) if self.strict => return Some(Err(e)),
                Err(_) => {
                    self.skipped += 1;
                    continue;
                }
            }
        }
    }
}

/// Live source fed through a bounded channel; senders block when full.
pub struct ChannelFeed {
    label: String,
    rx: Receiver<BgpUpdate>,
    last: Option<u64>,
}

#[derive(Clone)]
pub struct LiveSender(SyncSender<BgpUpdate>);

impl LiveSender {
    /// Blocks while the buffer is full. Fails once the feed is dropped.
    pub fn send(&self, update: BgpUpdate) -> Result<(), BgpUpdate> {
        self.0.send(update).map_err(|e| e.0)
    }
}

impl ChannelFeed {
    pub fn new(label: impl Into<String>, buffer: usize) -> (Self, LiveSender) {
        let (tx, rx) = sync_channel(buffer);
        (
            ChannelFeed {
                label: label.into(),
                rx,
                last: None,
            },
            LiveSender(tx),
        )
    }
}

impl FeedSource for ChannelFeed {
    fn label(&self) -> &str {
        &self.label
    }

    fn next_update(&mut self) -> Option<Result<BgpUpdate, FeedError>> {
        let u = self.rx.recv().ok()?;
        Some(check_order(&self.label, &mut self.last, u))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feeds::{collect, to_line};
    use crate::types::{AsPath, Asn};

    fn update(ts: u64) -> BgpUpdate {
        BgpUpdate::announce(
            ts,
            Asn::new(7).unwrap(),
            "10.0.0.0/23".parse().unwrap(),
            AsPath::from_u32s(&[7, 1]).unwrap(),
        )
    }

    fn file(ts: &[u64]) -> String {
        ts.iter().map(|t| to_line(&update(*t)) + "\n").collect()
    }

    #[test]
    fn preserves_order() {
        let text = file(&[1, 2, 3]);
        let got = collect(ReplayFeed::new(
            "f",
            text.as_bytes(),
            Speed::AsFastAsPossible,
        ))
        .unwrap();
        assert_eq!(
            got.iter().map(|u| u.timestamp).collect::<Vec<_>>(),
            vec![1, 2, 3]
        );
    }

    #[test]
    fn empty_file() {
        let got = collect(ReplayFeed::new("f", "".as_bytes(), Speed::AsFastAsPossible)).unwrap();
        assert!(got.is_empty());
    }

    #[test]
    fn out_of_order_strict_vs_lenient() {
        let text = file(&[5, 3, 6]);
        let strict = ReplayFeed::new("f", text.as_bytes(), Speed::AsFastAsPossible).strict(true);
        assert!(matches!(collect(strict), Err(FeedError::OutOfOrder { .. })));
        let mut lenient = ReplayFeed::new("f", text.as_bytes(), Speed::AsFastAsPossible);
        let mut got = Vec::new();
        while let Some(u) = lenient.next_update() {
            got.push(u.unwrap().timestamp);
        }
        assert_eq!(got, vec![5, 6]);
        assert_eq!(lenient.skipped(), 1);
    }

    #[test]
    fn malformed_lines_counted() {
        let text = format!("{}garbage\n{}", file(&[1]), file(&[2]));
        let mut f = ReplayFeed::new("f", text.as_bytes(), Speed::AsFastAsPossible);
        let mut n = 0;
        while let Some(u) = f.next_update() {
            u.unwrap();
            n += 1;
        }
        assert_eq!((n, f.skipped()), (2, 1));
        let strict = ReplayFeed::new("f", text.as_bytes(), Speed::AsFastAsPossible).strict(true);
        assert!(matches!(
            collect(strict),
            Err(FeedError::Malformed { line: 2, .. })
        ));
    }

    #[test]
    fn real_time_sleeps_scaled_gap() {
        let text = file(&[0, 1]);
        let start = std::time::Instant::now();
        collect(ReplayFeed::new("f", text.as_bytes(), Speed::RealTime(20.0))).unwrap();
        assert!(start.elapsed() >= Duration::from_millis(45));
    }

    #[test]
    fn speed_parsing() {
        assert_eq!("fast".parse::<Speed>().unwrap(), Speed::AsFastAsPossible);
        assert_eq!("real:2.5".parse::<Speed>().unwrap(), Speed::RealTime(2.5));
        for bad in ["real:0", "real:-1", "slow", "real:x"] {
            assert!(bad.parse::<Speed>().is_err());
        }
    }

    #[test]
    fn channel_feed_delivers_and_ends() {
        let (mut feed, tx) = ChannelFeed::new("live", 2);
        let h = std::thread::spawn(move || {
            for t in [1, 2, 3] {
                tx.send(update(t)).unwrap();
            }
        });
        let mut got = Vec::new();
        while let Some(u) = feed.next_update() {
            got.push(u.unwrap().timestamp);
        }
        h.join().unwrap();
        assert_eq!(got, vec![1, 2, 3]);
    }
}
