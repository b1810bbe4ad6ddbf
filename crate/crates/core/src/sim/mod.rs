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

//! AS-level route propagation and hijack experiments.

mod experiment;
mod hijack;
mod propagate;

pub use experiment::{
    run_experiment, sample_pairs, Aggregate, ExperimentFamily, ExperimentResult, ExperimentSpec,
    MitigatorSelection, RunRow, StrategySpec, CSV_HEADER,
};
pub use hijack::{
    impact, simulate_hijack, simulate_hijack_from, simulate_mitigation, subprefix_len, visibility,
    Baseline, HijackScenario, MitigationStrategy, SimOutcome, Visibility, FILLER_ASN_TOP,
};
pub use propagate::{
    propagate, propagate_filtered, Announcement, ImportFilter, LearnedFrom, Origination, PrefixRib,
    RibState, SelectedRoute,
};

use crate::types::{AsPath, Asn, Prefix};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("{0:?} is not in the topology")]
    UnknownAs(Asn),
    #[error("{0:?} originates {1} more than once")]
    DuplicateOrigin(Asn, Prefix),
    #[error("victim and hijacker are both {0:?}")]
    SameVictimAndHijacker(Asn),
    #[error("{0} is too long to be subdivided")]
    CannotSubdivide(Prefix),
    #[error("an unaltered path on the victim's exact prefix is not a hijack")]
    NotAHijack,
    #[error("{0:?} has no legitimate route to {1} to re-announce")]
    NoLegitimatePath(Asn, Prefix),
    #[error("forged path needs {expected} intermediate hops, got {got}")]
    ForgedHopCount { expected: usize, got: usize },
    #[error("forged path {0:?} has a loop")]
    ForgedLoop(AsPath),
    #[error("baseline was computed for a different victim or prefix")]
    BaselineMismatch,
    #[error("MOAS needs at least one mitigator")]
    NoMitigators,
    #[error("the hijacker {0:?} cannot act as a mitigator")]
    HijackerAsMitigator(Asn),
    #[error("{requested} pairs requested but only {available} exist")]
    TooManyPairs { requested: u64, available: u64 },
    #[error("invalid strategy {0:?}")]
    BadStrategy(String),
    #[error("invalid experiment: {0}")]
    BadExperiment(String),
}
