//! Attack transcripts: one JSON object per attack.
//!
//! Schema (field order is fixed by declaration order):
//!
//! ```json
//! {
//!   "config": { ... },                 // verbatim AttackConfig echo
//!   "excluded_rounding": "nearest_ties_even",
//!   "true_key": {"q": 17, "r": 400},
//!   "forged_message": 77,
//!   "rounds": [
//!     {"round": 1, "message": 12, "encrypted_tag": 5,
//!      "possible_tags": 115, "survivors": 243360}
//!   ],
//!   "outcome": {"type": "forged_at", "round": 131,
//!               "forged_tag": 9, "recovered_otp": 88}
//! }
//! ```
//!
//! `rounds[i].tag_set` is present only when the config asked for it and
//! lists the round's possible tags in ascending order, which is enough to
//! replay every elimination offline.

use serde::{Deserialize, Serialize};

use crate::hash_family::HashKey;

use super::AttackConfig;

/// What one per-round record looks like on the wire.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// 1-based, consecutive.
    pub round: u64,
    pub message: u64,
    pub encrypted_tag: u32,
    /// Cardinality of the round's possible-tag set.
    pub possible_tags: u32,
    /// Candidate population after this round's elimination.
    pub survivors: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tag_set: Option<Vec<u32>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AttackOutcome {
    IdentifiedAt {
        round: u64,
    },
    ForgedAt {
        round: u64,
        forged_tag: u32,
        /// Absent under the tag-only ablation stop.
        recovered_otp: Option<u32>,
    },
    ExhaustedBudget {
        rounds: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackTranscript {
    pub config: AttackConfig,
    /// Rounding rule behind `FixedFraction` knowledge; recorded so the
    /// excluded-set size is reproducible from the transcript alone.
    pub excluded_rounding: String,
    pub true_key: HashKey,
    pub forged_message: u64,
    pub rounds: Vec<RoundRecord>,
    pub outcome: AttackOutcome,
}

impl AttackTranscript {
    pub(crate) fn new(
        config: AttackConfig,
        true_key: HashKey,
        forged_message: u64,
        rounds: Vec<RoundRecord>,
        outcome: AttackOutcome,
    ) -> Self {
        Self {
            config,
            excluded_rounding: "nearest_ties_even".to_owned(),
            true_key,
            forged_message,
            rounds,
            outcome,
        }
    }

    /// Rounds until the attack's stop fired, if it did.
    pub fn stop_round(&self) -> Option<u64> {
        match self.outcome {
            AttackOutcome::IdentifiedAt { round } | AttackOutcome::ForgedAt { round, .. } => {
                Some(round)
            }
            AttackOutcome::ExhaustedBudget { .. } => None,
        }
    }

    /// Survivor fraction after the first round, `|H_1| / |H|` — an unbiased
    /// view of the per-round surviving ratio before any conditioning on
    /// earlier survival.
    pub fn first_round_survivor_fraction(&self) -> Option<f64> {
        self.rounds
            .first()
            .map(|r| r.survivors as f64 / self.config.family.family_size() as f64)
    }
}
