//! Eve's covert attack: per-round candidate elimination driven by partial
//! one-time-pad knowledge, with both stop conditions — identify the secret
//! hash function outright, or the weaker (and earlier) condition that the
//! survivors agree both on Eve's forged message and on Alice's current
//! message, which yields a valid forged tag plus the recovered pad value.
//!
//! Eve is passive: she listens to honest rounds, shrinks her hypothesis set,
//! and launches nothing until the stop condition holds.

mod candidate_set;
mod tag_set;
mod transcript;

pub use candidate_set::{CandidateSet, DEFAULT_MEMORY_LIMIT_BYTES};
pub use tag_set::TagSet;
pub use transcript::{AttackOutcome, AttackTranscript, RoundRecord};

use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::auth::OtpKey;
use crate::hash_family::{eval_unchecked, HashFamilyError, HashFamilyParams, HashKey};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AttackError {
    #[error(transparent)]
    HashFamily(#[from] HashFamilyError),
    #[error("excluded fraction {0} outside [0, 1)")]
    FractionOutOfRange(f64),
    #[error("knowledge excludes {excluded} of {tag_space} pad values; at least one must remain")]
    InvalidKnowledge { excluded: u32, tag_space: u32 },
    #[error("possible pad-value set is empty")]
    EmptyPossibleOtpSet,
    #[error("candidate set emptied: corrupted transcript or internal bug")]
    EmptyCandidateSet,
    #[error("true key eliminated at round {round}: internal inconsistency")]
    TrueKeyEliminated { round: u64 },
    #[error("candidate bitmap needs {needed_bytes} bytes, limit is {limit_bytes}")]
    MemoryLimit { needed_bytes: u64, limit_bytes: u64 },
    #[error("round budget must be >= 1")]
    InvalidBudget,
}

/// How much Eve knows about the pad each round: a set of pad values she can
/// rule out, resampled independently every round and never containing the
/// true value.
///
/// `FixedFraction` excludes `round(fraction * |T|)` values (ties to even);
/// `FixedCount` pins the excluded count directly, which also pins the
/// per-round surviving-tag ratio to exactly `(|T| - count) / |T|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum KnowledgeModel {
    FixedFraction { excluded_fraction: f64 },
    FixedCount { excluded: u32 },
}

impl KnowledgeModel {
    /// Number of pad values excluded per round for a given tag space.
    pub fn excluded_count(&self, tag_space: u32) -> Result<u32, AttackError> {
        let count = match *self {
            KnowledgeModel::FixedFraction { excluded_fraction } => {
                if !excluded_fraction.is_finite()
                    || !(0.0..1.0).contains(&excluded_fraction)
                {
                    return Err(AttackError::FractionOutOfRange(excluded_fraction));
                }
                (excluded_fraction * tag_space as f64).round_ties_even() as u32
            }
            KnowledgeModel::FixedCount { excluded } => excluded,
        };
        if count >= tag_space {
            return Err(AttackError::InvalidKnowledge {
                excluded: count,
                tag_space,
            });
        }
        Ok(count)
    }

    /// Draws the round's possible-pad set: everything except `excluded_count`
    /// values sampled uniformly without replacement from the pad values
    /// other than `true_otp`.
    pub fn draw_possible_otps<R: Rng>(
        &self,
        rng: &mut R,
        tag_space: u32,
        true_otp: u32,
    ) -> Result<TagSet, AttackError> {
        let count = self.excluded_count(tag_space)?;
        let mut possible = TagSet::full(tag_space);
        // sample from [0, |T|-1) and shift values at or above the true pad
        // up by one, giving a uniform draw that avoids it
        for idx in sample_indices(rng, tag_space as usize - 1, count as usize) {
            let v = idx as u32;
            possible.remove(if v >= true_otp { v + 1 } else { v });
        }
        Ok(possible)
    }
}

/// When the attack declares success.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopCondition {
    /// Stop when exactly one candidate remains.
    Identify,
    /// Stop when the survivors agree on Eve's message *and* on Alice's
    /// current message (tag forgeable and pad recoverable).
    Forge,
    /// Ablation: stop on tag agreement alone, without requiring the pad.
    ForgeTagOnly,
}

/// Full configuration of one attack run; echoed verbatim into the
/// transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    pub family: HashFamilyParams,
    pub knowledge: KnowledgeModel,
    pub stop: StopCondition,
    pub round_budget: u64,
    pub seed: u64,
    /// Eve's target message; drawn uniformly at attack start when `None`.
    pub forged_message: Option<u64>,
    /// Record each round's possible-tag set in the transcript (for replay
    /// and audit; off by default to keep transcripts small).
    pub record_tag_sets: bool,
    pub memory_limit_bytes: u64,
}

impl AttackConfig {
    pub fn new(
        family: HashFamilyParams,
        knowledge: KnowledgeModel,
        stop: StopCondition,
        seed: u64,
    ) -> Self {
        Self {
            family,
            knowledge,
            stop,
            round_budget: 1_000_000,
            seed,
            forged_message: None,
            record_tag_sets: false,
            memory_limit_bytes: DEFAULT_MEMORY_LIMIT_BYTES,
        }
    }
}

/// All tags Eve cannot rule out for the round: the observed encrypted tag
/// XORed with every pad value still possible. Always contains the true
/// unencrypted tag.
pub fn possible_tags(
    observed_encrypted_tag: u32,
    possible_otps: &TagSet,
) -> Result<TagSet, AttackError> {
    if possible_otps.is_empty() {
        return Err(AttackError::EmptyPossibleOtpSet);
    }
    Ok(possible_otps.xor_shift(observed_encrypted_tag & (possible_otps.size() - 1)))
}

/// Pure form of one elimination round: the returned set holds exactly the
/// members whose hash of `m` lands in `tag_set`.
pub fn eliminate(
    candidates: &CandidateSet,
    m: u64,
    tag_set: &TagSet,
) -> Result<CandidateSet, AttackError> {
    let mut next = candidates.clone();
    next.eliminate_in_place(m, tag_set)?;
    Ok(next)
}

/// The common tag of all survivors on `m_forge`, if they agree.
pub fn forgery_ready(candidates: &CandidateSet, m_forge: u64) -> Option<u32> {
    common_tag(candidates, m_forge)
}

/// If the survivors agree on Alice's message, XORing the agreed tag out of
/// the observed encrypted tag recovers the round's pad value.
pub fn recover_otp(
    candidates: &CandidateSet,
    m_alice: u64,
    observed_encrypted_tag: u32,
) -> Option<OtpKey> {
    common_tag(candidates, m_alice).map(|t| OtpKey(observed_encrypted_tag ^ t))
}

fn common_tag(candidates: &CandidateSet, m: u64) -> Option<u32> {
    if m >= candidates.params().message_space_size() {
        return None;
    }
    let params = *candidates.params();
    let mut survivors = candidates.survivors();
    let first = survivors.next()?;
    let tag = eval_unchecked(&params, first.q, first.r, m);
    for k in survivors {
        if eval_unchecked(&params, k.q, k.r, m) != tag {
            return None;
        }
    }
    Some(tag)
}

/// Runs one seeded attack to completion (stop condition or budget).
///
/// Per-round randomness is drawn in a fixed order — message, pad, excluded
/// pad values — from a single ChaCha stream, so a `(config, seed)` pair
/// fully determines the transcript. The true key and (always) the forged
/// message are drawn before the first round, which keeps transcripts of
/// different stop conditions on the same seed aligned round for round.
pub fn run_attack(config: &AttackConfig) -> Result<AttackTranscript, AttackError> {
    if config.round_budget == 0 {
        return Err(AttackError::InvalidBudget);
    }
    let params = config.family;
    let tag_space = params.tag_space_size();
    config.knowledge.excluded_count(tag_space)?;
    if let Some(m) = config.forged_message {
        if m >= params.message_space_size() {
            return Err(HashFamilyError::MessageOutOfRange {
                message: m,
                space: params.message_space_size(),
            }
            .into());
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let true_key = HashKey {
        q: rng.random_range(1..params.prime()),
        r: rng.random_range(0..params.prime()),
    };
    let drawn_forge_target = rng.random_range(0..params.message_space_size());
    let m_forge = config.forged_message.unwrap_or(drawn_forge_target);

    let mut candidates = CandidateSet::full_with_memory_limit(&params, config.memory_limit_bytes)?;
    let mut rounds = Vec::new();

    for round in 1..=config.round_budget {
        let m = rng.random_range(0..params.message_space_size());
        let otp = rng.random_range(0..tag_space);
        let true_tag = eval_unchecked(&params, true_key.q, true_key.r, m);
        let observed = true_tag ^ otp;

        let possible_otps = config.knowledge.draw_possible_otps(&mut rng, tag_space, otp)?;
        let tags = possible_tags(observed, &possible_otps)?;
        debug_assert!(tags.contains(true_tag));

        candidates.eliminate_in_place(m, &tags)?;
        if !candidates.contains(&true_key) {
            return Err(AttackError::TrueKeyEliminated { round });
        }

        rounds.push(RoundRecord {
            round,
            message: m,
            encrypted_tag: observed,
            possible_tags: tags.len(),
            survivors: candidates.population(),
            tag_set: config.record_tag_sets.then(|| tags.to_sorted_vec()),
        });

        match config.stop {
            StopCondition::Identify => {
                if candidates.population() == 1 {
                    return Ok(AttackTranscript::new(
                        config.clone(),
                        true_key,
                        m_forge,
                        rounds,
                        AttackOutcome::IdentifiedAt { round },
                    ));
                }
            }
            StopCondition::Forge => {
                if let Some(forged_tag) = forgery_ready(&candidates, m_forge) {
                    if let Some(otp) = recover_otp(&candidates, m, observed) {
                        return Ok(AttackTranscript::new(
                            config.clone(),
                            true_key,
                            m_forge,
                            rounds,
                            AttackOutcome::ForgedAt {
                                round,
                                forged_tag,
                                recovered_otp: Some(otp.0),
                            },
                        ));
                    }
                }
            }
            StopCondition::ForgeTagOnly => {
                if let Some(forged_tag) = forgery_ready(&candidates, m_forge) {
                    return Ok(AttackTranscript::new(
                        config.clone(),
                        true_key,
                        m_forge,
                        rounds,
                        AttackOutcome::ForgedAt {
                            round,
                            forged_tag,
                            recovered_otp: None,
                        },
                    ));
                }
            }
        }
    }

    let budget = config.round_budget;
    Ok(AttackTranscript::new(
        config.clone(),
        true_key,
        m_forge,
        rounds,
        AttackOutcome::ExhaustedBudget { rounds: budget },
    ))
}

/// Configuration of the no-knowledge baseline where Eve simply guesses the
/// tag for her message each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuessConfig {
    pub tag_space_size: u32,
    pub seed: u64,
    pub round_budget: u64,
}

/// Rounds until the first successful guess, or `None` if the budget ran
/// out. Each round draws Eve's guess and the (uniform, pad-hidden) true tag;
/// success probability is `1/|T|` per round, so the stopping time is
/// geometric with mean `|T|`.
pub fn run_guessing_attack(config: &GuessConfig) -> Result<Option<u64>, AttackError> {
    if config.round_budget == 0 {
        return Err(AttackError::InvalidBudget);
    }
    debug_assert!(config.tag_space_size.is_power_of_two());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for round in 1..=config.round_budget {
        let guess = rng.random_range(0..config.tag_space_size);
        let actual = rng.random_range(0..config.tag_space_size);
        if guess == actual {
            return Ok(Some(round));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;

    fn family(msg: u64, tag: u64) -> HashFamilyParams {
        HashFamilyParams::new(msg, tag).unwrap()
    }

    #[test]
    fn excluded_count_rounding_ties_even() {
        let m = KnowledgeModel::FixedFraction { excluded_fraction: 0.1 };
        assert_eq!(m.excluded_count(128).unwrap(), 13); // 12.8 rounds up
        let m = KnowledgeModel::FixedFraction { excluded_fraction: 0.0 };
        assert_eq!(m.excluded_count(128).unwrap(), 0);
        // 0.25 * 2 = 0.5 -> ties to even -> 0
        let m = KnowledgeModel::FixedFraction { excluded_fraction: 0.25 };
        assert_eq!(m.excluded_count(2).unwrap(), 0);
        // 0.75 * 2 = 1.5 -> ties to even -> 2 == |T|: invalid
        let m = KnowledgeModel::FixedFraction { excluded_fraction: 0.75 };
        assert!(m.excluded_count(2).is_err());
        assert!(KnowledgeModel::FixedFraction { excluded_fraction: 1.0 }
            .excluded_count(128)
            .is_err());
        assert!(KnowledgeModel::FixedCount { excluded: 128 }
            .excluded_count(128)
            .is_err());
    }

    #[test]
    fn drawn_knowledge_never_excludes_true_pad() {
        let model = KnowledgeModel::FixedFraction { excluded_fraction: 0.5 };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for true_otp in 0..128u32 {
            let possible = model.draw_possible_otps(&mut rng, 128, true_otp).unwrap();
            assert!(possible.contains(true_otp));
            assert_eq!(possible.len(), 128 - 64);
        }
    }

    #[test]
    fn possible_tags_sizes() {
        let mut otps = TagSet::full(128);
        // exclude 13 values (not the true pad 5)
        for v in [0u32, 1, 2, 3, 4, 6, 7, 8, 9, 10, 11, 12, 14] {
            otps.remove(v);
        }
        let tags = possible_tags(77, &otps).unwrap();
        assert_eq!(tags.len(), 115);
        // full knowledge: singleton set maps to the unencrypted tag
        let mut only = TagSet::empty(128);
        only.insert(5);
        let tags = possible_tags(77, &only).unwrap();
        assert_eq!(tags.to_sorted_vec(), vec![77 ^ 5]);
        // no knowledge
        let tags = possible_tags(77, &TagSet::full(128)).unwrap();
        assert!(tags.is_full());
        assert!(possible_tags(0, &TagSet::empty(128)).is_err());
    }

    #[test]
    fn eliminations_commute() {
        let fam = family(96, 8);
        let full = CandidateSet::full(&fam).unwrap();
        let mut s1 = TagSet::full(8);
        s1.remove(0);
        s1.remove(5);
        let mut s2 = TagSet::full(8);
        s2.remove(3);
        let a = eliminate(&eliminate(&full, 10, &s1).unwrap(), 20, &s2).unwrap();
        let b = eliminate(&eliminate(&full, 20, &s2).unwrap(), 10, &s1).unwrap();
        let ka: Vec<HashKey> = a.survivors().collect();
        let kb: Vec<HashKey> = b.survivors().collect();
        assert_eq!(ka, kb);
    }

    #[test]
    fn forgery_on_fresh_family_is_not_ready() {
        let fam = family(10, 4);
        let full = CandidateSet::full(&fam).unwrap();
        for m in 0..10 {
            assert_eq!(forgery_ready(&full, m), None);
        }
    }

    #[test]
    fn singleton_always_forges_and_recovers() {
        let fam = family(512, 128);
        let key = HashKey { q: 17, r: 400 };
        let set = CandidateSet::from_keys(&fam, [key]).unwrap();
        for m in [0u64, 99, 511] {
            let t = forgery_ready(&set, m).unwrap();
            assert_eq!(t, crate::hash_family::eval(&fam, &key, m).unwrap());
        }
        let observed = 0b101_1011;
        let otp = recover_otp(&set, 42, observed).unwrap();
        assert!(crate::auth::verify(&fam, &key, 42, observed, otp).unwrap());
    }

    #[test]
    fn constructed_agreement_returns_common_tag() {
        // keys sharing q*m + r mod p for a chosen m: pick m = 2, p = 11 and
        // pairs (q, r) with 2q + r ≡ 7 (mod 11)
        let fam = family(10, 4);
        let keys: Vec<HashKey> = (1..11u64)
            .map(|q| HashKey { q, r: (7 + 22 - 2 * q) % 11 })
            .collect();
        let set = CandidateSet::from_keys(&fam, keys).unwrap();
        assert_eq!(forgery_ready(&set, 2), Some(7 % 4));
        // on other messages the constructed set disagrees
        assert_eq!(forgery_ready(&set, 3), None);
    }

    #[test]
    fn disagreeing_survivors_recover_nothing() {
        let fam = family(10, 4);
        let set = CandidateSet::from_keys(
            &fam,
            [HashKey { q: 1, r: 0 }, HashKey { q: 1, r: 1 }],
        )
        .unwrap();
        assert_eq!(recover_otp(&set, 0, 3), None);
    }

    #[test]
    fn zero_knowledge_attack_exhausts_budget() {
        let fam = family(10, 4);
        let mut config = AttackConfig::new(
            fam,
            KnowledgeModel::FixedFraction { excluded_fraction: 0.0 },
            StopCondition::Identify,
            9,
        );
        config.round_budget = 50;
        let t = run_attack(&config).unwrap();
        assert_eq!(t.outcome, AttackOutcome::ExhaustedBudget { rounds: 50 });
        assert!(t.rounds.iter().all(|r| r.survivors == fam.family_size()));
    }

    #[test]
    fn full_knowledge_identifies_quickly() {
        // excluding all but the true pad makes every possible-tag set a
        // singleton; identification needs only a handful of rounds
        let fam = family(64, 8);
        let mut config = AttackConfig::new(
            fam,
            KnowledgeModel::FixedCount { excluded: 7 },
            StopCondition::Identify,
            1,
        );
        config.round_budget = 10_000;
        let t = run_attack(&config).unwrap();
        let identified = match t.outcome {
            AttackOutcome::IdentifiedAt { round } => round,
            other => panic!("expected identification, got {other:?}"),
        };
        // continuous-model scale: log(family) / log(|T|) rounds, plus slack
        let fam_size = fam.family_size() as f64;
        let bound = (fam_size.ln() / 8f64.ln()).ceil() as u64 + 20;
        assert!(identified <= bound, "identified at {identified}, bound {bound}");
    }

    #[test]
    fn forge_never_later_than_identify_on_paired_seeds() {
        let fam = family(64, 8);
        for seed in 0..10u64 {
            let mut identify = AttackConfig::new(
                fam,
                KnowledgeModel::FixedFraction { excluded_fraction: 0.25 },
                StopCondition::Identify,
                seed,
            );
            identify.round_budget = 100_000;
            let mut forge = identify.clone();
            forge.stop = StopCondition::Forge;
            let ti = run_attack(&identify).unwrap();
            let tf = run_attack(&forge).unwrap();
            let ni = match ti.outcome {
                AttackOutcome::IdentifiedAt { round } => round,
                other => panic!("identify run ended with {other:?}"),
            };
            let nf = match tf.outcome {
                AttackOutcome::ForgedAt { round, .. } => round,
                other => panic!("forge run ended with {other:?}"),
            };
            assert!(nf <= ni, "seed {seed}: forge {nf} > identify {ni}");
            // paired seeds see identical rounds while both run
            for (a, b) in ti.rounds.iter().zip(tf.rounds.iter()) {
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn transcript_monotone_and_consecutive() {
        let fam = family(512, 128);
        let mut config = AttackConfig::new(
            fam,
            KnowledgeModel::FixedFraction { excluded_fraction: 0.1 },
            StopCondition::Forge,
            42,
        );
        config.round_budget = 100_000;
        let t = run_attack(&config).unwrap();
        assert!(t.rounds.iter().all(|r| r.survivors > 0));
        assert!(t
            .rounds
            .windows(2)
            .all(|w| w[1].survivors <= w[0].survivors && w[1].round == w[0].round + 1));
        assert_eq!(t.rounds[0].round, 1);
    }

    #[test]
    fn deterministic_transcript_bytes() {
        let fam = family(512, 128);
        let mut config = AttackConfig::new(
            fam,
            KnowledgeModel::FixedFraction { excluded_fraction: 0.1 },
            StopCondition::Forge,
            7,
        );
        config.round_budget = 100_000;
        let a = serde_json::to_string(&run_attack(&config).unwrap()).unwrap();
        let b = serde_json::to_string(&run_attack(&config).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn guessing_attack_geometry() {
        // |T| = 1 succeeds immediately
        let one = GuessConfig { tag_space_size: 1, seed: 5, round_budget: 10 };
        assert_eq!(run_guessing_attack(&one).unwrap(), Some(1));

        // |T| = 128: sample mean within 3 sigma of 128 over 10^5 trials
        let trials = 100_000u64;
        let mut sum = 0u64;
        for i in 0..trials {
            let cfg = GuessConfig {
                tag_space_size: 128,
                seed: crate::seeding::derive_seed(99, 0, i),
                round_budget: 1 << 20,
            };
            sum += run_guessing_attack(&cfg).unwrap().expect("budget ample");
        }
        let mean = sum as f64 / trials as f64;
        assert!((126.8..=129.2).contains(&mean), "mean = {mean}");
    }

    #[test]
    fn guessing_attack_matches_geometric_pmf() {
        // chi-square against the closed-form Geometric(1/4) pmf, 1% level
        let trials = 100_000u64;
        let classes = 16usize; // rounds 1..15 plus the tail
        let mut counts = vec![0u64; classes];
        for i in 0..trials {
            let cfg = GuessConfig {
                tag_space_size: 4,
                seed: crate::seeding::derive_seed(123, 1, i),
                round_budget: 1 << 20,
            };
            let n = run_guessing_attack(&cfg).unwrap().unwrap();
            let bin = (n as usize - 1).min(classes - 1);
            counts[bin] += 1;
        }
        let p = 0.25f64;
        let mut chi2 = 0.0;
        for (bin, &c) in counts.iter().enumerate() {
            let prob = if bin < classes - 1 {
                (1.0 - p).powi(bin as i32) * p
            } else {
                (1.0 - p).powi(bin as i32) // tail mass P(N > 15)
            };
            let expected = prob * trials as f64;
            let d = c as f64 - expected;
            chi2 += d * d / expected;
        }
        let df = (classes - 1) as f64;
        let z = 2.3263478740408408f64;
        let crit = df * (1.0 - 2.0 / (9.0 * df) + z * (2.0 / (9.0 * df)).sqrt()).powi(3);
        assert!(chi2 < crit, "chi2 = {chi2:.2}, crit = {crit:.2}");
    }
}
