//! Simulation and analysis toolkit for message authentication built from a
//! secret but *fixed* near-strongly-universal hash function whose tag is
//! encrypted with a one-time pad.
//!
//! The toolkit answers one question from several directions: how many
//! authentication rounds does the scheme survive against an eavesdropper who
//! has partial knowledge of the one-time pad in every round?
//!
//! - [`hash_family`] — the `((m*q + r) mod p) mod |T|` hash family with exact
//!   indexing of all `p*(p-1)` members.
//! - [`auth`] — tag generation and verification (hash output XOR one-time pad).
//! - [`adversary`] — the candidate-elimination attack engine and the guessing
//!   baseline.
//! - [`analytic`] — closed-form and recursive lifetime models plus Chebyshev
//!   upper bounds.
//! - [`composability`] — the per-round security-loss ledger and the
//!   key-refresh interval calculator.
//! - [`seeding`] — the splittable seed derivation used to keep experiments
//!   reproducible under any parallelism.

pub mod adversary;
pub mod analytic;
pub mod auth;
pub mod composability;
pub mod hash_family;
pub mod seeding;

pub use adversary::{
    eliminate, forgery_ready, possible_tags, recover_otp, run_attack, run_guessing_attack,
    AttackConfig, AttackError, AttackOutcome, AttackTranscript, CandidateSet, GuessConfig,
    KnowledgeModel, RoundRecord, StopCondition, TagSet,
};
pub use analytic::{
    chebyshev_bound, chebyshev_bound_min, chebyshev_bound_sqrt, continuous_lifetime,
    expected_lifetime, guessing_lifetime, hypergeom_pmf, independent_model_simulate,
    AnalyticError, ContinuousModel, IndependentModelStats, LifetimeRow, LifetimeTable,
    ModelParams,
};
pub use auth::{make_tag, verify, AuthenticatedMessage, OtpKey};
pub use composability::{
    auth_ideality, key_perfection, max_rounds_within_budget, AuthIdeality, ComposabilityError,
    EpsilonParams, RoundLedger, RoundLedgerRow,
};
pub use hash_family::{
    smallest_prime_geq, HashFamilyError, HashFamilyParams, HashKey,
};
pub use seeding::derive_seed;
