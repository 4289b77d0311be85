//! The security-loss ledger for repeated rounds over a fixed secret hash
//! function.
//!
//! Composing an `eps1`-ideal key-growing round with `eps2`-ideal
//! authentication produces an `eps1+eps2`-perfect key; feeding part of that
//! key back as the next round's pad makes the leakage compound, doubling the
//! coefficient each round. After round `n` the key is
//! `2^(n-1) * (eps1+eps2)`-perfect and the authentication is
//! `(2^(n-1)-1)*eps1 + 2^(n-1)*eps2`-ideal.
//!
//! Coefficients are kept as exact integers next to the floating loss so the
//! doubling identities can be checked exactly; they overflow the exact
//! representation at `n > 128`, which is reported rather than approximated.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ComposabilityError {
    #[error("round index must be >= 1")]
    ZeroRound,
    #[error("coefficient 2^(n-1) for n = {0} exceeds the exact 128-bit range")]
    CoefficientOverflow(u64),
    #[error("epsilon parameters must be finite and non-negative, got ({eps1}, {eps2})")]
    InvalidEpsilon { eps1: f64, eps2: f64 },
    #[error("budget {budget} does not exceed eps2 = {eps2}; no round is affordable")]
    NoFeasibleRound { budget: f64, eps2: f64 },
    #[error("zero epsilons make every round affordable; no largest round exists")]
    UnboundedRounds,
}

/// Per-round ideality parameters: `eps1` for the key-growing protocol,
/// `eps2` for the authentication itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonParams {
    pub eps1: f64,
    pub eps2: f64,
}

impl EpsilonParams {
    pub fn new(eps1: f64, eps2: f64) -> Result<Self, ComposabilityError> {
        if !eps1.is_finite() || !eps2.is_finite() || eps1 < 0.0 || eps2 < 0.0 {
            return Err(ComposabilityError::InvalidEpsilon { eps1, eps2 });
        }
        Ok(Self { eps1, eps2 })
    }
}

/// Authentication ideality after round `n`: loss `a_n*eps1 + b_n*eps2` with
/// the integer pair reported exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuthIdeality {
    pub a: u128,
    pub b: u128,
    pub loss: f64,
}

/// Coefficient of `eps1 + eps2` in the perfection of the key produced by
/// round `n`: exactly `2^(n-1)`.
pub fn key_perfection(n: u64) -> Result<u128, ComposabilityError> {
    if n == 0 {
        return Err(ComposabilityError::ZeroRound);
    }
    if n > 128 {
        return Err(ComposabilityError::CoefficientOverflow(n));
    }
    Ok(1u128 << (n - 1))
}

/// Ideality of the authentication in round `n`:
/// `(2^(n-1) - 1)*eps1 + 2^(n-1)*eps2`.
pub fn auth_ideality(n: u64, eps: EpsilonParams) -> Result<AuthIdeality, ComposabilityError> {
    let b = key_perfection(n)?;
    let a = b - 1;
    Ok(AuthIdeality {
        a,
        b,
        loss: a as f64 * eps.eps1 + b as f64 * eps.eps2,
    })
}

/// Loss after round `n` without the exact-integer range limit, for scanning
/// past `n = 128`. Uses the identity `loss = 2^(n-1)*(eps1+eps2) - eps1` and
/// saturates to infinity, which is harmless in a monotone scan.
fn loss_f64(n: u64, eps: EpsilonParams) -> f64 {
    if n <= 128 {
        let b = 1u128 << (n - 1);
        (b - 1) as f64 * eps.eps1 + b as f64 * eps.eps2
    } else if n - 1 <= f64::MAX_EXP as u64 {
        ((n - 1) as f64).exp2() * (eps.eps1 + eps.eps2) - eps.eps1
    } else {
        f64::INFINITY
    }
}

/// Largest `n` whose authentication ideality still fits in `budget` — the
/// recommended interval for refreshing the fixed secret key.
pub fn max_rounds_within_budget(
    eps: EpsilonParams,
    budget: f64,
) -> Result<u64, ComposabilityError> {
    EpsilonParams::new(eps.eps1, eps.eps2)?;
    if !budget.is_finite() || budget <= eps.eps2 {
        return Err(ComposabilityError::NoFeasibleRound {
            budget,
            eps2: eps.eps2,
        });
    }
    let total = eps.eps1 + eps.eps2;
    if total == 0.0 {
        return Err(ComposabilityError::UnboundedRounds);
    }
    // loss(n) <= budget  <=>  2^(n-1) <= (budget + eps1) / total
    let guess = ((budget + eps.eps1) / total).log2().floor();
    let mut n = if guess.is_finite() && guess >= 0.0 {
        guess as u64 + 1
    } else {
        1
    };
    // fix up float slop at the boundary with the loss itself
    while n > 1 && loss_f64(n, eps) > budget {
        n -= 1;
    }
    while loss_f64(n + 1, eps) <= budget {
        n += 1;
    }
    Ok(n)
}

/// The ledger rows for rounds `1..=n`: exact coefficients plus the loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundLedger {
    pub eps: EpsilonParams,
    pub rows: Vec<RoundLedgerRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundLedgerRow {
    pub n: u64,
    pub a: u128,
    pub b: u128,
    pub key_perfection: u128,
    pub loss: f64,
}

impl RoundLedger {
    pub fn build(eps: EpsilonParams, rounds: u64) -> Result<Self, ComposabilityError> {
        if rounds == 0 {
            return Err(ComposabilityError::ZeroRound);
        }
        let mut rows = Vec::with_capacity(rounds as usize);
        for n in 1..=rounds {
            let ideality = auth_ideality(n, eps)?;
            rows.push(RoundLedgerRow {
                n,
                a: ideality.a,
                b: ideality.b,
                key_perfection: key_perfection(n)?,
                loss: ideality.loss,
            });
        }
        Ok(Self { eps, rows })
    }
}
