//! Monte-Carlo of the idealized independent-round process: each round the
//! set of surviving false matches is a fresh draw of `h` elements without
//! replacement from the `H`-element population, so the survivor count is a
//! hypergeometric chain that the expected-lifetime recursion describes
//! exactly.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Hypergeometric};
use serde::{Deserialize, Serialize};

use crate::seeding::derive_seed;

use super::{AnalyticError, ModelParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependentModelStats {
    pub trials: u64,
    pub mean_rounds: f64,
    pub stderr: f64,
    /// Stopping-time distribution: rounds -> trial count.
    pub histogram: BTreeMap<u64, u64>,
}

/// Simulates stopping times of the independent hypergeometric chain started
/// at `k0` false matches. Each trial's RNG is seeded from
/// `derive_seed(seed, 0, trial)`, so the result is independent of batching.
pub fn independent_model_simulate(
    params: &ModelParams,
    k0: u64,
    trials: u64,
    seed: u64,
) -> Result<IndependentModelStats, AnalyticError> {
    if trials == 0 {
        return Err(AnalyticError::ZeroTrials);
    }
    if k0 > params.population() {
        return Err(AnalyticError::KOutOfRange {
            k: k0,
            population: params.population(),
        });
    }
    let h = params.subset_size();
    let big_h = params.population();
    let mut histogram = BTreeMap::new();
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0, trial));
        let mut x = k0;
        let mut rounds = 0u64;
        while x > 0 {
            let draw = Hypergeometric::new(big_h, x, h).expect("validated parameters");
            x = draw.sample(&mut rng);
            rounds += 1;
        }
        *histogram.entry(rounds).or_insert(0) += 1;
        sum += rounds as f64;
        sum_sq += (rounds as f64) * (rounds as f64);
    }
    let mean = sum / trials as f64;
    let variance = (sum_sq / trials as f64 - mean * mean).max(0.0);
    let stderr = if trials > 1 {
        (variance * trials as f64 / (trials - 1) as f64 / trials as f64).sqrt()
    } else {
        0.0
    };
    Ok(IndependentModelStats {
        trials,
        mean_rounds: mean,
        stderr,
        histogram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_start_stops_immediately() {
        let params = ModelParams::new(32, 64).unwrap();
        let stats = independent_model_simulate(&params, 0, 100, 1).unwrap();
        assert_eq!(stats.mean_rounds, 0.0);
        assert_eq!(stats.histogram.get(&0), Some(&100));
    }

    #[test]
    fn matches_recursion_at_moderate_scale() {
        let params = ModelParams::new(32, 64).unwrap();
        let exact = super::super::expected_lifetime(&params, 10).unwrap()[10];
        let stats = independent_model_simulate(&params, 10, 40_000, 7).unwrap();
        let rel = (stats.mean_rounds - exact).abs() / exact;
        assert!(
            rel < 0.03,
            "mc {} vs recursion {exact}, rel {rel}",
            stats.mean_rounds
        );
    }

    #[test]
    fn deterministic_given_seed() {
        let params = ModelParams::new(8, 16).unwrap();
        let a = independent_model_simulate(&params, 5, 500, 3).unwrap();
        let b = independent_model_simulate(&params, 5, 500, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_inputs() {
        let params = ModelParams::new(8, 16).unwrap();
        assert!(independent_model_simulate(&params, 5, 0, 3).is_err());
        assert!(independent_model_simulate(&params, 17, 10, 3).is_err());
    }
}
