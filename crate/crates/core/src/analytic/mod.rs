//! Lifetime models for the candidate-elimination attack.
//!
//! Three routes to the same quantity, kept deliberately independent so they
//! can cross-check each other:
//!
//! - the continuous estimate: the smallest `n` with `k * (h/H)^n < 1`,
//!   evaluated against exact integer thresholds;
//! - the hypergeometric recursion for the exact expected lifetime of the
//!   independent-round model;
//! - closed-form Chebyshev upper bounds, generic in the split point `s` and
//!   specialized at `s = k * sqrt(h/H)`.

mod hypergeom;
mod simulate;

pub use hypergeom::{
    expected_lifetime, expected_lifetime_with_ceiling, hypergeom_pmf, DEFAULT_RECURSION_CEILING,
};
pub use simulate::{independent_model_simulate, IndependentModelStats};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("subset size must satisfy 0 < h <= H, got h = {subset_size}, H = {population}")]
    InvalidParams { subset_size: u64, population: u64 },
    #[error("ratio h/H = {subset_size}/{population} is not below 1; the lifetime diverges")]
    DivergentRatio { subset_size: u64, population: u64 },
    #[error("pmf parameters out of domain: j = {j}, marked = {marked}, sample = {sample}, population = {population}")]
    PmfDomain {
        j: u64,
        marked: u64,
        sample: u64,
        population: u64,
    },
    #[error("k = {k} exceeds the population {population}")]
    KOutOfRange { k: u64, population: u64 },
    #[error("k_max = {k_max} exceeds the recursion ceiling {ceiling}")]
    CeilingExceeded { k_max: u64, ceiling: u64 },
    #[error("transition row at k = {k} has no mass below k; recursion is degenerate")]
    DegenerateRecursion { k: u64 },
    #[error("split point s = {s} outside ({lo}, {hi})")]
    SplitPointOutOfRange { s: f64, lo: f64, hi: f64 },
    #[error("Chebyshev bounds require k >= 2, got {0}")]
    KTooSmall(u64),
    #[error("ratio string {0:?} is not a plain decimal in (0, 1)")]
    BadRatioString(String),
    #[error("trial count must be >= 1")]
    ZeroTrials,
}

/// The pair `(h, H)`: `H` false matches in total, of which a fresh round
/// leaves `h` possible. Kept as exact integers; `h/H` is derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelParams {
    subset_size: u64,
    population: u64,
}

impl ModelParams {
    pub fn new(subset_size: u64, population: u64) -> Result<Self, AnalyticError> {
        if subset_size == 0 || subset_size > population {
            return Err(AnalyticError::InvalidParams {
                subset_size,
                population,
            });
        }
        Ok(Self {
            subset_size,
            population,
        })
    }

    /// Parses a plain decimal like `"0.9"` into the exact rational it
    /// denotes, reduced to lowest terms — so `"0.9"` is exactly `9/10`,
    /// not the nearest binary double.
    pub fn from_decimal_ratio(s: &str) -> Result<Self, AnalyticError> {
        let bad = || AnalyticError::BadRatioString(s.to_owned());
        let s = s.trim();
        let (int_part, frac_part) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
            || frac_part.len() > 18
        {
            return Err(bad());
        }
        let int_val: u64 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| bad())?
        };
        let den = 10u64.pow(frac_part.len() as u32);
        let frac_val: u64 = if frac_part.is_empty() {
            0
        } else {
            frac_part.parse().map_err(|_| bad())?
        };
        let num = int_val
            .checked_mul(den)
            .and_then(|v| v.checked_add(frac_val))
            .ok_or_else(bad)?;
        if num == 0 || num >= den {
            return Err(bad());
        }
        let g = gcd(num, den);
        Self::new(num / g, den / g)
    }

    /// Same ratio with both sides scaled so the population reaches at least
    /// `min_population` (the recursion needs `k <= H`).
    pub fn scaled_to_population(&self, min_population: u64) -> Self {
        if self.population >= min_population {
            return *self;
        }
        let factor = min_population.div_ceil(self.population);
        Self {
            subset_size: self.subset_size * factor,
            population: self.population * factor,
        }
    }

    pub fn subset_size(&self) -> u64 {
        self.subset_size
    }

    pub fn population(&self) -> u64 {
        self.population
    }

    pub fn ratio(&self) -> f64 {
        self.subset_size as f64 / self.population as f64
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Expected rounds for the pure guessing baseline: exactly the tag-space
/// size (the stopping time is geometric with success probability `1/|T|`).
pub fn guessing_lifetime(tag_space_size: u64) -> u64 {
    tag_space_size
}

/// Number of steps the exact threshold table is willing to grow before the
/// continuous model falls back to floating-point logarithms.
const EXACT_THRESHOLD_LIMIT: usize = 100_000;

/// The continuous deterministic model: starting from `k` false matches and
/// shrinking by the factor `h/H` each round, the lifetime is the smallest
/// integer `n` with `k * (h/H)^n < 1`.
///
/// Decided against an exact integer threshold table
/// (`k * h^n < H^n  <=>  k <= floor((H^n - 1) / h^n)`), so boundary cases
/// where `log k / -log(h/H)` is integral are never misjudged by float
/// rounding. Ratios so close to 1 that the table would exceed
/// 100k entries fall back to the logarithm formula.
#[derive(Debug, Clone)]
pub struct ContinuousModel {
    params: ModelParams,
    /// `thresholds[n]` = largest `k` (saturating) with lifetime <= n.
    thresholds: Vec<u64>,
    h_pow: BigUint,
    big_h_pow: BigUint,
}

impl ContinuousModel {
    pub fn new(params: &ModelParams) -> Result<Self, AnalyticError> {
        if params.subset_size == params.population {
            return Err(AnalyticError::DivergentRatio {
                subset_size: params.subset_size,
                population: params.population,
            });
        }
        Ok(Self {
            params: *params,
            thresholds: vec![0], // n = 0 covers k = 0 only
            h_pow: BigUint::from(1u32),
            big_h_pow: BigUint::from(1u32),
        })
    }

    /// Smallest integer `n` with `k * (h/H)^n < 1` (0 for `k = 0`).
    pub fn lifetime(&mut self, k: u64) -> u64 {
        while *self.thresholds.last().unwrap() < k
            && self.thresholds.len() <= EXACT_THRESHOLD_LIMIT
        {
            self.h_pow *= self.params.subset_size;
            self.big_h_pow *= self.params.population;
            let quotient = (&self.big_h_pow - 1u32) / &self.h_pow;
            let digits = quotient.to_u64_digits();
            let threshold = match digits.len() {
                0 => 0,
                1 => digits[0],
                _ => u64::MAX,
            };
            self.thresholds.push(threshold);
        }
        if *self.thresholds.last().unwrap() >= k {
            // binary search: first n with thresholds[n] >= k
            self.thresholds.partition_point(|&t| t < k) as u64
        } else {
            // ratio too close to 1 for the exact table
            let x = (k as f64).ln() / -(self.params.ratio().ln());
            x.floor() as u64 + 1
        }
    }
}

/// One-off form of [`ContinuousModel::lifetime`].
pub fn continuous_lifetime(params: &ModelParams, k: u64) -> Result<u64, AnalyticError> {
    Ok(ContinuousModel::new(params)?.lifetime(k))
}

/// Chebyshev upper bound on the expected lifetime from `k` false matches,
/// generic in the split point `s`:
///
/// `1/(1 - h/H) + (1 + k*(h/H)*(1 - h/H) / (s - k*h/H)^2) * log k / -log(s/k)`
pub fn chebyshev_bound(k: u64, params: &ModelParams, s: f64) -> Result<f64, AnalyticError> {
    if k < 2 {
        return Err(AnalyticError::KTooSmall(k));
    }
    let rho = strict_ratio(params)?;
    let kf = k as f64;
    let lo = kf * rho;
    if !(s > lo && s < kf) {
        return Err(AnalyticError::SplitPointOutOfRange { s, lo, hi: kf });
    }
    let variance_term = kf * rho * (1.0 - rho) / ((s - lo) * (s - lo));
    Ok(1.0 / (1.0 - rho) + (1.0 + variance_term) * kf.ln() / -(s / kf).ln())
}

/// The bound specialized at `s = k * sqrt(h/H)`:
///
/// `1/(1 - h/H) + (1 + (1 + sqrt(h/H)) / (k*(1 - sqrt(h/H)))) * 2*log k / -log(h/H)`
pub fn chebyshev_bound_sqrt(k: u64, params: &ModelParams) -> Result<f64, AnalyticError> {
    if k < 2 {
        return Err(AnalyticError::KTooSmall(k));
    }
    let rho = strict_ratio(params)?;
    let kf = k as f64;
    let sq = rho.sqrt();
    Ok(1.0 / (1.0 - rho) + (1.0 + (1.0 + sq) / (kf * (1.0 - sq))) * 2.0 * kf.ln() / -rho.ln())
}

fn strict_ratio(params: &ModelParams) -> Result<f64, AnalyticError> {
    if params.subset_size == params.population {
        return Err(AnalyticError::DivergentRatio {
            subset_size: params.subset_size,
            population: params.population,
        });
    }
    Ok(params.ratio())
}

/// [`chebyshev_bound`] minimized over the split point by golden-section
/// search on `(max(k*h/H, 1), k)`. The bound is valid at every interior
/// point, so the minimum is still a valid upper bound, generally a little
/// tighter than the sqrt specialization.
pub fn chebyshev_bound_min(k: u64, params: &ModelParams) -> Result<f64, AnalyticError> {
    if k < 2 {
        return Err(AnalyticError::KTooSmall(k));
    }
    let rho = strict_ratio(params)?;
    let kf = k as f64;
    let lo = (kf * rho).max(1.0);
    let hi = kf;
    let span = hi - lo;
    let eval = |s: f64| chebyshev_bound(k, params, s).unwrap_or(f64::INFINITY);
    let inv_phi = 0.618_033_988_749_894_9_f64;
    let mut a = lo + span * 1e-9;
    let mut b = hi - span * 1e-9;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (eval(c), eval(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d);
        }
    }
    Ok(fc.min(fd))
}

/// One row of the assembled lifetime table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifetimeRow {
    pub k: u64,
    pub continuous: u64,
    pub recursive: f64,
    /// Minimized generic bound; absent for k < 2 where no valid split exists.
    pub cheb_s: Option<f64>,
    pub cheb_sqrt: Option<f64>,
}

/// Analytic lifetimes for `k = 0..=k_max` under one `(h, H)` pair, with the
/// parameters recorded alongside the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifetimeTable {
    pub params: ModelParams,
    pub k_max: u64,
    pub recursion_ceiling: u64,
    /// How the `cheb_s` column picks its split point.
    pub cheb_s_selection: String,
    pub rows: Vec<LifetimeRow>,
}

impl LifetimeTable {
    pub fn compute(params: &ModelParams, k_max: u64) -> Result<Self, AnalyticError> {
        Self::compute_with_ceiling(params, k_max, DEFAULT_RECURSION_CEILING)
    }

    pub fn compute_with_ceiling(
        params: &ModelParams,
        k_max: u64,
        ceiling: u64,
    ) -> Result<Self, AnalyticError> {
        let recursive = expected_lifetime_with_ceiling(params, k_max, ceiling)?;
        let mut continuous = ContinuousModel::new(params)?;
        let mut rows = Vec::with_capacity(k_max as usize + 1);
        for k in 0..=k_max {
            let (cheb_s, cheb_sqrt) = if k >= 2 {
                (
                    Some(chebyshev_bound_min(k, params)?),
                    Some(chebyshev_bound_sqrt(k, params)?),
                )
            } else {
                (None, None)
            };
            rows.push(LifetimeRow {
                k,
                continuous: continuous.lifetime(k),
                recursive: recursive[k as usize],
                cheb_s,
                cheb_sqrt,
            });
        }
        Ok(Self {
            params: *params,
            k_max,
            recursion_ceiling: ceiling,
            cheb_s_selection: "golden-section minimization over s in (max(k*h/H, 1), k)"
                .to_owned(),
            rows,
        })
    }
}
