//! Hypergeometric transition probabilities and the expected-lifetime
//! recursion built on them.
//!
//! The pmf is evaluated in log space through the saddle-point decomposition
//! (binomial-ratio form with Stirling-error and binomial-deviance terms)
//! rather than differences of log-gamma values of huge arguments; the
//! assembled exponent stays O(|ln pmf|), so the absolute error keeps below
//! 1e-12 across the whole supported range (populations up to 1e6).

use super::AnalyticError;

const LN_2PI: f64 = 1.837877066409345483560659472811;

/// `ln(n!) - [n ln n - n + 0.5 ln(2 pi n)]`, the Stirling series remainder.
fn stirlerr(n: u64) -> f64 {
    debug_assert!(n >= 1);
    if n < 16 {
        let nf = n as f64;
        let mut ln_fact = 0.0;
        for i in 2..=n {
            ln_fact += (i as f64).ln();
        }
        ln_fact - (nf + 0.5) * nf.ln() + nf - 0.5 * LN_2PI
    } else {
        let nf = n as f64;
        let n2 = nf * nf;
        // 1/12n - 1/360n^3 + 1/1260n^5 - 1/1680n^7 + 1/1188n^9
        (((((1.0 / 1188.0) / n2 - 1.0 / 1680.0) / n2 + 1.0 / 1260.0) / n2 - 1.0 / 360.0) / n2
            + 1.0 / 12.0)
            / nf
    }
}

/// Binomial deviance `x ln(x/np) + np - x`, evaluated by series when `x` is
/// near `np` to avoid the catastrophic cancellation of the direct form.
fn bd0(x: f64, np: f64) -> f64 {
    debug_assert!(x >= 0.0 && np > 0.0);
    if x == 0.0 {
        return np;
    }
    if (x - np).abs() < 0.1 * (x + np) {
        let v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        if s.abs() < f64::MIN_POSITIVE {
            return s;
        }
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        let mut j = 1u64;
        loop {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
            j += 1;
        }
    } else {
        x * (x / np).ln() + np - x
    }
}

/// Binomial pmf at integer `x` of `n` trials with success probability `p`
/// (`q = 1 - p` passed separately for accuracy), by Loader's saddle-point
/// method.
fn dbinom_raw(x: u64, n: u64, p: f64, q: f64) -> f64 {
    if p == 0.0 {
        return if x == 0 { 1.0 } else { 0.0 };
    }
    if q == 0.0 {
        return if x == n { 1.0 } else { 0.0 };
    }
    if x == 0 {
        if n == 0 {
            return 1.0;
        }
        let lc = if p < 0.1 {
            -bd0(n as f64, n as f64 * q) - n as f64 * p
        } else {
            n as f64 * q.ln()
        };
        return lc.exp();
    }
    if x == n {
        let lc = if q < 0.1 {
            -bd0(n as f64, n as f64 * p) - n as f64 * q
        } else {
            n as f64 * p.ln()
        };
        return lc.exp();
    }
    let xf = x as f64;
    let nf = n as f64;
    let lc = stirlerr(n) - stirlerr(x) - stirlerr(n - x) - bd0(xf, nf * p) - bd0(nf - xf, nf * q);
    let lf = LN_2PI + xf.ln() + (-xf / nf).ln_1p();
    (lc - 0.5 * lf).exp()
}

/// Probability of drawing exactly `j` marked elements in a sample of
/// `sample` drawn without replacement from a population of `population`
/// containing `marked` marked elements:
/// `C(marked, j) * C(population - marked, sample - j) / C(population, sample)`.
pub fn hypergeom_pmf(
    j: u64,
    marked: u64,
    sample: u64,
    population: u64,
) -> Result<f64, AnalyticError> {
    if marked > population || sample > population || j > marked.min(sample) {
        return Err(AnalyticError::PmfDomain {
            j,
            marked,
            sample,
            population,
        });
    }
    // below the support floor the probability is exactly zero
    if marked + sample > population && j < marked + sample - population {
        return Ok(0.0);
    }
    if population == 0 {
        return Ok(1.0);
    }
    let p = sample as f64 / population as f64;
    let q = (population - sample) as f64 / population as f64;
    let p1 = dbinom_raw(j, marked, p, q);
    let p2 = dbinom_raw(sample - j, population - marked, p, q);
    let p3 = dbinom_raw(sample, population, p, q);
    Ok(p1 * p2 / p3)
}

/// Transition row `p_{j,k}` for `j = 0..=min(k, sample)`.
pub(crate) fn pmf_row(
    k: u64,
    sample: u64,
    population: u64,
) -> Result<Vec<f64>, AnalyticError> {
    let top = k.min(sample);
    let mut row = Vec::with_capacity(top as usize + 1);
    for j in 0..=top {
        row.push(hypergeom_pmf(j, k, sample, population)?);
    }
    Ok(row)
}

/// Default ceiling on the recursion depth; the cost is quadratic in `k_max`.
pub const DEFAULT_RECURSION_CEILING: u64 = 20_000;

/// Expected rounds until no false match survives, starting from `k` false
/// matches, for every `k = 0..=k_max`:
/// `n_0 = 0`, `n_k = (1 + sum_(j<k) p_jk * n_j) / (1 - p_kk)`.
///
/// The denominator is accumulated as the complementary sum of the transition
/// row, and all sums are compensated, so ratios near 1 stay accurate.
pub fn expected_lifetime(
    params: &super::ModelParams,
    k_max: u64,
) -> Result<Vec<f64>, AnalyticError> {
    expected_lifetime_with_ceiling(params, k_max, DEFAULT_RECURSION_CEILING)
}

/// As [`expected_lifetime`] with an explicit ceiling override.
pub fn expected_lifetime_with_ceiling(
    params: &super::ModelParams,
    k_max: u64,
    ceiling: u64,
) -> Result<Vec<f64>, AnalyticError> {
    let (h, big_h) = (params.subset_size(), params.population());
    if h >= big_h {
        return Err(AnalyticError::DivergentRatio {
            subset_size: h,
            population: big_h,
        });
    }
    if k_max > ceiling {
        return Err(AnalyticError::CeilingExceeded { k_max, ceiling });
    }
    if k_max > big_h {
        return Err(AnalyticError::KOutOfRange {
            k: k_max,
            population: big_h,
        });
    }
    let mut n = vec![0.0f64; k_max as usize + 1];
    for k in 1..=k_max {
        let row = pmf_row(k, h, big_h)?;
        let below_k = row.len().min(k as usize); // entries with j < k
        let mut numer = KahanSum::new();
        numer.add(1.0);
        let mut denom = KahanSum::new();
        for j in 0..below_k {
            numer.add(row[j] * n[j]);
            denom.add(row[j]);
        }
        let denom = if k <= h { denom.value() } else { 1.0 };
        if !(denom > 0.0) || !denom.is_finite() {
            return Err(AnalyticError::DegenerateRecursion { k });
        }
        n[k as usize] = numer.value() / denom;
    }
    Ok(n)
}

struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    fn new() -> Self {
        Self { sum: 0.0, carry: 0.0 }
    }

    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}
