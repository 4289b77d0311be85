//! The `H1` hash family: for a prime `p` exceeding the message-space size,
//! the member keyed by `(q, r)` with `0 < q < p`, `0 <= r < p` maps a message
//! `m` to `((m*q + r) mod p) mod |T|`.
//!
//! The family has exactly `p*(p-1)` members and is *close* to strongly
//! universal: for any fixed message, every tag's preimage over the whole
//! family has one of two sizes, `(p-1)*floor(p/|T|)` or `(p-1)*ceil(p/|T|)`.
//!
//! Members are enumerated in a fixed canonical order, `index = (q-1)*p + r`,
//! so that candidate bitmaps and transcripts are portable across runs and
//! machines.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported input to [`smallest_prime_geq`].
pub const MAX_PRIME_SEARCH_INPUT: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HashFamilyError {
    #[error("prime search input {0} out of supported range [1, 2^32)")]
    PrimeSearchOutOfRange(u64),
    #[error("message space size must be >= 1, got {0}")]
    EmptyMessageSpace(u64),
    #[error("tag space size {0} is not a power of two")]
    TagSpaceNotPowerOfTwo(u64),
    #[error("family size p*(p-1) for p = {0} does not fit in 64 bits")]
    FamilyTooLarge(u64),
    #[error("message {message} outside message space of size {space}")]
    MessageOutOfRange { message: u64, space: u64 },
    #[error("key (q={q}, r={r}) invalid for prime {prime}")]
    KeyOutOfRange { q: u64, r: u64, prime: u64 },
    #[error("key index {index} outside family of size {family_size}")]
    IndexOutOfRange { index: u64, family_size: u64 },
}

/// Shape of one concrete hash family: message space, tag space, and the
/// prime `p` (smallest prime strictly greater than the message-space size).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawFamilyParams")]
pub struct HashFamilyParams {
    message_space_size: u64,
    tag_space_size: u32,
    prime: u64,
}

/// Serde-side mirror of [`HashFamilyParams`]; deserialization re-validates
/// the invariants instead of trusting the input.
#[derive(Deserialize)]
struct RawFamilyParams {
    message_space_size: u64,
    tag_space_size: u32,
    prime: u64,
}

impl TryFrom<RawFamilyParams> for HashFamilyParams {
    type Error = HashFamilyError;

    fn try_from(raw: RawFamilyParams) -> Result<Self, Self::Error> {
        let params = HashFamilyParams::new(raw.message_space_size, raw.tag_space_size as u64)?;
        if params.prime != raw.prime {
            return Err(HashFamilyError::KeyOutOfRange {
                q: 0,
                r: 0,
                prime: raw.prime,
            });
        }
        Ok(params)
    }
}

impl HashFamilyParams {
    /// Builds the family for a message space of `message_space_size` and a
    /// power-of-two tag space, deriving the prime.
    pub fn new(message_space_size: u64, tag_space_size: u64) -> Result<Self, HashFamilyError> {
        if message_space_size == 0 {
            return Err(HashFamilyError::EmptyMessageSpace(message_space_size));
        }
        if tag_space_size == 0 || !tag_space_size.is_power_of_two() || tag_space_size > u32::MAX as u64
        {
            return Err(HashFamilyError::TagSpaceNotPowerOfTwo(tag_space_size));
        }
        let prime = smallest_prime_geq(message_space_size)?;
        // index arithmetic and bitmaps need p*(p-1) to fit in u64
        if (prime as u128) * ((prime - 1) as u128) > u64::MAX as u128 {
            return Err(HashFamilyError::FamilyTooLarge(prime));
        }
        Ok(Self {
            message_space_size,
            tag_space_size: tag_space_size as u32,
            prime,
        })
    }

    /// Convenience constructor for power-of-two spaces given as bit counts.
    pub fn from_bits(msg_bits: u32, tag_bits: u32) -> Result<Self, HashFamilyError> {
        Self::new(1u64 << msg_bits, 1u64 << tag_bits)
    }

    pub fn message_space_size(&self) -> u64 {
        self.message_space_size
    }

    pub fn tag_space_size(&self) -> u32 {
        self.tag_space_size
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    /// Number of members, `p*(p-1)`. The paper-style false-match count is
    /// this minus one.
    pub fn family_size(&self) -> u64 {
        self.prime * (self.prime - 1)
    }

    fn check_message(&self, m: u64) -> Result<(), HashFamilyError> {
        if m >= self.message_space_size {
            return Err(HashFamilyError::MessageOutOfRange {
                message: m,
                space: self.message_space_size,
            });
        }
        Ok(())
    }
}

/// One member of the family, the pair `(q, r)` with `0 < q < p`, `0 <= r < p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HashKey {
    pub q: u64,
    pub r: u64,
}

impl HashKey {
    pub fn new(params: &HashFamilyParams, q: u64, r: u64) -> Result<Self, HashFamilyError> {
        if q == 0 || q >= params.prime() || r >= params.prime() {
            return Err(HashFamilyError::KeyOutOfRange {
                q,
                r,
                prime: params.prime(),
            });
        }
        Ok(Self { q, r })
    }
}

/// Returns the least prime strictly greater than `n`.
///
/// Primality is decided by a deterministic Miller-Rabin base set that is
/// exact for all inputs below 2^64, so the answer is never
/// probabilistically wrong.
pub fn smallest_prime_geq(n: u64) -> Result<u64, HashFamilyError> {
    if n == 0 || n >= MAX_PRIME_SEARCH_INPUT {
        return Err(HashFamilyError::PrimeSearchOutOfRange(n));
    }
    let mut candidate = n + 1;
    if candidate <= 2 {
        return Ok(2);
    }
    if candidate % 2 == 0 {
        candidate += 1;
    }
    while !is_prime_u64(candidate) {
        candidate += 2;
    }
    Ok(candidate)
}

/// Deterministic Miller-Rabin for all `n < 2^64` (Sinclair base set).
pub(crate) fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &[2u64, 325, 9375, 28178, 450775, 9780504, 1795265022] {
        let a = a % n;
        if a == 0 {
            continue;
        }
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Evaluates the member `key` on message `m`: `((m*q + r) mod p) mod |T|`.
///
/// With `p <= 2^32` (guaranteed by the params constructor) the product
/// `m*q` is below `2^64`, so plain u64 arithmetic is exact.
pub fn eval(params: &HashFamilyParams, key: &HashKey, m: u64) -> Result<u32, HashFamilyError> {
    params.check_message(m)?;
    Ok(eval_unchecked(params, key.q, key.r, m))
}

#[inline]
pub(crate) fn eval_unchecked(params: &HashFamilyParams, q: u64, r: u64, m: u64) -> u32 {
    let p = params.prime();
    let v = (m * q + r) % p;
    (v & (params.tag_space_size() as u64 - 1)) as u32
}

/// Canonical position of `key` in the fixed enumeration order,
/// `(q - 1) * p + r`.
pub fn index_of(params: &HashFamilyParams, key: &HashKey) -> Result<u64, HashFamilyError> {
    if key.q == 0 || key.q >= params.prime() || key.r >= params.prime() {
        return Err(HashFamilyError::KeyOutOfRange {
            q: key.q,
            r: key.r,
            prime: params.prime(),
        });
    }
    Ok((key.q - 1) * params.prime() + key.r)
}

/// Inverse of [`index_of`].
pub fn key_of(params: &HashFamilyParams, index: u64) -> Result<HashKey, HashFamilyError> {
    if index >= params.family_size() {
        return Err(HashFamilyError::IndexOutOfRange {
            index,
            family_size: params.family_size(),
        });
    }
    Ok(HashKey {
        q: index / params.prime() + 1,
        r: index % params.prime(),
    })
}

/// Counts, over every member of the family, how many keys map `m` to each
/// tag. The returned vector is indexed by tag and sums to `p*(p-1)`.
///
/// This is an honest exhaustive enumeration; it exists as the ground-truth
/// side of balance checks, so it must not take structural shortcuts.
pub fn preimage_histogram(
    params: &HashFamilyParams,
    m: u64,
) -> Result<Vec<u64>, HashFamilyError> {
    params.check_message(m)?;
    let p = params.prime();
    let mut counts = vec![0u64; params.tag_space_size() as usize];
    for q in 1..p {
        // walk v = (m*q + r) mod p over r = 0..p without re-multiplying
        let mut v = (m * q) % p;
        for _ in 0..p {
            counts[(v & (params.tag_space_size() as u64 - 1)) as usize] += 1;
            v += 1;
            if v == p {
                v = 0;
            }
        }
    }
    Ok(counts)
}
