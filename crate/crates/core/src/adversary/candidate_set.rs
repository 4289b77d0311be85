//! Eve's surviving-hypothesis set: one bit per family member, with a sparse
//! fallback once the population collapses.
//!
//! Dense layout: one row per `q` (padded to whole words), bit `r` within the
//! row. The row update for a round `(m, tag set S)` exploits the family's
//! structure: a key `(q, r)` survives iff `((m*q + r) mod p) mod |T|` lands
//! in `S`, and for fixed `q` the surviving `r` form a cyclic rotation (by
//! `-m*q mod p`) of one membership mask over `[0, p)`. Each row is therefore
//! an AND with a bit-slice of a doubled mask — about 64x cheaper than
//! re-evaluating the hash for every key.
//!
//! Once the population falls below `1/64` of the family the set switches to
//! an explicit sorted key list and stays there (the population never grows).
//!
//! Throughout, the canonical member order is `index = (q-1)*p + r`,
//! independent of the padded in-memory layout.

use crate::hash_family::{eval_unchecked, HashFamilyParams, HashKey};

use super::tag_set::TagSet;
use super::AttackError;

/// Default memory ceiling for one dense bitmap.
pub const DEFAULT_MEMORY_LIMIT_BYTES: u64 = 512 << 20;

/// Dense rows switch to the sparse list below `family_size / DENSITY_SWITCH_DENOM`.
const DENSITY_SWITCH_DENOM: u64 = 64;

#[derive(Debug, Clone)]
enum Repr {
    Dense {
        /// `(p-1) * stride` words, row-major in `q`.
        words: Vec<u64>,
        stride: usize,
    },
    /// Strictly ascending `(q, r)` pairs, i.e. ascending canonical index.
    Sparse(Vec<(u32, u32)>),
}

#[derive(Debug, Clone)]
pub struct CandidateSet {
    params: HashFamilyParams,
    population: u64,
    repr: Repr,
}

impl CandidateSet {
    /// The full family, every member still possible.
    pub fn full(params: &HashFamilyParams) -> Result<Self, AttackError> {
        Self::full_with_memory_limit(params, DEFAULT_MEMORY_LIMIT_BYTES)
    }

    /// As [`CandidateSet::full`] with an explicit bitmap memory ceiling.
    pub fn full_with_memory_limit(
        params: &HashFamilyParams,
        limit_bytes: u64,
    ) -> Result<Self, AttackError> {
        let p = params.prime();
        let stride = (p as usize).div_ceil(64);
        let words_needed = (p - 1) as u128 * stride as u128;
        let bytes = words_needed * 8;
        if bytes > limit_bytes as u128 {
            return Err(AttackError::MemoryLimit {
                needed_bytes: bytes as u64,
                limit_bytes,
            });
        }
        let mut words = vec![0u64; words_needed as usize];
        let full_row = full_row_words(p, stride);
        for q in 0..(p - 1) as usize {
            words[q * stride..(q + 1) * stride].copy_from_slice(&full_row);
        }
        Ok(Self {
            params: *params,
            population: params.family_size(),
            repr: Repr::Dense { words, stride },
        })
    }

    /// Builds a (sparse) set from explicit members; used by tools and tests.
    pub fn from_keys<I: IntoIterator<Item = HashKey>>(
        params: &HashFamilyParams,
        keys: I,
    ) -> Result<Self, AttackError> {
        let p = params.prime();
        let mut pairs = Vec::new();
        for k in keys {
            if k.q == 0 || k.q >= p || k.r >= p {
                return Err(AttackError::HashFamily(
                    crate::hash_family::HashFamilyError::KeyOutOfRange {
                        q: k.q,
                        r: k.r,
                        prime: p,
                    },
                ));
            }
            pairs.push((k.q as u32, k.r as u32));
        }
        pairs.sort_unstable();
        pairs.dedup();
        Ok(Self {
            params: *params,
            population: pairs.len() as u64,
            repr: Repr::Sparse(pairs),
        })
    }

    pub fn params(&self) -> &HashFamilyParams {
        &self.params
    }

    /// Number of members still possible.
    pub fn population(&self) -> u64 {
        self.population
    }

    pub fn contains(&self, key: &HashKey) -> bool {
        let p = self.params.prime();
        if key.q == 0 || key.q >= p || key.r >= p {
            return false;
        }
        match &self.repr {
            Repr::Dense { words, stride } => {
                let row = (key.q - 1) as usize * stride;
                words[row + (key.r / 64) as usize] >> (key.r % 64) & 1 == 1
            }
            Repr::Sparse(pairs) => pairs
                .binary_search(&(key.q as u32, key.r as u32))
                .is_ok(),
        }
    }

    /// Surviving members in canonical (ascending-index) order.
    pub fn survivors(&self) -> impl Iterator<Item = HashKey> + '_ {
        let dense = match &self.repr {
            Repr::Dense { words, stride } => Some(DenseIter {
                words,
                stride: *stride,
                prime: self.params.prime(),
                q: 1,
                word_idx: 0,
                current: words.first().copied().unwrap_or(0),
            }),
            Repr::Sparse(_) => None,
        };
        let sparse = match &self.repr {
            Repr::Sparse(pairs) => Some(pairs.iter().map(|&(q, r)| HashKey {
                q: q as u64,
                r: r as u64,
            })),
            Repr::Dense { .. } => None,
        };
        dense
            .into_iter()
            .flatten()
            .chain(sparse.into_iter().flatten())
    }

    /// The single remaining member, if the set is a singleton.
    pub fn sole_survivor(&self) -> Option<HashKey> {
        if self.population == 1 {
            self.survivors().next()
        } else {
            None
        }
    }

    /// Removes every member whose hash of `m` is outside `tag_set`.
    ///
    /// Errors if the result would be empty: under an honest transcript the
    /// true key always survives, so emptiness signals a corrupted transcript
    /// or a bug.
    pub fn eliminate_in_place(
        &mut self,
        m: u64,
        tag_set: &TagSet,
    ) -> Result<(), AttackError> {
        if m >= self.params.message_space_size() {
            return Err(AttackError::HashFamily(
                crate::hash_family::HashFamilyError::MessageOutOfRange {
                    message: m,
                    space: self.params.message_space_size(),
                },
            ));
        }
        if tag_set.is_full() {
            return Ok(()); // nothing can be eliminated
        }
        let params = self.params;
        match &mut self.repr {
            Repr::Dense { words, stride } => {
                self.population = dense_eliminate(&params, words, *stride, m, tag_set);
            }
            Repr::Sparse(pairs) => {
                pairs.retain(|&(q, r)| {
                    tag_set.contains(eval_unchecked(&params, q as u64, r as u64, m))
                });
                self.population = pairs.len() as u64;
            }
        }
        if self.population == 0 {
            return Err(AttackError::EmptyCandidateSet);
        }
        self.maybe_compact();
        Ok(())
    }

    fn maybe_compact(&mut self) {
        let switch = self.params.family_size() / DENSITY_SWITCH_DENOM;
        if let Repr::Dense { .. } = self.repr {
            if self.population <= switch.max(1) {
                let pairs: Vec<(u32, u32)> = self
                    .survivors()
                    .map(|k| (k.q as u32, k.r as u32))
                    .collect();
                self.repr = Repr::Sparse(pairs);
            }
        }
    }
}

/// Bits `[0, p)` set within `stride` words, tail clear.
fn full_row_words(p: u64, stride: usize) -> Vec<u64> {
    let mut row = vec![!0u64; stride];
    let tail = (stride as u64 * 64 - p) as u32;
    if tail > 0 {
        row[stride - 1] = !0u64 >> tail;
    }
    row
}

/// One elimination round over the dense bitmap. Returns the new population.
fn dense_eliminate(
    params: &HashFamilyParams,
    words: &mut [u64],
    stride: usize,
    m: u64,
    tag_set: &TagSet,
) -> u64 {
    let p = params.prime();
    // doubled mask: bit i (i < 2p) set iff ((i mod p) mod |T|) is possible
    let mask = params.tag_space_size() as u64 - 1;
    let doubled_words = (2 * p as usize).div_ceil(64) + 1;
    let mut doubled = vec![0u64; doubled_words];
    for v in 0..p {
        if tag_set.contains((v & mask) as u32) {
            doubled[(v / 64) as usize] |= 1u64 << (v % 64);
            let w = v + p;
            doubled[(w / 64) as usize] |= 1u64 << (w % 64);
        }
    }
    let mut population = 0u64;
    let mut offset = 0u64; // (m * q) mod p, maintained incrementally
    for q in 1..p {
        offset += m;
        if offset >= p {
            offset -= p;
        }
        let row = &mut words[(q - 1) as usize * stride..q as usize * stride];
        let w = (offset / 64) as usize;
        let s = (offset % 64) as u32;
        if s == 0 {
            for (i, slot) in row.iter_mut().enumerate() {
                *slot &= doubled[w + i];
                population += slot.count_ones() as u64;
            }
        } else {
            for (i, slot) in row.iter_mut().enumerate() {
                let v = (doubled[w + i] >> s) | (doubled[w + i + 1] << (64 - s));
                *slot &= v;
                population += slot.count_ones() as u64;
            }
        }
    }
    population
}

struct DenseIter<'a> {
    words: &'a [u64],
    stride: usize,
    prime: u64,
    q: u64,
    word_idx: usize,
    current: u64,
}

impl Iterator for DenseIter<'_> {
    type Item = HashKey;

    fn next(&mut self) -> Option<HashKey> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as u64;
                self.current &= self.current - 1;
                return Some(HashKey {
                    q: self.q,
                    r: self.word_idx as u64 % self.stride as u64 * 64 + bit,
                });
            }
            self.word_idx += 1;
            if self.word_idx >= (self.prime - 1) as usize * self.stride {
                return None;
            }
            if self.word_idx % self.stride == 0 {
                self.q = self.word_idx as u64 / self.stride as u64 + 1;
            }
            self.current = self.words[self.word_idx];
        }
    }
}
