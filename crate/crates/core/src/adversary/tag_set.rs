//! Small fixed-universe bitsets over the tag space `[0, |T|)`.
//!
//! The same type serves two roles with the same domain: sets of possible
//! one-time-pad values, and sets of possible unencrypted tags.

use serde::{Deserialize, Serialize};

/// Membership bitset over `[0, size)` where `size` is a power of two.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagSet {
    size: u32,
    words: Vec<u64>,
}

impl TagSet {
    pub fn empty(size: u32) -> Self {
        debug_assert!(size.is_power_of_two());
        Self {
            size,
            words: vec![0; (size as usize).div_ceil(64)],
        }
    }

    pub fn full(size: u32) -> Self {
        let mut s = Self::empty(size);
        for (i, w) in s.words.iter_mut().enumerate() {
            let lo = i as u32 * 64;
            let n = (size - lo).min(64);
            *w = if n == 64 { !0 } else { (1u64 << n) - 1 };
        }
        s
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn insert(&mut self, v: u32) {
        debug_assert!(v < self.size);
        self.words[(v / 64) as usize] |= 1u64 << (v % 64);
    }

    pub fn remove(&mut self, v: u32) {
        debug_assert!(v < self.size);
        self.words[(v / 64) as usize] &= !(1u64 << (v % 64));
    }

    #[inline]
    pub fn contains(&self, v: u32) -> bool {
        v < self.size && self.words[(v / 64) as usize] >> (v % 64) & 1 == 1
    }

    pub fn len(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.size
    }

    /// The image of the set under `v -> v XOR c`; a bijection of the
    /// universe, so the cardinality is preserved.
    pub fn xor_shift(&self, c: u32) -> Self {
        debug_assert!(c < self.size);
        let mut out = Self::empty(self.size);
        for v in self.iter() {
            out.insert(v ^ c);
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let base = i as u32 * 64;
            BitIter { word: w }.map(move |b| base + b)
        })
    }

    pub fn to_sorted_vec(&self) -> Vec<u32> {
        self.iter().collect()
    }
}

struct BitIter {
    word: u64,
}

impl Iterator for BitIter {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        if self.word == 0 {
            return None;
        }
        let b = self.word.trailing_zeros();
        self.word &= self.word - 1;
        Some(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_and_counts() {
        let s = TagSet::full(128);
        assert_eq!(s.len(), 128);
        assert!(s.is_full());
        let s = TagSet::full(4);
        assert_eq!(s.to_sorted_vec(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn insert_remove_contains() {
        let mut s = TagSet::empty(128);
        assert!(s.is_empty());
        s.insert(0);
        s.insert(127);
        s.insert(64);
        assert!(s.contains(0) && s.contains(64) && s.contains(127));
        assert!(!s.contains(1));
        s.remove(64);
        assert_eq!(s.to_sorted_vec(), vec![0, 127]);
    }

    #[test]
    fn xor_shift_is_bijective() {
        let mut s = TagSet::empty(128);
        for v in [1u32, 5, 88, 127] {
            s.insert(v);
        }
        let shifted = s.xor_shift(0b101_0101);
        assert_eq!(shifted.len(), s.len());
        for v in [1u32, 5, 88, 127] {
            assert!(shifted.contains(v ^ 0b101_0101));
        }
        assert_eq!(shifted.xor_shift(0b101_0101), s);
    }
}
