//! Splittable seed derivation for reproducible experiments.
//!
//! Every trial's RNG seed is a pure function of `(master seed, stream,
//! index)`, so adding trials or points to a sweep, or changing the worker
//! count, never perturbs the seeds of trials that already existed:
//!
//! ```text
//! derive_seed(master, stream, index)
//!   = mix(master + mix(stream + mix(index)))
//! ```
//!
//! where `mix` is the SplitMix64 finalizer and `+` wraps. Sweeps use the
//! point position as `stream` and the trial number as `index`.

/// SplitMix64 finalizer.
#[inline]
pub(crate) fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Derives the RNG seed for one unit of work.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    mix(master.wrapping_add(mix(stream.wrapping_add(mix(index)))))
}
