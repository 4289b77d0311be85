//! The authentication primitive under study: a secret fixed hash function
//! shared by the honest parties, with the tag XOR-encrypted by a fresh
//! one-time pad value each round.
//!
//! Tags and pad values are plain integers below the (power-of-two) tag-space
//! size; nothing here needs byte-string framing.

use serde::{Deserialize, Serialize};

use crate::hash_family::{self, HashFamilyError, HashFamilyParams, HashKey};

/// One-time pad value for a single round, an integer in `[0, |T|)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OtpKey(pub u32);

/// A message together with its encrypted tag, as sent over the public
/// channel and seen by the eavesdropper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthenticatedMessage {
    pub message: u64,
    pub tag: u32,
}

/// Produces the encrypted tag `eval(key, m) XOR otp`.
pub fn make_tag(
    params: &HashFamilyParams,
    key: &HashKey,
    m: u64,
    otp: OtpKey,
) -> Result<u32, HashFamilyError> {
    let t = hash_family::eval(params, key, m)?;
    Ok(t ^ (otp.0 & (params.tag_space_size() - 1)))
}

/// Accepts iff `tag` equals `make_tag(params, key, m, otp)`.
pub fn verify(
    params: &HashFamilyParams,
    key: &HashKey,
    m: u64,
    tag: u32,
    otp: OtpKey,
) -> Result<bool, HashFamilyError> {
    Ok(make_tag(params, key, m, otp)? == tag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash_family::eval;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params() -> HashFamilyParams {
        HashFamilyParams::new(512, 128).unwrap()
    }

    #[test]
    fn zero_pad_is_plain_hash() {
        let p = params();
        let key = HashKey { q: 17, r: 400 };
        for m in [0u64, 100, 511] {
            assert_eq!(
                make_tag(&p, &key, m, OtpKey(0)).unwrap(),
                eval(&p, &key, m).unwrap()
            );
        }
    }

    #[test]
    fn xor_involution_recovers_hash() {
        let p = params();
        let key = HashKey { q: 3, r: 5 };
        let tag = make_tag(&p, &key, 2, OtpKey(77)).unwrap();
        assert_eq!(tag ^ 77, eval(&p, &key, 2).unwrap());
    }

    #[test]
    fn small_family_example() {
        let p = HashFamilyParams::new(10, 4).unwrap(); // p = 11
        let key = HashKey { q: 3, r: 5 };
        // eval(m=2) = 0, so the encrypted tag is the pad itself
        assert_eq!(make_tag(&p, &key, 2, OtpKey(3)).unwrap(), 3);
    }

    #[test]
    fn bit_flip_rejects() {
        let p = params();
        let key = HashKey { q: 99, r: 13 };
        let otp = OtpKey(41);
        let tag = make_tag(&p, &key, 300, otp).unwrap();
        assert!(verify(&p, &key, 300, tag, otp).unwrap());
        assert!(!verify(&p, &key, 300, tag ^ 1, otp).unwrap());
    }

    #[test]
    fn wrong_pad_accepts_iff_difference_zero() {
        let p = params();
        let key = HashKey { q: 99, r: 13 };
        let otp = OtpKey(41);
        let tag = make_tag(&p, &key, 300, otp).unwrap();
        for d in 0..128u32 {
            let accepted = verify(&p, &key, 300, tag, OtpKey(41 ^ d)).unwrap();
            assert_eq!(accepted, d == 0);
        }
    }

    proptest! {
        #[test]
        fn round_trip_accepts(q in 1u64..521, r in 0u64..521, m in 0u64..512, otp in 0u32..128) {
            let p = params();
            let key = HashKey { q, r };
            let tag = make_tag(&p, &key, m, OtpKey(otp)).unwrap();
            prop_assert!(verify(&p, &key, m, tag, OtpKey(otp)).unwrap());
        }
    }

    #[test]
    fn random_pad_tags_are_uniform() {
        // chi-square over |T| = 128 bins at the 1% level
        let p = params();
        let key = HashKey { q: 17, r: 400 };
        let m = 42u64;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let trials = 128 * 1000;
        let mut counts = [0u64; 128];
        for _ in 0..trials {
            let otp = OtpKey(rng.random_range(0..128));
            counts[make_tag(&p, &key, m, otp).unwrap() as usize] += 1;
        }
        let expected = trials as f64 / 128.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        // Wilson-Hilferty critical value, df = 127, alpha = 0.01
        let df = 127.0f64;
        let z = 2.3263478740408408f64;
        let crit = df * (1.0 - 2.0 / (9.0 * df) + z * (2.0 / (9.0 * df)).sqrt()).powi(3);
        assert!(chi2 < crit, "chi2 = {chi2:.2}, crit = {crit:.2}");
    }
}
