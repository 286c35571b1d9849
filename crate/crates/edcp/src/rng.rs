//! Seed splitting and Born-rule sampling shared by both engines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Derive the seed of sub-run `index` from a master seed (splitmix64 mixing).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for trial `index` of a batch keyed by `master`.
pub fn trial_rng(master: u64, index: u64) -> ChaCha8Rng {
    seeded(derive_seed(master, index))
}

/// Pick an index from `weights` by inverse CDF with one uniform draw.
///
/// Both engines list outcomes in ascending order and call this with exactly
/// one draw per measurement, so a shared generator couples their transcripts.
/// Zero weights are never selected.
pub fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let u: f64 = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = Some(i);
        if u < acc {
            return i;
        }
    }
    last.expect("no outcome with positive weight")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_differ() {
        let a: Vec<u64> = (0..100).map(|i| derive_seed(7, i)).collect();
        let mut b = a.clone();
        b.sort();
        b.dedup();
        assert_eq!(b.len(), 100);
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
    }

    #[test]
    fn never_picks_zero_weight() {
        let mut rng = seeded(1);
        for _ in 0..1000 {
            let i = sample_index(&[0.0, 0.3, 0.0, 0.7, 0.0], &mut rng);
            assert!(i == 1 || i == 3);
        }
    }

    #[test]
    fn frequencies_follow_weights() {
        let mut rng = seeded(2);
        let trials = 20_000;
        let mut hits = 0;
        for _ in 0..trials {
            if sample_index(&[0.25, 0.75], &mut rng) == 0 {
                hits += 1;
            }
        }
        let f = hits as f64 / trials as f64;
        assert!((f - 0.25).abs() < 4.0 / (trials as f64).sqrt());
    }
}
