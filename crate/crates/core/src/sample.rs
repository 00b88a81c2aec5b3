//! Seeded sampling of index subsets, shared by the dataset splitter and the
//! basis-center selector.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Uniform sample of `k` distinct indices from `0..n` without replacement,
/// deterministic for a given seed, returned sorted ascending.
pub(crate) fn seeded_index_sample(n: usize, k: usize, seed: u64) -> Vec<usize> {
    debug_assert!(k <= n);
    let mut pool: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Partial Fisher-Yates: after i steps the prefix holds the sample.
    for i in 0..k {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    let mut picked = pool[..k].to_vec();
    picked.sort_unstable();
    picked
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn full_sample_is_identity() {
        assert_eq!(seeded_index_sample(5, 5, 9), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn deterministic_and_distinct() {
        for seed in 0..1000 {
            let s = seeded_index_sample(10, 5, seed);
            assert_eq!(s, seeded_index_sample(10, 5, seed));
            let set: HashSet<_> = s.iter().collect();
            assert_eq!(set.len(), 5);
            assert!(s.iter().all(|&i| i < 10));
        }
    }
}
