//! Shared fixtures for the criterion benchmarks.

use storyline_core::generate::{generate_instance, GenParams};
use storyline_core::StorylineInstance;

/// Deterministic instances of `n` characters over `layers` layers.
pub fn corpus(n: usize, layers: usize, count: u64) -> Vec<StorylineInstance> {
    (0..count)
        .map(|seed| generate_instance(&GenParams::new(n, layers), seed).expect("valid parameters"))
        .collect()
}

/// A random permutation of `0..n` from a fixed linear congruential sequence.
pub fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let j = (state >> 33) as usize % (i + 1);
        p.swap(i, j);
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_is_a_permutation() {
        let mut p = permutation(50, 7);
        p.sort_unstable();
        assert_eq!(p, (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn corpus_is_reproducible() {
        assert_eq!(corpus(5, 6, 3), corpus(5, 6, 3));
    }
}
