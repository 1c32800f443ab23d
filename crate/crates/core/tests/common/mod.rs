#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use storyline_core::generate::{generate_instance, GenParams};
use storyline_core::solver::feasible_permutations;
use storyline_core::{Drawing, StorylineInstance};

/// Instance with `1..=max_n` characters and `1..=max_l` layers picked from `seed`.
pub fn instance(seed: u64, max_n: usize, max_l: usize) -> StorylineInstance {
    let n = 1 + (seed as usize) % max_n;
    let l = 1 + (seed as usize / max_n) % max_l;
    generate_instance(&GenParams::new(n, l), seed).unwrap()
}

/// Uniformly random valid drawing: each layer picks one feasible order.
pub fn drawing(inst: &StorylineInstance, seed: u64) -> Drawing {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Drawing::new(
        (0..inst.num_layers())
            .map(|i| feasible_permutations(inst, i).choose(&mut rng).unwrap().clone())
            .collect(),
    )
}

/// Crossings of two orders of the same set by checking every pair.
pub fn pair_crossings(pi: &[usize], rho: &[usize]) -> u64 {
    let pos = |p: &[usize], c: usize| p.iter().position(|&x| x == c).unwrap();
    let mut k = 0;
    for (i, &a) in pi.iter().enumerate() {
        for &b in &pi[i + 1..] {
            if pos(rho, a) > pos(rho, b) {
                k += 1;
            }
        }
    }
    k
}

pub fn restrict(p: &[usize], set: &[usize]) -> Vec<usize> {
    p.iter().copied().filter(|c| set.contains(c)).collect()
}
