//! Exact minimum by dynamic programming over all feasible layer permutations.

use thiserror::Error;

use crate::drawing::Drawing;
use crate::instance::{CharId, Layer, StorylineInstance};

/// Default cap on `Σ |P_i| · |P_{i+1}|` layer-permutation pairs.
pub const DEFAULT_BUDGET: u128 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BruteForceError {
    #[error("search space of {needed} permutation pairs exceeds the budget of {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
}

fn factorial(k: usize) -> u128 {
    (1..=k as u128).fold(1u128, |a, b| a.saturating_mul(b))
}

/// Units of a layer: each interaction as a block, each free character alone.
fn units(inst: &StorylineInstance, layer: Layer) -> Vec<Vec<CharId>> {
    let mut out: Vec<Vec<CharId>> = inst
        .interactions_at(layer)
        .iter()
        .map(|&i| inst.interaction(i).chars.clone())
        .collect();
    let busy = inst.interacting_chars(layer);
    out.extend(
        inst.active(layer)
            .iter()
            .filter(|c| busy.binary_search(c).is_err())
            .map(|&c| vec![c]),
    );
    out.sort();
    out
}

/// Number of feasible permutations of `layer`.
pub fn feasible_count(inst: &StorylineInstance, layer: Layer) -> u128 {
    let u = units(inst, layer);
    u.iter()
        .fold(factorial(u.len()), |acc, b| acc.saturating_mul(factorial(b.len())))
}

/// Lexicographic permutations of `items` (Heap-free, stable order).
fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head.clone());
            out.push(tail);
        }
    }
    out
}

/// Every permutation of the active characters of `layer` that keeps each
/// interaction consecutive, in a fixed deterministic order.
pub fn feasible_permutations(inst: &StorylineInstance, layer: Layer) -> Vec<Vec<CharId>> {
    let units = units(inst, layer);
    let inner: Vec<Vec<Vec<CharId>>> = units.iter().map(|u| permutations(u)).collect();
    let mut out = Vec::new();
    for order in permutations(&(0..units.len()).collect::<Vec<_>>()) {
        // mixed-radix counter over the internal orders of the blocks
        let mut digits = vec![0usize; units.len()];
        loop {
            let mut perm = Vec::new();
            for &u in &order {
                perm.extend_from_slice(&inner[u][digits[u]]);
            }
            out.push(perm);
            let mut k = 0;
            while k < digits.len() {
                digits[k] += 1;
                if digits[k] < inner[k].len() {
                    break;
                }
                digits[k] = 0;
                k += 1;
            }
            if k == digits.len() {
                break;
            }
        }
    }
    out
}

/// Per-permutation bit signature over the pairs of `shared`: bit `(a, b)` set
/// iff `a` is above `b`. Crossings are the popcount of the xor.
fn signatures(perms: &[Vec<CharId>], shared: &[CharId], n: usize) -> Vec<Vec<u64>> {
    let pairs = shared.len() * shared.len().saturating_sub(1) / 2;
    let words = pairs.div_ceil(64).max(1);
    let mut pos = vec![0usize; n];
    perms
        .iter()
        .map(|p| {
            for (i, &c) in p.iter().enumerate() {
                pos[c] = i;
            }
            let mut sig = vec![0u64; words];
            let mut bit = 0;
            for (i, &a) in shared.iter().enumerate() {
                for &b in &shared[i + 1..] {
                    if pos[a] < pos[b] {
                        sig[bit / 64] |= 1 << (bit % 64);
                    }
                    bit += 1;
                }
            }
            sig
        })
        .collect()
}

fn distance(a: &[u64], b: &[u64]) -> u64 {
    a.iter().zip(b).map(|(x, y)| u64::from((x ^ y).count_ones())).sum()
}

struct Table {
    perms: Vec<Vec<Vec<CharId>>>,
    cost: Vec<Vec<u64>>,
    /// `gaps[i][q][p]` crossings between `perms[i][q]` and `perms[i + 1][p]`.
    gaps: Vec<Vec<Vec<u64>>>,
}

fn table(inst: &StorylineInstance, budget: u128) -> Result<Table, BruteForceError> {
    let counts: Vec<u128> = (0..inst.num_layers()).map(|l| feasible_count(inst, l)).collect();
    let needed = counts
        .windows(2)
        .fold(counts.first().copied().unwrap_or(0), |acc, w| {
            acc.saturating_add(w[0].saturating_mul(w[1]))
        });
    if needed > budget {
        return Err(BruteForceError::BudgetExceeded { needed, budget });
    }
    let perms: Vec<Vec<Vec<CharId>>> = (0..inst.num_layers()).map(|l| feasible_permutations(inst, l)).collect();
    let n = inst.num_chars();
    let mut cost = vec![vec![0u64; perms[0].len()]];
    let mut gaps = Vec::new();
    for l in 1..inst.num_layers() {
        let shared = inst.shared(l - 1);
        let prev_sig = signatures(&perms[l - 1], &shared, n);
        let sig = signatures(&perms[l], &shared, n);
        let gap: Vec<Vec<u64>> = prev_sig
            .iter()
            .map(|q| sig.iter().map(|p| distance(q, p)).collect())
            .collect();
        let prev = &cost[l - 1];
        let row: Vec<u64> = (0..perms[l].len())
            .map(|p| (0..prev.len()).map(|q| prev[q] + gap[q][p]).min().unwrap())
            .collect();
        cost.push(row);
        gaps.push(gap);
    }
    Ok(Table { perms, cost, gaps })
}

fn argmin(v: &[u64]) -> usize {
    let best = *v.iter().min().unwrap();
    v.iter().position(|&x| x == best).unwrap()
}

/// Crossing-minimum drawing and its crossing number, with the default budget.
pub fn solve_bruteforce(inst: &StorylineInstance) -> Result<(Drawing, u64), BruteForceError> {
    solve_bruteforce_with_budget(inst, DEFAULT_BUDGET)
}

pub fn solve_bruteforce_with_budget(inst: &StorylineInstance, budget: u128) -> Result<(Drawing, u64), BruteForceError> {
    let t = table(inst, budget)?;
    let last = inst.num_layers() - 1;
    let mut p = argmin(&t.cost[last]);
    let best = t.cost[last][p];
    let mut perms = vec![t.perms[last][p].clone()];
    for l in (1..=last).rev() {
        // first predecessor achieving the optimum
        let q = (0..t.perms[l - 1].len())
            .find(|&q| t.cost[l - 1][q] + t.gaps[l - 1][q][p] == t.cost[l][p])
            .unwrap();
        perms.push(t.perms[l - 1][q].clone());
        p = q;
    }
    perms.reverse();
    Ok((Drawing::new(perms), best))
}

/// Up to `cap` distinct crossing-minimum drawings, in a deterministic order.
pub fn optimal_drawings(
    inst: &StorylineInstance,
    budget: u128,
    cap: usize,
) -> Result<(Vec<Drawing>, u64), BruteForceError> {
    let t = table(inst, budget)?;
    let last = inst.num_layers() - 1;
    let best = *t.cost[last].iter().min().unwrap();
    let mut out = Vec::new();
    // suffix is built backwards; stack holds (layer, perm index, suffix)
    let mut stack: Vec<(Layer, usize, Vec<usize>)> = (0..t.perms[last].len())
        .rev()
        .filter(|&p| t.cost[last][p] == best)
        .map(|p| (last, p, vec![p]))
        .collect();
    while let Some((l, p, suffix)) = stack.pop() {
        if out.len() >= cap {
            break;
        }
        if l == 0 {
            let perms = suffix
                .iter()
                .rev()
                .enumerate()
                .map(|(layer, &i)| t.perms[layer][i].clone())
                .collect();
            out.push(Drawing::new(perms));
            continue;
        }
        for q in (0..t.perms[l - 1].len()).rev() {
            if t.cost[l - 1][q] + t.gaps[l - 1][q][p] == t.cost[l][p] {
                let mut s = suffix.clone();
                s.push(q);
                stack.push((l - 1, q, s));
            }
        }
    }
    Ok((out, best))
}
