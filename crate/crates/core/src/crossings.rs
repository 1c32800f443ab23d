//! Crossing counting between consecutive permutations.

use std::collections::HashMap;

use thiserror::Error;

use crate::drawing::{validate, Drawing, Violation};
use crate::instance::{CharId, StorylineInstance};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CrossingError {
    #[error("character {0} appears more than once in a permutation")]
    Duplicate(CharId),
    #[error("character {0} is not contained in both permutations")]
    NotShared(CharId),
    #[error("drawing is invalid for the instance: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidDrawing(Vec<Violation>),
}

/// Crossings of a drawing, total and per gap between consecutive layers.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CrossingCount {
    pub total: u64,
    /// `per_gap[i]` counts the crossings between layers `i` and `i + 1`.
    pub per_gap: Vec<u64>,
}

fn positions(perm: &[CharId]) -> Result<HashMap<CharId, usize>, CrossingError> {
    let mut pos = HashMap::with_capacity(perm.len());
    for (i, &c) in perm.iter().enumerate() {
        if pos.insert(c, i).is_some() {
            return Err(CrossingError::Duplicate(c));
        }
    }
    Ok(pos)
}

/// Number of inversions of `seq`, counted by merge sort in `O(k log k)`.
pub fn count_inversions(seq: &mut [usize]) -> u64 {
    let mut buf = seq.to_vec();
    merge_count(seq, &mut buf)
}

fn merge_count(seq: &mut [usize], buf: &mut [usize]) -> u64 {
    let n = seq.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut inv = {
        let (left, right) = seq.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        merge_count(left, bl) + merge_count(right, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if seq[i] <= seq[j] {
            buf[k] = seq[i];
            i += 1;
        } else {
            buf[k] = seq[j];
            inv += (mid - i) as u64;
            j += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&seq[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&seq[j..n]);
    seq.copy_from_slice(&buf[..n]);
    inv
}

/// `cr(pi[C], rho[C])` for the common elements `C` of both permutations.
pub fn crossings_between(pi: &[CharId], rho: &[CharId]) -> Result<u64, CrossingError> {
    let rho_pos = positions(rho)?;
    positions(pi)?;
    let mut seq: Vec<usize> = pi.iter().filter_map(|c| rho_pos.get(c).copied()).collect();
    Ok(count_inversions(&mut seq))
}

/// `cr(pi, rho, X, Y)`: inverted unordered pairs `{c, c'}` with `c ∈ X` and `c' ∈ Y`.
///
/// With `X == Y` this equals `crossings_between(pi[X], rho[X])`.
pub fn crossings_restricted(
    pi: &[CharId],
    rho: &[CharId],
    xs: &[CharId],
    ys: &[CharId],
) -> Result<u64, CrossingError> {
    let pp = positions(pi)?;
    let rp = positions(rho)?;
    let lookup = |c: CharId| -> Result<(usize, usize), CrossingError> {
        match (pp.get(&c), rp.get(&c)) {
            (Some(&a), Some(&b)) => Ok((a, b)),
            _ => Err(CrossingError::NotShared(c)),
        }
    };
    let xs: Vec<(CharId, (usize, usize))> =
        xs.iter().map(|&c| lookup(c).map(|p| (c, p))).collect::<Result<_, _>>()?;
    let ys: Vec<(CharId, (usize, usize))> =
        ys.iter().map(|&c| lookup(c).map(|p| (c, p))).collect::<Result<_, _>>()?;
    let mut seen = std::collections::HashSet::new();
    let mut count = 0;
    for &(a, (pa, ra)) in &xs {
        for &(b, (pb, rb)) in &ys {
            // pairs with both ends in X ∩ Y would otherwise be counted twice
            if a == b || !seen.insert((a.min(b), a.max(b))) {
                continue;
            }
            if (pa < pb) != (ra < rb) {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Crossings of a valid drawing.
pub fn total_crossings(inst: &StorylineInstance, d: &Drawing) -> Result<CrossingCount, CrossingError> {
    let violations = validate(inst, d);
    if !violations.is_empty() {
        return Err(CrossingError::InvalidDrawing(violations));
    }
    Ok(count_unchecked(d))
}

/// Crossings of any sequence of permutations, without validation.
pub fn count_unchecked(d: &Drawing) -> CrossingCount {
    let per_gap: Vec<u64> = d
        .perms()
        .windows(2)
        .map(|w| crossings_between(&w[0], &w[1]).unwrap_or(0))
        .collect();
    CrossingCount {
        total: per_gap.iter().sum(),
        per_gap,
    }
}
