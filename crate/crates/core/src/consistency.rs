//! Type-1 / type-2 consistency of drawings and the crossing-preserving repairs
//! that establish it.
//!
//! Both repairs never increase the number of crossings, so a crossing-minimum
//! drawing can always be assumed consistent. The models use this to add
//! symmetry-breaking equalities; here the transforms serve as canonicalizers
//! and as test assets.

use thiserror::Error;

use crate::crossings::{crossings_restricted, CrossingError};
use crate::drawing::{restrict, validate, Drawing, Violation};
use crate::instance::{CharId, Layer, StorylineInstance};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConsistencyError {
    #[error("assign: character {0} of the new order is not in the permutation")]
    NotSubset(CharId),
    #[error("drawing is invalid: {0:?}")]
    InvalidDrawing(Vec<Violation>),
    #[error("repair did not reach a fixpoint within {0} steps")]
    IterationCap(usize),
    #[error(transparent)]
    Crossing(#[from] CrossingError),
}

/// Violations of both consistency properties.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConsistencyReport {
    /// `(interaction, layer)` with `pi_layer[char(I)] != pi_time(I)[char(I)]`.
    pub type1_violations: Vec<(usize, Layer)>,
    /// `((I1, I2), layer)` where `pi_time(I1)[C]` is not a block of `pi_layer`.
    pub type2_violations: Vec<((usize, usize), Layer)>,
}

impl ConsistencyReport {
    pub fn is_consistent(&self) -> bool {
        self.type1_violations.is_empty() && self.type2_violations.is_empty()
    }
}

/// `assign(pi, phi)`: the members of `phi` swap positions so that they appear in
/// the order of `phi`; everything else stays where it is.
pub fn assign(pi: &[CharId], phi: &[CharId]) -> Result<Vec<CharId>, ConsistencyError> {
    if let Some(&c) = phi.iter().find(|c| !pi.contains(c)) {
        return Err(ConsistencyError::NotSubset(c));
    }
    let mut next = phi.iter();
    Ok(pi
        .iter()
        .map(|c| {
            if phi.contains(c) {
                *next.next().expect("phi is a permutation of a subset of pi")
            } else {
                *c
            }
        })
        .collect())
}

/// Whether layer `k` leaves `chars` untouched by interactions or keeps all of
/// them inside a single interaction.
fn chars_undisturbed(inst: &StorylineInstance, k: Layer, chars: &[CharId]) -> bool {
    let ci = inst.interacting_chars(k);
    if chars.iter().all(|c| ci.binary_search(c).is_err()) {
        return true;
    }
    inst.interactions_at(k)
        .iter()
        .any(|&idx| chars.iter().all(|&c| inst.interaction(idx).contains(c)))
}

/// `j(I)`: the earliest layer from which the members of interaction `idx` stay
/// active and undisturbed up to `time(I)`.
pub fn anchor_layer(inst: &StorylineInstance, idx: usize) -> Layer {
    let it = inst.interaction(idx);
    let mut j = it.time;
    while j > 0
        && it.chars.iter().all(|&c| inst.is_active(c, j - 1))
        && chars_undisturbed(inst, j, &it.chars)
    {
        j -= 1;
    }
    j
}

/// Pairs `(I1, I2)` subject to type-2 consistency: equal character sets,
/// `time(I1) < time(I2)` and every layer strictly between leaves the set
/// undisturbed.
pub fn qualifying_pairs(inst: &StorylineInstance) -> Vec<(usize, usize)> {
    let its = inst.interactions();
    let mut out = Vec::new();
    for a in 0..its.len() {
        for b in 0..its.len() {
            let (ia, ib) = (&its[a], &its[b]);
            if ia.time < ib.time
                && ia.chars == ib.chars
                && (ia.time + 1..ib.time).all(|k| chars_undisturbed(inst, k, &ia.chars))
            {
                out.push((a, b));
            }
        }
    }
    out
}

fn ensure_valid(inst: &StorylineInstance, d: &Drawing) -> Result<(), ConsistencyError> {
    let v = validate(inst, d);
    if v.is_empty() {
        Ok(())
    } else {
        Err(ConsistencyError::InvalidDrawing(v))
    }
}

fn type1_violations(inst: &StorylineInstance, d: &Drawing) -> Vec<(usize, Layer)> {
    let mut out = Vec::new();
    for (idx, it) in inst.interactions().iter().enumerate() {
        let target = restrict(d.layer(it.time), &it.chars);
        for k in anchor_layer(inst, idx)..it.time {
            if restrict(d.layer(k), &it.chars) != target {
                out.push((idx, k));
            }
        }
    }
    out
}

fn is_block_of(perm: &[CharId], block: &[CharId]) -> bool {
    perm.windows(block.len().max(1)).any(|w| w == block)
}

fn type2_violations(
    inst: &StorylineInstance,
    d: &Drawing,
    pairs: &[(usize, usize)],
) -> Vec<((usize, usize), Layer)> {
    let mut out = Vec::new();
    for &(a, b) in pairs {
        let (ia, ib) = (inst.interaction(a), inst.interaction(b));
        let block = restrict(d.layer(ia.time), &ia.chars);
        for k in ia.time + 1..ib.time {
            if !is_block_of(d.layer(k), &block) {
                out.push(((a, b), k));
            }
        }
    }
    out
}

/// Type-1 part of the consistency report.
pub fn is_type1_consistent(
    inst: &StorylineInstance,
    d: &Drawing,
) -> Result<ConsistencyReport, ConsistencyError> {
    ensure_valid(inst, d)?;
    Ok(ConsistencyReport {
        type1_violations: type1_violations(inst, d),
        type2_violations: Vec::new(),
    })
}

/// Type-2 part of the consistency report.
pub fn is_type2_consistent(
    inst: &StorylineInstance,
    d: &Drawing,
) -> Result<ConsistencyReport, ConsistencyError> {
    ensure_valid(inst, d)?;
    Ok(ConsistencyReport {
        type1_violations: Vec::new(),
        type2_violations: type2_violations(inst, d, &qualifying_pairs(inst)),
    })
}

/// Both parts of the consistency report.
pub fn check_consistency(
    inst: &StorylineInstance,
    d: &Drawing,
) -> Result<ConsistencyReport, ConsistencyError> {
    ensure_valid(inst, d)?;
    Ok(ConsistencyReport {
        type1_violations: type1_violations(inst, d),
        type2_violations: type2_violations(inst, d, &qualifying_pairs(inst)),
    })
}

fn step_cap(inst: &StorylineInstance, extra: usize) -> usize {
    (inst.interactions().len() * inst.num_layers()).max(1) + extra
}

/// Makes `d` type-1-consistent without increasing its crossings.
///
/// Inconsistent interactions are fixed latest first (ties by list order): the
/// members' order at the anchor layer is propagated forward with `assign`.
pub fn repair_type1(inst: &StorylineInstance, d: &Drawing) -> Result<Drawing, ConsistencyError> {
    ensure_valid(inst, d)?;
    let mut d = d.clone();
    let cap = step_cap(inst, 0);
    for _ in 0..=cap {
        let violations = type1_violations(inst, &d);
        let Some(&(idx, _)) = violations
            .iter()
            .max_by(|(a, _), (b, _)| inst.interaction(*a).time.cmp(&inst.interaction(*b).time).then(b.cmp(a)))
        else {
            return Ok(d);
        };
        let it = inst.interaction(idx);
        let anchor = anchor_layer(inst, idx);
        let order = restrict(d.layer(anchor), &it.chars);
        for k in anchor + 1..=it.time {
            let next = assign(d.layer(k), &order)?;
            d.set_layer(k, next);
        }
    }
    Err(ConsistencyError::IterationCap(cap))
}

/// Makes `d` type-2-consistent without increasing its crossings.
///
/// For the violated pair spanning the most layers, the character of the set
/// with the fewest crossings against outsiders is chosen (smallest id on ties)
/// and the set is re-inserted at its position as a block in the order it has at
/// the first interaction.
pub fn repair_type2(inst: &StorylineInstance, d: &Drawing) -> Result<Drawing, ConsistencyError> {
    ensure_valid(inst, d)?;
    let pairs = qualifying_pairs(inst);
    let mut d = d.clone();
    let cap = step_cap(inst, pairs.len());
    for _ in 0..=cap {
        let violations = type2_violations(inst, &d, &pairs);
        let Some(&((a, b), _)) = violations.iter().max_by(|((a1, b1), _), ((a2, b2), _)| {
            let span = |a: usize, b: usize| inst.interaction(b).time - inst.interaction(a).time;
            span(*a1, *b1)
                .cmp(&span(*a2, *b2))
                .then(inst.interaction(*a2).time.cmp(&inst.interaction(*a1).time))
                .then((a2, b2).cmp(&(a1, b1)))
        }) else {
            return Ok(d);
        };
        let (i, j) = (inst.interaction(a).time, inst.interaction(b).time);
        let set = inst.interaction(a).chars.clone();

        let mut best: Option<(u64, CharId)> = None;
        for &c in &set {
            let mut cost = 0;
            for k in i..j {
                let outside: Vec<CharId> = inst
                    .shared(k)
                    .into_iter()
                    .filter(|x| !set.contains(x))
                    .collect();
                cost += crossings_restricted(d.layer(k), d.layer(k + 1), &[c], &outside)?;
            }
            if best.map_or(true, |(bc, _)| cost < bc) {
                best = Some((cost, c));
            }
        }
        let (_, pivot) = best.expect("interactions are nonempty");

        let block = restrict(d.layer(i), &set);
        for k in i + 1..j {
            let mut next = Vec::with_capacity(d.layer(k).len());
            for &c in d.layer(k) {
                if c == pivot {
                    next.extend_from_slice(&block);
                } else if !set.contains(&c) {
                    next.push(c);
                }
            }
            d.set_layer(k, next);
        }
    }
    Err(ConsistencyError::IterationCap(cap))
}

/// Alternates both repairs until the drawing is type-1- and type-2-consistent.
pub fn make_consistent(inst: &StorylineInstance, d: &Drawing) -> Result<Drawing, ConsistencyError> {
    let cap = step_cap(inst, 0);
    let mut d = d.clone();
    for _ in 0..=cap {
        d = repair_type1(inst, &d)?;
        d = repair_type2(inst, &d)?;
        if check_consistency(inst, &d)?.is_consistent() {
            return Ok(d);
        }
    }
    Err(ConsistencyError::IterationCap(cap))
}
