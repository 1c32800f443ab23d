//! Drawings (one permutation per layer) and their feasibility check.

use std::collections::HashSet;
use std::fmt;

use crate::instance::{CharId, Layer, StorylineInstance};

/// A storyline drawing: `perms[i]` orders the characters active at layer `i`
/// from top to bottom.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Drawing {
    perms: Vec<Vec<CharId>>,
}

impl Drawing {
    pub fn new(perms: Vec<Vec<CharId>>) -> Self {
        Drawing { perms }
    }

    pub fn perms(&self) -> &[Vec<CharId>] {
        &self.perms
    }

    pub fn layer(&self, i: Layer) -> &[CharId] {
        &self.perms[i]
    }

    pub fn set_layer(&mut self, i: Layer, perm: Vec<CharId>) {
        self.perms[i] = perm;
    }

    pub fn num_layers(&self) -> usize {
        self.perms.len()
    }

    pub fn into_perms(self) -> Vec<Vec<CharId>> {
        self.perms
    }

    /// Position of `c` within layer `i`.
    pub fn position(&self, i: Layer, c: CharId) -> Option<usize> {
        self.perms[i].iter().position(|&x| x == c)
    }
}

/// One reason a drawing is not a storyline solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    LayerCount { expected: usize, got: usize },
    /// `perms[layer]` is not a permutation of the active characters.
    Coverage {
        layer: Layer,
        missing: Vec<CharId>,
        unexpected: Vec<CharId>,
        duplicated: Vec<CharId>,
    },
    /// The members of an interaction are not consecutive.
    NotConsecutive { layer: Layer, interaction: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::LayerCount { expected, got } => {
                write!(f, "expected {expected} layers, drawing has {got}")
            }
            Violation::Coverage {
                layer,
                missing,
                unexpected,
                duplicated,
            } => write!(
                f,
                "layer {layer} is not a permutation of its active characters \
                 (missing {missing:?}, unexpected {unexpected:?}, duplicated {duplicated:?})"
            ),
            Violation::NotConsecutive { layer, interaction } => {
                write!(f, "interaction {interaction} is not consecutive at layer {layer}")
            }
        }
    }
}

/// All feasibility violations of `d` for `inst`; empty iff `d` is a storyline solution.
pub fn validate(inst: &StorylineInstance, d: &Drawing) -> Vec<Violation> {
    let mut out = Vec::new();
    if d.num_layers() != inst.num_layers() {
        out.push(Violation::LayerCount {
            expected: inst.num_layers(),
            got: d.num_layers(),
        });
        return out;
    }
    for (layer, perm) in d.perms().iter().enumerate() {
        let active = inst.active(layer);
        let mut seen = HashSet::with_capacity(perm.len());
        let mut duplicated = Vec::new();
        let mut unexpected = Vec::new();
        for &c in perm {
            if !seen.insert(c) {
                duplicated.push(c);
            } else if active.binary_search(&c).is_err() {
                unexpected.push(c);
            }
        }
        let missing: Vec<CharId> = active.iter().copied().filter(|c| !seen.contains(c)).collect();
        if !(missing.is_empty() && unexpected.is_empty() && duplicated.is_empty()) {
            out.push(Violation::Coverage {
                layer,
                missing,
                unexpected,
                duplicated,
            });
            continue;
        }
        for &idx in inst.interactions_at(layer) {
            let it = inst.interaction(idx);
            let pos: Vec<usize> = perm
                .iter()
                .enumerate()
                .filter(|(_, c)| it.contains(**c))
                .map(|(p, _)| p)
                .collect();
            let span = pos.last().unwrap() - pos.first().unwrap() + 1;
            if span != it.chars.len() {
                out.push(Violation::NotConsecutive {
                    layer,
                    interaction: idx,
                });
            }
        }
    }
    out
}

/// True iff the elements of `block` occupy consecutive positions of `perm`.
pub fn is_consecutive(perm: &[CharId], block: &[CharId]) -> bool {
    let pos: Vec<usize> = perm
        .iter()
        .enumerate()
        .filter(|(_, c)| block.contains(c))
        .map(|(p, _)| p)
        .collect();
    match (pos.first(), pos.last()) {
        (Some(a), Some(b)) => b - a + 1 == pos.len(),
        _ => true,
    }
}

/// `perm[set]`: the permutation restricted to the members of `set`.
pub fn restrict(perm: &[CharId], set: &[CharId]) -> Vec<CharId> {
    perm.iter().copied().filter(|c| set.contains(c)).collect()
}
