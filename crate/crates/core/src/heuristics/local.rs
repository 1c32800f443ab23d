//! Local improvements on complete drawings. None of them increases crossings.

use crate::consistency::assign;
use crate::crossings::crossings_between;
use crate::drawing::{validate, Drawing};
use crate::instance::{CharId, Layer, StorylineInstance};

use super::HeuristicError;

const NONE: usize = usize::MAX;

fn position_table(inst: &StorylineInstance, d: &Drawing) -> Vec<Vec<usize>> {
    d.perms()
        .iter()
        .map(|p| {
            let mut pos = vec![NONE; inst.num_chars()];
            for (i, &c) in p.iter().enumerate() {
                pos[c] = i;
            }
            pos
        })
        .collect()
}

fn checked(inst: &StorylineInstance, d: &Drawing) -> Result<(), HeuristicError> {
    let v = validate(inst, d);
    if v.is_empty() {
        Ok(())
    } else {
        Err(HeuristicError::InvalidDrawing(v))
    }
}

/// Both characters in the same interaction at `k`, or both in none.
fn move_together(inst: &StorylineInstance, k: Layer, a: CharId, b: CharId) -> bool {
    inst.interaction_of(k, a) == inst.interaction_of(k, b)
}

fn swap_pair(d: &mut Drawing, pos: &mut [Vec<usize>], a: CharId, b: CharId, layers: std::ops::RangeInclusive<Layer>) {
    for k in layers {
        let (pa, pb) = (pos[k][a], pos[k][b]);
        let mut perm = d.layer(k).to_vec();
        perm.swap(pa, pb);
        d.set_layer(k, perm);
        pos[k][a] = pb;
        pos[k][b] = pa;
    }
}

/// Finds two consecutive crossings of `a` and `b` with interchangeable curves
/// in between and removes both. Returns whether a swap was applied.
fn remove_one(inst: &StorylineInstance, d: &mut Drawing, pos: &mut [Vec<usize>], a: CharId, b: CharId) -> bool {
    let (sa, sb) = (inst.activity(a), inst.activity(b));
    let lo = sa.start.max(sb.start);
    let hi = sa.end.min(sb.end);
    if hi < lo + 2 {
        return false;
    }
    let above = |pos: &[Vec<usize>], k: Layer| pos[k][a] < pos[k][b];
    let gaps: Vec<Layer> = (lo..hi).filter(|&g| above(pos, g) != above(pos, g + 1)).collect();
    for w in gaps.windows(2) {
        let (g1, g2) = (w[0], w[1]);
        if (g1 + 1..=g2).all(|k| move_together(inst, k, a, b)) {
            swap_pair(d, pos, a, b, g1 + 1..=g2);
            return true;
        }
    }
    false
}

/// Rem-DC: removes pairs of crossings between the same two characters when
/// the two curves can be exchanged on every layer in between. Each pair of
/// characters is processed up to five times.
pub fn remove_double_crossings(inst: &StorylineInstance, d: &Drawing) -> Result<Drawing, HeuristicError> {
    checked(inst, d)?;
    let mut d = d.clone();
    let mut pos = position_table(inst, &d);
    let n = inst.num_chars();
    for a in 0..n {
        for b in a + 1..n {
            for _ in 0..5 {
                if !remove_one(inst, &mut d, &mut pos, a, b) {
                    break;
                }
            }
        }
    }
    Ok(d)
}

fn push_layer(inst: &StorylineInstance, d: &mut Drawing, i: Layer) {
    let prev_pos: std::collections::HashMap<CharId, usize> =
        d.layer(i - 1).iter().enumerate().map(|(p, &c)| (c, p)).collect();
    // None: not eligible; Some(group) with group = interaction or free
    let key = |c: CharId| prev_pos.contains_key(&c).then(|| inst.interaction_of(i, c));
    let mut perm = d.layer(i).to_vec();
    let mut p = 0;
    while p < perm.len() {
        let Some(k) = key(perm[p]) else {
            p += 1;
            continue;
        };
        let mut q = p + 1;
        while q < perm.len() && key(perm[q]) == Some(k) {
            q += 1;
        }
        perm[p..q].sort_by_key(|c| prev_pos[c]);
        p = q;
    }
    d.set_layer(i, perm);
}

/// Push-CR: one sweep over layers `1..ℓ`; every maximal run of characters
/// that were active before and move together takes its previous order.
pub fn push_crossings(inst: &StorylineInstance, d: &Drawing) -> Result<Drawing, HeuristicError> {
    checked(inst, d)?;
    let mut d = d.clone();
    for i in 1..inst.num_layers() {
        push_layer(inst, &mut d, i);
    }
    Ok(d)
}

fn local_crossings(d: &Drawing, i: Layer, perm: &[CharId]) -> u64 {
    let mut total = 0;
    if i > 0 {
        total += crossings_between(d.layer(i - 1), perm).unwrap_or(0);
    }
    if i + 1 < d.num_layers() {
        total += crossings_between(perm, d.layer(i + 1)).unwrap_or(0);
    }
    total
}

/// Order of `group` (given in current order) by repeatedly taking the vertex
/// with the fewest incoming arcs of the comparability digraph; characters
/// outside `s` keep their slots.
fn order_group(group: &[CharId], in_s: impl Fn(CharId) -> bool, arc: impl Fn(CharId, CharId) -> bool) -> Vec<CharId> {
    let members: Vec<CharId> = group.iter().copied().filter(|&c| in_s(c)).collect();
    let k = members.len();
    let mut indeg: Vec<usize> = (0..k)
        .map(|v| (0..k).filter(|&u| u != v && arc(members[u], members[v])).count())
        .collect();
    let mut taken = vec![false; k];
    let mut order = Vec::with_capacity(k);
    for _ in 0..k {
        let v = (0..k).filter(|&v| !taken[v]).min_by_key(|&v| (indeg[v], v)).unwrap();
        taken[v] = true;
        order.push(members[v]);
        for w in 0..k {
            if !taken[w] && arc(members[v], members[w]) {
                indeg[w] -= 1;
            }
        }
    }
    assign(group, &order).expect("order is a permutation of a subset of group")
}

fn bary_layer(inst: &StorylineInstance, d: &mut Drawing, pos: &[Vec<usize>], i: Layer) -> bool {
    let [idx] = inst.interactions_at(i) else {
        return false;
    };
    let members = &inst.interaction(*idx).chars;
    let neighbors: Vec<Layer> = [i.checked_sub(1), (i + 1 < inst.num_layers()).then_some(i + 1)]
        .into_iter()
        .flatten()
        .collect();
    let present = |k: Layer, c: CharId| pos[k][c] != NONE;
    let in_s = |c: CharId| neighbors.iter().any(|&k| present(k, c));
    // arc c -> c': every neighbor holding both has c above c', and one does
    let arc = |c: CharId, e: CharId| {
        let mut seen = false;
        for &k in &neighbors {
            if present(k, c) && present(k, e) {
                if pos[k][c] > pos[k][e] {
                    return false;
                }
                seen = true;
            }
        }
        seen
    };
    let cur = d.layer(i);
    let group_i: Vec<CharId> = cur.iter().copied().filter(|c| members.contains(c)).collect();
    let group_c: Vec<CharId> = cur.iter().copied().filter(|c| !members.contains(c)).collect();
    let pi_i = order_group(&group_i, in_s, arc);
    let pi_c = order_group(&group_c, in_s, arc);

    // crossings of c with char(I) on the neighboring gaps when placed above / below
    let prefers_above = |c: CharId| {
        let (mut above, mut below) = (0, 0);
        for &k in &neighbors {
            if !present(k, c) {
                continue;
            }
            for &m in members.iter().filter(|&&m| present(k, m)) {
                if pos[k][c] < pos[k][m] {
                    below += 1;
                } else {
                    above += 1;
                }
            }
        }
        above <= below
    };
    let split = pi_c.iter().take_while(|&&c| prefers_above(c)).count();
    let mut next = pi_c[..split].to_vec();
    next.extend_from_slice(&pi_i);
    next.extend_from_slice(&pi_c[split..]);
    if next.as_slice() == cur || local_crossings(d, i, &next) >= local_crossings(d, i, cur) {
        return false;
    }
    d.set_layer(i, next);
    true
}

fn bary_pass(inst: &StorylineInstance, d: &mut Drawing) {
    for i in 1..inst.num_layers() {
        let pos = position_table(inst, d);
        bary_layer(inst, d, &pos, i);
    }
}

/// Bary-SL: barycenter-style reordering of single-interaction layers, accepted
/// only when it removes crossings; five passes over layers `1..ℓ`.
pub fn barycenter_sl(inst: &StorylineInstance, d: &Drawing) -> Result<Drawing, HeuristicError> {
    checked(inst, d)?;
    let mut d = d.clone();
    for _ in 0..5 {
        bary_pass(inst, &mut d);
    }
    Ok(d)
}

/// Rem-DC followed by five alternating Bary-SL / Push-CR sweeps. Invalid
/// drawings are returned unchanged.
pub fn improve(inst: &StorylineInstance, d: &Drawing) -> Drawing {
    let Ok(mut d) = remove_double_crossings(inst, d) else {
        return d.clone();
    };
    for _ in 0..5 {
        bary_pass(inst, &mut d);
        for i in 1..inst.num_layers() {
            push_layer(inst, &mut d, i);
        }
    }
    d
}
