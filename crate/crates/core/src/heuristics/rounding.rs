//! Rounding of (possibly fractional) ordering variables to a drawing.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use crate::consistency::{anchor_layer, make_consistent};
use crate::drawing::{validate, Drawing};
use crate::instance::{CharId, Layer, StorylineInstance};
use crate::models::IlpModel;

/// Width of the band around 0.5 treated as undecided.
pub const EPS: f64 = 1e-6;

/// `d⁻(c)` over `others`: how many of them are strictly above `c`, plus the
/// undecided ones that were above `c` on the previous layer.
fn d_minus(
    model: &IlpModel,
    values: &[f64],
    i: Layer,
    c: CharId,
    others: &[CharId],
    prev: &HashMap<CharId, usize>,
) -> usize {
    others
        .iter()
        .filter(|&&o| o != c)
        .filter(|&&o| {
            let x = model.ordering_value(values, i, o, c);
            if x > 0.5 + EPS {
                return true;
            }
            (x - 0.5).abs() <= EPS
                && matches!((prev.get(&o), prev.get(&c)), (Some(po), Some(pc)) if po < pc)
        })
        .count()
}

/// Pairs whose order on layer `i` must equal the previous one under the
/// type-1 symmetry-breaking rows.
fn locked_pairs(inst: &StorylineInstance, anchors: &[Layer], i: Layer) -> Vec<(CharId, CharId)> {
    let mut out = Vec::new();
    for (idx, it) in inst.interactions().iter().enumerate() {
        if anchors[idx] < i && i <= it.time {
            for (k, &u) in it.chars.iter().enumerate() {
                for &v in &it.chars[k + 1..] {
                    out.push((u, v));
                }
            }
        }
    }
    out
}

/// Topological order of `items` under `before`, smallest key first; when the
/// constraints are cyclic the smallest remaining key is taken.
fn keyed_order<T: Copy>(items: &[T], key: impl Fn(T) -> (f64, usize, usize), before: &[(usize, usize)]) -> Vec<usize> {
    let k = items.len();
    let mut indeg = vec![0usize; k];
    for &(_, b) in before {
        indeg[b] += 1;
    }
    let cmp = |a: &usize, b: &usize| {
        let (ka, kb) = (key(items[*a]), key(items[*b]));
        ka.0.partial_cmp(&kb.0).unwrap_or(Ordering::Equal).then(ka.1.cmp(&kb.1)).then(ka.2.cmp(&kb.2))
    };
    let mut taken = vec![false; k];
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let free = (0..k).filter(|&v| !taken[v] && indeg[v] == 0).min_by(cmp);
        let v = free.unwrap_or_else(|| (0..k).filter(|&v| !taken[v]).min_by(cmp).unwrap());
        taken[v] = true;
        out.push(v);
        for &(a, b) in before {
            if a == v && !taken[b] {
                indeg[b] -= 1;
            }
        }
    }
    out
}

/// Rounds the ordering values of `model` layer by layer. Interaction members
/// are sorted by `d⁻` within the interaction; blocks and free characters by
/// the mean layer-wide `d⁻`. With `sbc_active` the pairs locked by type-1
/// rows follow the previous layer, and the result is made consistent so that
/// every symmetry-breaking equality holds.
pub fn round_fractional(inst: &StorylineInstance, model: &IlpModel, values: &[f64], sbc_active: bool) -> Drawing {
    let anchors: Vec<Layer> = (0..inst.interactions().len()).map(|i| anchor_layer(inst, i)).collect();
    let mut perms: Vec<Vec<CharId>> = Vec::with_capacity(inst.num_layers());
    for i in 0..inst.num_layers() {
        let active = inst.active(i);
        let prev: HashMap<CharId, usize> = match perms.last() {
            Some(p) => p.iter().enumerate().map(|(k, &c)| (c, k)).collect(),
            None => HashMap::new(),
        };
        let locked = if sbc_active && i > 0 { locked_pairs(inst, &anchors, i) } else { Vec::new() };
        let prev_pos = |c: CharId| prev.get(&c).copied().unwrap_or(usize::MAX);
        // (u, v) with u required above v
        let required: Vec<(CharId, CharId)> = locked
            .iter()
            .filter(|(u, v)| prev.contains_key(u) && prev.contains_key(v))
            .map(|&(u, v)| if prev[&u] < prev[&v] { (u, v) } else { (v, u) })
            .collect();

        let wide: HashMap<CharId, usize> = active
            .iter()
            .map(|&c| (c, d_minus(model, values, i, c, active, &prev)))
            .collect();

        // units: interaction blocks (internally ordered) and free characters
        let mut units: Vec<Vec<CharId>> = Vec::new();
        for &idx in inst.interactions_at(i) {
            let chars = &inst.interaction(idx).chars;
            let local: HashMap<CharId, usize> = chars
                .iter()
                .map(|&c| (c, d_minus(model, values, i, c, chars, &prev)))
                .collect();
            let at = |c: CharId| chars.iter().position(|&x| x == c).unwrap();
            let before: Vec<(usize, usize)> = required
                .iter()
                .filter(|(u, v)| chars.contains(u) && chars.contains(v))
                .map(|&(u, v)| (at(u), at(v)))
                .collect();
            let order = keyed_order(chars, |c| (local[&c] as f64, prev_pos(c), c), &before);
            units.push(order.into_iter().map(|k| chars[k]).collect());
        }
        let busy: BTreeSet<CharId> = units.iter().flatten().copied().collect();
        units.extend(active.iter().filter(|c| !busy.contains(c)).map(|&c| vec![c]));

        let unit_of: HashMap<CharId, usize> = units
            .iter()
            .enumerate()
            .flat_map(|(u, cs)| cs.iter().map(move |&c| (c, u)))
            .collect();
        let mut before: Vec<(usize, usize)> = required
            .iter()
            .map(|(u, v)| (unit_of[u], unit_of[v]))
            .filter(|(a, b)| a != b)
            .collect();
        before.sort_unstable();
        before.dedup();
        let idx: Vec<usize> = (0..units.len()).collect();
        let key = |u: usize| {
            let cs = &units[u];
            let mean = cs.iter().map(|c| wide[c] as f64).sum::<f64>() / cs.len() as f64;
            let p = cs.iter().map(|&c| prev_pos(c)).min().unwrap();
            (mean, p, cs[0])
        };
        let order = keyed_order(&idx, key, &before);
        perms.push(order.into_iter().flat_map(|u| units[u].iter().copied()).collect());
    }
    let d = Drawing::new(perms);
    debug_assert!(validate(inst, &d).is_empty());
    if sbc_active {
        make_consistent(inst, &d).unwrap_or(d)
    } else {
        d
    }
}
