use crate::drawing::Drawing;
use crate::instance::{CharId, StorylineInstance};

/// Left-to-right sweep. Each layer keeps the previous order of its continuing
/// characters, pulls every interaction together at its first continuing
/// member, and appends what is new.
pub fn greedy_baseline(inst: &StorylineInstance) -> Drawing {
    let mut perms: Vec<Vec<CharId>> = Vec::with_capacity(inst.num_layers());
    for i in 0..inst.num_layers() {
        let active = inst.active(i);
        let carry: Vec<CharId> = match perms.last() {
            Some(prev) => prev.iter().copied().filter(|c| active.binary_search(c).is_ok()).collect(),
            None => Vec::new(),
        };
        let block = |idx: usize| -> Vec<CharId> {
            let chars = &inst.interaction(idx).chars;
            let mut b: Vec<CharId> = carry.iter().copied().filter(|c| chars.contains(c)).collect();
            b.extend(chars.iter().copied().filter(|c| !carry.contains(c)));
            b
        };
        let mut out = Vec::with_capacity(active.len());
        let mut done = vec![false; inst.interactions().len()];
        for &c in &carry {
            match inst.interaction_of(i, c) {
                Some(idx) if !done[idx] => {
                    done[idx] = true;
                    out.extend(block(idx));
                }
                Some(_) => {}
                None => out.push(c),
            }
        }
        for &idx in inst.interactions_at(i) {
            if !done[idx] {
                done[idx] = true;
                out.extend(block(idx));
            }
        }
        out.extend(
            active
                .iter()
                .copied()
                .filter(|&c| inst.interaction_of(i, c).is_none() && !carry.contains(&c)),
        );
        perms.push(out);
    }
    Drawing::new(perms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drawing::validate;
    use crate::instance::{Activity, Interaction};

    #[test]
    fn single_layer_stacks_interactions_then_free() {
        let inst = StorylineInstance::unnamed(
            4,
            1,
            vec![Interaction::new(0, [1, 3]), Interaction::new(0, [2])],
            vec![Some(Activity::new(0, 0)), None, None, None],
        )
        .unwrap();
        let d = greedy_baseline(&inst);
        assert_eq!(d.layer(0), &[1, 3, 2, 0]);
        assert!(validate(&inst, &d).is_empty());
    }

    #[test]
    fn carries_previous_order() {
        let inst = StorylineInstance::unnamed(
            3,
            2,
            vec![Interaction::new(0, [0, 1]), Interaction::new(1, [0, 2])],
            vec![None, Some(Activity::new(0, 1)), None],
        )
        .unwrap();
        let d = greedy_baseline(&inst);
        assert_eq!(d.layer(1), &[0, 2, 1]);
        assert!(validate(&inst, &d).is_empty());
    }
}
