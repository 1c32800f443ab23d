mod common;

use proptest::prelude::*;

use storyline_core::consistency::{check_consistency, repair_type1, repair_type2};
use storyline_core::crossings::{crossings_between, crossings_restricted, total_crossings};
use storyline_core::heuristics::{barycenter_sl, initial_slicing, push_crossings, remove_double_crossings, round_fractional, SliceConfig};
use storyline_core::models::{build_model, Family, Formulation, LopScope, ModelOptions};
use storyline_core::solver::{decode_solution, optimal_drawings, solve_bruteforce, solve_exact, SolveOptions, DEFAULT_BUDGET};
use storyline_core::{validate, StorylineInstance};

const FORMULATIONS: [Formulation; 3] = [Formulation::Lin, Formulation::Qdr, Formulation::Plo];

fn perm(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

fn perm_pair() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (0usize..40).prop_flat_map(|n| (perm(n), perm(n)))
}

fn perm_triple() -> impl Strategy<Value = (Vec<usize>, Vec<usize>, Vec<usize>, Vec<bool>)> {
    (0usize..30).prop_flat_map(|n| (perm(n), perm(n), perm(n), proptest::collection::vec(any::<bool>(), n)))
}

fn crossings(inst: &StorylineInstance, d: &storyline_core::Drawing) -> u64 {
    total_crossings(inst, d).unwrap().total
}

#[test]
fn inversion_count_matches_pairs_on_small_permutations() {
    // crossings(p, q) depends only on q relative to p, so fixing one side is exhaustive
    fn each(k: usize, cur: &mut Vec<usize>, used: &mut [bool], f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for c in 0..k {
            if !used[c] {
                used[c] = true;
                cur.push(c);
                each(k, cur, used, f);
                cur.pop();
                used[c] = false;
            }
        }
    }
    for k in 0..=8 {
        let id: Vec<usize> = (0..k).collect();
        each(k, &mut Vec::new(), &mut vec![false; k], &mut |p| {
            assert_eq!(crossings_between(&id, p).unwrap(), common::pair_crossings(&id, p));
        });
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn crossings_vanish_on_equal_orders(p in (0usize..60).prop_flat_map(perm)) {
        prop_assert_eq!(crossings_between(&p, &p).unwrap(), 0);
    }

    #[test]
    fn crossings_are_symmetric((p, q) in perm_pair()) {
        prop_assert_eq!(crossings_between(&p, &q).unwrap(), crossings_between(&q, &p).unwrap());
        prop_assert_eq!(crossings_between(&p, &q).unwrap(), common::pair_crossings(&p, &q));
    }

    #[test]
    fn triangle_inequality_on_subsets((a, b, c, mask) in perm_triple()) {
        let set: Vec<usize> = (0..a.len()).filter(|&x| mask[x]).collect();
        let (a, b, c) = (common::restrict(&a, &set), common::restrict(&b, &set), common::restrict(&c, &set));
        let ab = crossings_between(&a, &b).unwrap();
        let bc = crossings_between(&b, &c).unwrap();
        let ac = crossings_between(&a, &c).unwrap();
        prop_assert!(ab + bc >= ac);
    }

    #[test]
    fn crossings_decompose_over_partitions((a, b, _, mask) in perm_triple()) {
        let xs: Vec<usize> = (0..a.len()).filter(|&x| mask[x]).collect();
        let ys: Vec<usize> = (0..a.len()).filter(|&x| !mask[x]).collect();
        let whole = crossings_between(&a, &b).unwrap();
        let inside_x = crossings_between(&common::restrict(&a, &xs), &common::restrict(&b, &xs)).unwrap();
        let inside_y = crossings_between(&common::restrict(&a, &ys), &common::restrict(&b, &ys)).unwrap();
        let across = crossings_restricted(&a, &b, &xs, &ys).unwrap();
        prop_assert_eq!(whole, inside_x + inside_y + across);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn repairs_reach_a_consistent_fixpoint(seed in any::<u64>()) {
        let inst = common::instance(seed, 7, 9);
        let mut d = common::drawing(&inst, seed ^ 0x5eed);
        let mut k = crossings(&inst, &d);
        for _ in 0..50 {
            let d1 = repair_type1(&inst, &d).unwrap();
            prop_assert!(validate(&inst, &d1).is_empty());
            let k1 = crossings(&inst, &d1);
            prop_assert!(k1 <= k);
            let d2 = repair_type2(&inst, &d1).unwrap();
            prop_assert!(validate(&inst, &d2).is_empty());
            let k2 = crossings(&inst, &d2);
            prop_assert!(k2 <= k1);
            let done = d2 == d;
            d = d2;
            k = k2;
            if done {
                break;
            }
        }
        prop_assert!(check_consistency(&inst, &d).unwrap().is_consistent());
    }

    #[test]
    fn local_improvements_never_add_crossings(seed in any::<u64>()) {
        let inst = common::instance(seed, 7, 9);
        let d = common::drawing(&inst, seed.rotate_left(7));
        let k = crossings(&inst, &d);
        for step in [remove_double_crossings, push_crossings, barycenter_sl] {
            let e = step(&inst, &d).unwrap();
            prop_assert!(validate(&inst, &e).is_empty());
            prop_assert!(crossings(&inst, &e) <= k);
        }
    }

    #[test]
    fn encode_then_decode_is_identity(seed in any::<u64>()) {
        let inst = common::instance(seed, 6, 6);
        let d = common::drawing(&inst, seed.wrapping_add(1));
        for f in FORMULATIONS {
            let model = build_model(&inst, f, &ModelOptions::default());
            let x = model.encode(&d);
            let violated = model.violated_rows(&x, 1e-9);
            // propagation keeps only drawings that follow the previous layer; the rest must hold
            let allowed = |fam: Family| f == Formulation::Plo && matches!(fam, Family::PropR1 | Family::PropR2 | Family::PropI);
            prop_assert!(violated.iter().all(|r| allowed(r.family)));
            prop_assert_eq!(decode_solution(&model, &x).unwrap(), d.clone());
            prop_assert_eq!(model.objective.evaluate(|v| model.value(&x, v)) as u64, crossings(&inst, &d));
        }
    }

    #[test]
    fn rounding_returns_integral_points(seed in any::<u64>()) {
        let inst = common::instance(seed, 6, 6);
        let d = common::drawing(&inst, seed.wrapping_mul(3));
        for f in FORMULATIONS {
            let model = build_model(&inst, f, &ModelOptions::default());
            prop_assert_eq!(round_fractional(&inst, &model, &model.encode(&d), false), d.clone());
        }
    }

    #[test]
    fn plo_lop_rows_follow_the_closed_form(seed in any::<u64>()) {
        let inst = common::instance(seed, 8, 10);
        let lin = build_model(&inst, Formulation::Lin, &ModelOptions::default());
        let plo = build_model(&inst, Formulation::Plo, &ModelOptions::default());
        let c3 = |k: usize| (k * k.saturating_sub(1) * k.saturating_sub(2) / 6) as usize;
        let c2 = |k: usize| (k * k.saturating_sub(1) / 2) as usize;
        let (mut full, mut reduced, mut droppable) = (0, 0, false);
        for layer in 0..inst.num_layers() {
            let k = inst.active(layer).len();
            full += 2 * c3(k);
            let at = inst.interactions_at(layer);
            let eligible = layer > 0 && at.len() == 1 && {
                let it = inst.interaction(at[0]);
                inst.active(layer).iter().all(|c| inst.is_active(*c, layer - 1) || it.contains(*c))
            };
            if !eligible {
                reduced += 2 * c3(k);
                continue;
            }
            let it = inst.interaction(at[0]);
            let m = it.chars.len();
            let all_old = it.chars.iter().all(|c| inst.is_active(*c, layer - 1));
            let kept = c2(k - m) + if all_old { 0 } else { c3(m) };
            droppable |= kept < c3(k);
            reduced += 2 * kept;
            let reduced_scope = matches!(plo.lop_scope(layer), LopScope::Reduced { .. });
            prop_assert!(reduced_scope);
        }
        prop_assert_eq!(lin.lop_row_count(), full);
        prop_assert_eq!(plo.lop_row_count(), reduced);
        prop_assert!(reduced <= full);
        prop_assert_eq!(reduced < full, droppable);
    }

    #[test]
    fn some_optimal_drawing_is_consistent(seed in any::<u64>()) {
        let inst = common::instance(seed, 5, 6);
        let (drawings, _) = optimal_drawings(&inst, DEFAULT_BUDGET, 5000).unwrap();
        prop_assert!(drawings.iter().any(|d| check_consistency(&inst, d).unwrap().is_consistent()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn exact_solutions_are_valid_and_optimal(seed in any::<u64>(), f in 0usize..3, sbc in any::<bool>()) {
        let inst = common::instance(seed, 6, 7);
        let (_, best) = solve_bruteforce(&inst).unwrap();
        let opts = SolveOptions { sbc, ..SolveOptions::default() };
        let (d, report) = solve_exact(&inst, FORMULATIONS[f], &opts).unwrap();
        prop_assert!(validate(&inst, &d).is_empty());
        prop_assert_eq!(report.best_crossings, crossings(&inst, &d));
        prop_assert_eq!(report.best_crossings, best);
        prop_assert!(report.phase_log.windows(2).all(|w| w[0].bound <= w[1].bound));
        prop_assert!(report.phase_log.last().map_or(true, |p| p.bound <= report.bound));
        prop_assert_eq!(report.transitivity_fallback, 0);
    }

    #[test]
    fn slicing_with_one_window_is_optimal(seed in any::<u64>()) {
        let inst = common::instance(seed, 6, 7);
        let (_, best) = solve_bruteforce(&inst).unwrap();
        let l = inst.num_layers();
        let (d, outcome) = initial_slicing(&inst, &SliceConfig::new(l + 1, 1).unwrap(), &SolveOptions::default());
        prop_assert!(outcome.fallback.is_none());
        prop_assert!(validate(&inst, &d).is_empty());
        prop_assert_eq!(crossings(&inst, &d), best);
    }
}
