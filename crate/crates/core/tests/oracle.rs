use storyline_core::generate::{generate_instance, GenParams};
use storyline_core::models::Formulation;
use storyline_core::solver::{solve_bruteforce, solve_exact, SolveOptions, SolveStatus};
use storyline_core::{total_crossings, validate};

#[test]
fn every_variant_matches_bruteforce() {
    let mut mismatches = Vec::new();
    for seed in 0..60u64 {
        let n = 2 + (seed as usize % 5);
        let l = 2 + (seed as usize % 7);
        let inst = generate_instance(&GenParams::new(n, l), seed).unwrap();
        let (_, best) = solve_bruteforce(&inst).unwrap();
        for f in [Formulation::Lin, Formulation::Qdr, Formulation::Plo] {
            for sbc in [false, true] {
                let opts = SolveOptions { sbc, time_limit: 60.0, ..Default::default() };
                let (d, r) = solve_exact(&inst, f, &opts).unwrap();
                assert_eq!(r.status, SolveStatus::Optimal);
                assert!(validate(&inst, &d).is_empty());
                assert_eq!(total_crossings(&inst, &d).unwrap().total, r.best_crossings);
                if r.best_crossings != best {
                    mismatches.push((seed, f, sbc, r.best_crossings, best));
                }
            }
        }
    }
    assert!(mismatches.is_empty(), "{mismatches:?}");
}
