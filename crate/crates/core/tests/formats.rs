mod common;

use std::path::Path;

use proptest::prelude::*;

use storyline_core::crossings::total_crossings;
use storyline_core::heuristics::greedy_baseline;
use storyline_core::io::{
    instance_to_string, parse_instance, parse_instance_str, read_solution, read_solution_str, render_svg,
    solution_to_string, write_instance, write_solution, CurveStyle, RenderSpec, SolutionReport,
};
use storyline_core::models::Formulation;
use storyline_core::solver::{solve_exact, SolveOptions};

type Segment = ((f64, f64), (f64, f64));

/// Line segments of every `<path>` in the document, one list per path.
fn path_segments(svg: &str) -> Vec<Vec<Segment>> {
    let mut out = Vec::new();
    for line in svg.lines().filter(|l| l.starts_with("<path")) {
        let d = line.split(" d=\"").nth(1).unwrap().split('"').next().unwrap();
        let tokens: Vec<&str> = d.split_whitespace().collect();
        let num = |s: &str| s.parse::<f64>().unwrap();
        let mut segs = Vec::new();
        let mut cur = (0.0, 0.0);
        let mut i = 0;
        while i < tokens.len() {
            match tokens[i] {
                "M" => {
                    cur = (num(tokens[i + 1]), num(tokens[i + 2]));
                    i += 3;
                }
                "L" => {
                    let next = (num(tokens[i + 1]), num(tokens[i + 2]));
                    segs.push((cur, next));
                    cur = next;
                    i += 3;
                }
                "H" => {
                    let next = (num(tokens[i + 1]), cur.1);
                    segs.push((cur, next));
                    cur = next;
                    i += 2;
                }
                t => panic!("unexpected path command {t}"),
            }
        }
        out.push(segs);
    }
    out
}

fn orient(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

fn proper_intersection((p, q): Segment, (r, s): Segment) -> bool {
    let (d1, d2) = (orient(p, q, r), orient(p, q, s));
    let (d3, d4) = (orient(r, s, p), orient(r, s, q));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn geometric_crossings(svg: &str) -> u64 {
    let paths = path_segments(svg);
    let mut k = 0;
    for (i, a) in paths.iter().enumerate() {
        for b in &paths[i + 1..] {
            for &s in a {
                for &t in b {
                    k += proper_intersection(s, t) as u64;
                }
            }
        }
    }
    k
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn instance_files_round_trip(seed in any::<u64>()) {
        let inst = common::instance(seed, 9, 12);
        prop_assert_eq!(parse_instance_str(&instance_to_string(&inst)).unwrap(), inst);
    }

    #[test]
    fn solution_files_round_trip(seed in any::<u64>()) {
        let inst = common::instance(seed, 7, 9);
        let d = common::drawing(&inst, seed);
        let k = total_crossings(&inst, &d).unwrap().total;
        let report = SolutionReport { bound: seed as f64 / 7.0, ..SolutionReport::heuristic("random", k) };
        let text = solution_to_string(&inst, &d, &report);
        let (back, back_report) = read_solution_str(&text, &inst).unwrap();
        prop_assert_eq!(back_report.crossings, total_crossings(&inst, &d).unwrap().total);
        prop_assert_eq!(back, d);
        prop_assert_eq!(back_report, report);
    }

    #[test]
    fn orthogonal_geometry_crosses_exactly_as_counted(seed in any::<u64>()) {
        let inst = common::instance(seed, 6, 8);
        let d = common::drawing(&inst, seed.rotate_right(3));
        let svg = render_svg(&inst, &d, &RenderSpec::default()).unwrap();
        prop_assert_eq!(geometric_crossings(&svg), total_crossings(&inst, &d).unwrap().total);
    }
}

#[test]
fn files_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let inst = common::instance(17, 6, 8);
    let ipath = dir.path().join("inst.toml");
    write_instance(&ipath, &inst).unwrap();
    assert_eq!(parse_instance(&ipath).unwrap(), inst);

    let d = greedy_baseline(&inst);
    let k = total_crossings(&inst, &d).unwrap().total;
    let spath = dir.path().join("sol.toml");
    write_solution(&spath, &inst, &d, &SolutionReport::heuristic("greedy", k)).unwrap();
    assert_eq!(read_solution(&spath, &inst).unwrap().0, d);
    assert!(parse_instance(dir.path().join("missing.toml")).is_err());
}

#[test]
fn solving_twice_gives_identical_artifacts() {
    let inst = common::instance(23, 6, 8);
    let run = || {
        let (d, r) = solve_exact(&inst, Formulation::Plo, &SolveOptions { seed: 5, ..SolveOptions::default() }).unwrap();
        let sol = solution_to_string(&inst, &d, &SolutionReport::from_solve("plo", &r, false));
        let svg = render_svg(&inst, &d, &RenderSpec { style: CurveStyle::Smooth, ..RenderSpec::default() }).unwrap();
        (sol, svg)
    };
    assert_eq!(run(), run());
}

#[test]
fn svg_matches_golden_file() {
    let text = include_str!("data/golden.toml");
    let inst = parse_instance_str(text).unwrap();
    let d = greedy_baseline(&inst);
    let svg = render_svg(&inst, &d, &RenderSpec::default()).unwrap();
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/golden.svg");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&golden, &svg).unwrap();
    }
    assert_eq!(svg, std::fs::read_to_string(&golden).unwrap());
}
