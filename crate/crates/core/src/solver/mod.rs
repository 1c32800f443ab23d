//! Exact solving: the lazy LOP loop over a MILP backend, decoding, and the
//! brute-force oracle.

mod backend;
mod bruteforce;

use std::time::Instant;

use log::{debug, info, warn};
use thiserror::Error;

pub use backend::{
    backend_by_name, Backend, BackendError, BackendSolution, BackendStatus, Capabilities, HighsBackend, MilpProblem,
    Row, Session, SolveParams, BACKEND_ENV,
};
pub use bruteforce::{
    feasible_count, feasible_permutations, optimal_drawings, solve_bruteforce, solve_bruteforce_with_budget,
    BruteForceError, DEFAULT_BUDGET,
};

use crate::consistency::make_consistent;
use crate::crossings::total_crossings;
use crate::drawing::{validate, Drawing};
use crate::heuristics::{greedy_baseline, improve, initial_slicing, round_fractional, SliceConfig};
use crate::instance::{CharId, Layer, StorylineInstance};
use crate::models::{build_model, lop_rows, Formulation, IlpModel, LinConstraint, ModelOptions, Sense};

/// Violation tolerance for separation.
pub const SEPARATION_TOL: f64 = 1e-6;
/// Rows added per separation round at most.
pub const DEFAULT_BATCH_CAP: usize = 50_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub sbc: bool,
    /// Warm start from the slicing heuristic; its time is not counted.
    pub init: bool,
    /// Round every relaxation and intermediate solution into incumbents.
    pub rnd: bool,
    /// Seconds.
    pub time_limit: f64,
    pub seed: u64,
    pub batch_cap: usize,
    /// Layer orders pinned by equality rows.
    pub fixed: Vec<(Layer, Vec<CharId>)>,
    /// Backend name; `None` uses the environment or the default.
    pub backend: Option<String>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            sbc: true,
            init: false,
            rnd: false,
            time_limit: 3600.0,
            seed: 0,
            batch_cap: DEFAULT_BATCH_CAP,
            fixed: Vec::new(),
            backend: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    FeasibleTimeout,
    Infeasible,
    Error,
}

impl SolveStatus {
    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::FeasibleTimeout => "feasible-timeout",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Error => "error",
        }
    }
}

impl std::str::FromStr for SolveStatus {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "optimal" => Ok(SolveStatus::Optimal),
            "feasible-timeout" => Ok(SolveStatus::FeasibleTimeout),
            "infeasible" => Ok(SolveStatus::Infeasible),
            "error" => Ok(SolveStatus::Error),
            _ => Err(format!("unknown status '{s}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseEntry {
    pub phase: String,
    pub seconds: f64,
    /// Reported lower bound when the phase ended.
    pub bound: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub best_crossings: u64,
    /// Lower bound on the crossing number; never decreases across rounds.
    pub bound: f64,
    pub separation_rounds: usize,
    pub lop_added: usize,
    /// Cycles outside the model's LOP scope cut after the scoped rows were exhausted.
    pub transitivity_fallback: usize,
    /// Solve time, excluding the initial heuristic.
    pub wall_time: f64,
    pub init_time: f64,
    pub phase_log: Vec<PhaseEntry>,
}

impl SolveReport {
    fn new() -> Self {
        SolveReport {
            status: SolveStatus::Error,
            best_crossings: 0,
            bound: 0.0,
            separation_rounds: 0,
            lop_added: 0,
            transitivity_fallback: 0,
            wall_time: 0.0,
            init_time: 0.0,
            phase_log: Vec::new(),
        }
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid options: {0}")]
    InvalidOptions(String),
    #[error("backend '{backend}' cannot solve {formulation}: {missing}")]
    CapabilityMismatch {
        backend: String,
        formulation: Formulation,
        missing: &'static str,
    },
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("model is infeasible")]
    Infeasible(Box<SolveReport>),
    #[error("time limit reached without a feasible solution")]
    NoSolution(Box<SolveReport>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecodeError {
    #[error("layer {layer}: ordering variables do not form a linear order")]
    Intransitive { layer: Layer },
    #[error("layer {layer}: value {value} of {var} is not integral")]
    Fractional { layer: Layer, var: String, value: f64 },
}

fn is_one(v: f64) -> bool {
    v > 0.5
}

/// Per layer, characters by descending number of characters they precede.
pub fn decode_solution(model: &IlpModel, values: &[f64]) -> Result<Drawing, DecodeError> {
    let mut perms = Vec::with_capacity(model.layers().len());
    for (layer, act) in model.layers().iter().enumerate() {
        let k = act.len();
        let mut score: Vec<(usize, CharId)> = Vec::with_capacity(k);
        for &a in act {
            let mut s = 0;
            for &b in act {
                if a == b {
                    continue;
                }
                let v = model.ordering_value(values, layer, a, b);
                if (v - v.round()).abs() > 1e-4 {
                    return Err(DecodeError::Fractional {
                        layer,
                        var: format!("x_{layer}_{}_{}", a.min(b), a.max(b)),
                        value: v,
                    });
                }
                if is_one(v) {
                    s += 1;
                }
            }
            score.push((s, a));
        }
        score.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
        // a tournament is transitive iff its scores are k-1, ..., 0
        if score.iter().enumerate().any(|(i, &(s, _))| s != k - 1 - i) {
            return Err(DecodeError::Intransitive { layer });
        }
        perms.push(score.into_iter().map(|(_, c)| c).collect());
    }
    Ok(Drawing::new(perms))
}

fn layer_transitive(model: &IlpModel, values: &[f64], layer: Layer) -> bool {
    let act = &model.layers()[layer];
    let k = act.len();
    let mut scores: Vec<usize> = act
        .iter()
        .map(|&a| {
            act.iter()
                .filter(|&&b| b != a && is_one(model.ordering_value(values, layer, a, b)))
                .count()
        })
        .collect();
    scores.sort_unstable();
    scores.iter().enumerate().all(|(i, &s)| s == i) && k == scores.len()
}

fn integral(values: &[f64]) -> bool {
    values.iter().all(|v| (v - v.round()).abs() <= SEPARATION_TOL)
}

/// LOP rows of the model's scope violated by more than the tolerance, at most
/// `cap`. Integral assignments skip layers whose tournament is transitive.
pub fn separate_lop(model: &IlpModel, values: &[f64], integral: bool, cap: usize) -> Vec<LinConstraint> {
    separate(model, values, integral, cap, true)
}

fn separate(model: &IlpModel, values: &[f64], integral: bool, cap: usize, scoped: bool) -> Vec<LinConstraint> {
    let val = |v| model.value(values, v);
    let mut out = Vec::new();
    for layer in 0..model.layers().len() {
        if integral && layer_transitive(model, values, layer) {
            continue;
        }
        let act = &model.layers()[layer];
        let scope = model.lop_scope(layer);
        let k = act.len();
        for i in 0..k {
            for j in i + 1..k {
                for l in j + 1..k {
                    let t = [act[i], act[j], act[l]];
                    if scoped && !scope.allows(t) {
                        continue;
                    }
                    for row in lop_rows(layer, t) {
                        if row.violation(val) > SEPARATION_TOL {
                            out.push(row);
                            if out.len() >= cap {
                                return out;
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

fn to_row(model: &IlpModel, c: &LinConstraint) -> Row {
    let rhs = c.rhs as f64;
    let (lb, ub) = match c.sense {
        Sense::Le => (f64::NEG_INFINITY, rhs),
        Sense::Eq => (rhs, rhs),
        Sense::Ge => (rhs, f64::INFINITY),
    };
    Row {
        lb,
        ub,
        coefs: c
            .terms
            .iter()
            .map(|&(k, v)| (model.var_index(v).expect("declared variable"), k as f64))
            .collect(),
    }
}

/// The model's explicit rows as a backend problem; LOP rows are left out.
pub fn to_problem(model: &IlpModel) -> MilpProblem {
    let n = model.vars().len();
    let mut cost = vec![0.0; n];
    for &(c, v) in &model.objective.linear {
        cost[model.var_index(v).unwrap()] += c as f64;
    }
    MilpProblem {
        num_cols: n,
        cost,
        quadratic: model
            .objective
            .quadratic
            .iter()
            .map(|q| (q.coef as f64, model.var_index(q.a).unwrap(), model.var_index(q.b).unwrap()))
            .collect(),
        offset: model.objective.constant as f64,
        rows: model.constraints.iter().map(|c| to_row(model, c)).collect(),
    }
}

fn required(formulation: Formulation) -> (Capabilities, &'static str) {
    match formulation {
        Formulation::Qdr => (
            Capabilities {
                quadratic_objective: true,
                ..Default::default()
            },
            "quadratic objective",
        ),
        _ => (
            Capabilities {
                linear_objective: true,
                ..Default::default()
            },
            "linear objective",
        ),
    }
}

struct Incumbent {
    drawing: Drawing,
    crossings: u64,
    start: Vec<f64>,
}

struct Run<'a> {
    inst: &'a StorylineInstance,
    model: IlpModel,
    report: SolveReport,
    incumbent: Option<Incumbent>,
    clock: Instant,
}

impl Run<'_> {
    fn phase(&mut self, phase: &str, since: Instant, note: String) {
        debug!("{phase}: {note}");
        self.report.phase_log.push(PhaseEntry {
            phase: phase.to_string(),
            seconds: since.elapsed().as_secs_f64(),
            bound: self.report.bound,
            note,
        });
    }

    /// Offers a drawing as incumbent; it must satisfy every explicit row.
    fn offer(&mut self, d: Drawing, source: &str) {
        if !validate(self.inst, &d).is_empty() {
            return;
        }
        let d = if self.model.sbc {
            match make_consistent(self.inst, &d) {
                Ok(c) => c,
                Err(_) => return,
            }
        } else {
            d
        };
        let cr = total_crossings(self.inst, &d).expect("validated").total;
        if self.incumbent.as_ref().is_some_and(|i| i.crossings <= cr) {
            return;
        }
        let start = self.model.encode(&d);
        if !self.model.violated_rows(&start, SEPARATION_TOL).is_empty() {
            return;
        }
        debug!("incumbent {cr} from {source}");
        self.incumbent = Some(Incumbent {
            drawing: d,
            crossings: cr,
            start,
        });
    }

    fn raise_bound(&mut self, b: f64) {
        if b > self.report.bound {
            self.report.bound = b;
        }
    }

    fn proven(&self) -> bool {
        self.incumbent
            .as_ref()
            .is_some_and(|i| i.crossings as f64 <= (self.report.bound - SEPARATION_TOL).ceil())
    }

    fn remaining(&self, limit: f64) -> f64 {
        limit - self.clock.elapsed().as_secs_f64()
    }

    fn round_values(&mut self, values: &[f64], source: &str) {
        let d = round_fractional(self.inst, &self.model, values, self.model.sbc);
        let d = improve(self.inst, &d);
        self.offer(d, source);
    }
}

/// Solves `inst` to optimality with the named backend (see [`SolveOptions::backend`]).
pub fn solve_exact(
    inst: &StorylineInstance,
    formulation: Formulation,
    opts: &SolveOptions,
) -> Result<(Drawing, SolveReport), SolveError> {
    let backend = backend_by_name(opts.backend.as_deref())?;
    solve_exact_with(inst, formulation, opts, backend.as_ref())
}

/// Lazy loop: solve the model without LOP rows, add the violated ones, and
/// re-solve until the integral optimum is a linear order on every layer.
pub fn solve_exact_with(
    inst: &StorylineInstance,
    formulation: Formulation,
    opts: &SolveOptions,
    backend: &dyn Backend,
) -> Result<(Drawing, SolveReport), SolveError> {
    if !(opts.time_limit > 0.0) {
        return Err(SolveError::InvalidOptions("time limit must be positive".into()));
    }
    if opts.batch_cap == 0 {
        return Err(SolveError::InvalidOptions("batch cap must be positive".into()));
    }
    let caps = backend.capabilities();
    let (need, missing) = required(formulation);
    if (need.quadratic_objective && !caps.quadratic_objective) || (need.linear_objective && !caps.linear_objective) {
        return Err(SolveError::CapabilityMismatch {
            backend: backend.name().to_string(),
            formulation,
            missing,
        });
    }

    let mut report = SolveReport::new();
    let mut init = None;
    if opts.init {
        let t = Instant::now();
        let inner = SolveOptions {
            init: false,
            fixed: Vec::new(),
            ..opts.clone()
        };
        let (d, _) = initial_slicing(inst, &SliceConfig::default(), &inner);
        init = Some(improve(inst, &d));
        report.init_time = t.elapsed().as_secs_f64();
    }

    let t = Instant::now();
    let model = build_model(
        inst,
        formulation,
        &ModelOptions {
            sbc: opts.sbc,
            fixed: opts.fixed.clone(),
        },
    );
    let mut run = Run {
        inst,
        model,
        report,
        incumbent: None,
        clock: Instant::now(),
    };
    let stats = run.model.stats();
    run.phase(
        "build",
        t,
        format!(
            "{} vars, {} explicit rows, {} lazy LOP rows",
            run.model.vars().len(),
            run.model.constraints.len(),
            stats.count(crate::models::Family::Lop)
        ),
    );
    if let Some(d) = init {
        run.offer(d, "init");
    }
    let mut session = backend.open(&to_problem(&run.model))?;
    let params = |run: &Run, relax: bool| SolveParams {
        time_limit: run.remaining(opts.time_limit),
        seed: opts.seed,
        relax,
        start: if relax { None } else { run.incumbent.as_ref().map(|i| i.start.clone()) },
    };

    if opts.rnd {
        // root relaxation with LOP cuts, rounded after every round
        for _ in 0..10 {
            if run.remaining(opts.time_limit) <= 0.0 {
                break;
            }
            let t = Instant::now();
            let sol = session.solve(&params(&run, true))?;
            let Some(values) = sol.values.filter(|_| sol.status == BackendStatus::Optimal) else {
                break;
            };
            run.raise_bound(sol.bound);
            run.round_values(&values, "relaxation");
            let cuts = separate_lop(&run.model, &values, false, opts.batch_cap);
            run.report.separation_rounds += 1;
            run.report.lop_added += cuts.len();
            run.phase("relaxation", t, format!("bound {:.3}, {} cuts", sol.bound, cuts.len()));
            if cuts.is_empty() {
                break;
            }
            let rows: Vec<Row> = cuts.iter().map(|c| to_row(&run.model, c)).collect();
            session.add_rows(&rows)?;
        }
    }

    let mut decoded: Option<Drawing> = None;
    let mut timed_out = false;
    while !run.proven() {
        if run.remaining(opts.time_limit) <= 0.0 {
            break;
        }
        let t = Instant::now();
        let sol = session.solve(&params(&run, false))?;
        match sol.status {
            BackendStatus::Infeasible => {
                run.phase("mip", t, "infeasible".into());
                run.report.status = SolveStatus::Infeasible;
                run.report.wall_time = run.clock.elapsed().as_secs_f64();
                return Err(SolveError::Infeasible(Box::new(run.report)));
            }
            BackendStatus::TimeLimit => timed_out = true,
            BackendStatus::Optimal => run.raise_bound(sol.bound),
        }
        let Some(values) = sol.values else {
            run.phase("mip", t, "no solution".into());
            break;
        };
        let mut cuts = separate_lop(&run.model, &values, integral(&values), opts.batch_cap);
        if cuts.is_empty() {
            if let Ok(d) = decode_solution(&run.model, &values) {
                decoded = Some(d.clone());
                run.offer(d, "mip");
                if !timed_out {
                    // optimal for a relaxation whose optimum is a drawing
                    run.raise_bound(sol.objective);
                }
            } else {
                cuts = separate(&run.model, &values, integral(&values), opts.batch_cap, false);
                run.report.transitivity_fallback += cuts.len();
                warn!("{} cyclic triples outside the LOP scope", cuts.len());
            }
        } else if opts.rnd {
            run.round_values(&values, "mip");
        }
        run.report.separation_rounds += 1;
        run.report.lop_added += cuts.len();
        run.phase(
            "mip",
            t,
            format!("objective {:.3}, bound {:.3}, {} cuts", sol.objective, sol.bound, cuts.len()),
        );
        if timed_out {
            break;
        }
        if !cuts.is_empty() {
            let rows: Vec<Row> = cuts.iter().map(|c| to_row(&run.model, c)).collect();
            session.add_rows(&rows)?;
        } else if decoded.is_some() && !run.proven() {
            // the incumbent was replaced by a cheaper consistent one; nothing left
            break;
        }
    }

    run.report.wall_time = run.clock.elapsed().as_secs_f64();
    if run.incumbent.is_none() && opts.fixed.is_empty() {
        run.offer(improve(inst, &greedy_baseline(inst)), "greedy");
    }
    let proven = run.proven();
    let Some(best) = run.incumbent.take() else {
        run.report.status = SolveStatus::FeasibleTimeout;
        return Err(SolveError::NoSolution(Box::new(run.report)));
    };
    run.report.best_crossings = best.crossings;
    if proven {
        run.report.status = SolveStatus::Optimal;
        run.report.bound = best.crossings as f64;
    } else {
        run.report.status = SolveStatus::FeasibleTimeout;
    }
    info!(
        "{} {}: {} crossings ({}), {} rounds, {:.3}s",
        formulation,
        if opts.sbc { "+sbc" } else { "" },
        best.crossings,
        run.report.status.name(),
        run.report.separation_rounds,
        run.report.wall_time
    );
    Ok((best.drawing, run.report))
}
