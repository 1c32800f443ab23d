//! The narrow interface between the solve loop and a MILP solver.

use std::ffi::CStr;
use std::num::NonZeroU32;

use highs::{ColProblem, HighsModelStatus, Model, Sense};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Capabilities {
    pub linear_objective: bool,
    /// Products of two binary columns in the objective.
    pub quadratic_objective: bool,
    /// Rows can be added to a live session between solves.
    pub incremental_add: bool,
    /// Lazy rows can be injected from inside the branch-and-bound.
    pub callback_lazy: bool,
}

/// One linear row `lb <= Σ coef * col <= ub`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub lb: f64,
    pub ub: f64,
    pub coefs: Vec<(usize, f64)>,
}

/// Minimization problem over binary columns.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpProblem {
    pub num_cols: usize,
    pub cost: Vec<f64>,
    /// `(coef, a, b)`: `coef * col_a * col_b`.
    pub quadratic: Vec<(f64, usize, usize)>,
    pub offset: f64,
    pub rows: Vec<Row>,
}

impl MilpProblem {
    pub fn objective(&self, x: &[f64]) -> f64 {
        self.offset
            + self.cost.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
            + self.quadratic.iter().map(|&(c, a, b)| c * x[a] * x[b]).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveParams {
    pub time_limit: f64,
    pub seed: u64,
    /// Solve the continuous relaxation instead.
    pub relax: bool,
    /// A feasible starting point for the columns of the problem.
    pub start: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendStatus {
    Optimal,
    Infeasible,
    /// Stopped by the time limit; `values` holds the best solution, if any.
    TimeLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackendSolution {
    pub status: BackendStatus,
    pub values: Option<Vec<f64>>,
    pub objective: f64,
    /// Proven lower bound on the optimum of the current problem.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("unknown backend '{0}'")]
    Unknown(String),
    #[error("backend does not support {0}")]
    Unsupported(&'static str),
    #[error("backend failure: {0}")]
    Failed(String),
}

pub trait Backend: Send + Sync {
    fn name(&self) -> &str;
    fn capabilities(&self) -> Capabilities;
    fn open(&self, problem: &MilpProblem) -> Result<Box<dyn Session>, BackendError>;
}

/// A live problem that can be re-solved after adding rows.
pub trait Session {
    fn add_rows(&mut self, rows: &[Row]) -> Result<(), BackendError>;
    fn solve(&mut self, params: &SolveParams) -> Result<BackendSolution, BackendError>;
}

/// Name of the environment variable that selects the backend.
pub const BACKEND_ENV: &str = "STORYLINE_BACKEND";

/// Backend by name; `None` reads [`BACKEND_ENV`] and defaults to HiGHS.
pub fn backend_by_name(name: Option<&str>) -> Result<Box<dyn Backend>, BackendError> {
    let env = std::env::var(BACKEND_ENV).ok();
    let name = name.or(env.as_deref()).unwrap_or("highs");
    match name.to_ascii_lowercase().as_str() {
        "highs" => Ok(Box::new(HighsBackend)),
        _ => Err(BackendError::Unknown(name.to_string())),
    }
}

/// HiGHS, statically linked. Binary products in the objective are linearized
/// with one auxiliary column each, exact at integral points.
#[derive(Debug, Clone, Copy, Default)]
pub struct HighsBackend;

impl Backend for HighsBackend {
    fn name(&self) -> &str {
        "highs"
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            linear_objective: true,
            quadratic_objective: true,
            incremental_add: true,
            callback_lazy: false,
        }
    }

    fn open(&self, problem: &MilpProblem) -> Result<Box<dyn Session>, BackendError> {
        Ok(Box::new(HighsSession::new(problem)))
    }
}

struct HighsSession {
    problem: MilpProblem,
    products: Vec<(usize, usize)>,
    cols: usize,
}

impl HighsSession {
    fn new(problem: &MilpProblem) -> Self {
        let products = problem.quadratic.iter().map(|&(_, a, b)| (a, b)).collect();
        HighsSession {
            problem: problem.clone(),
            products,
            cols: problem.num_cols + problem.quadratic.len(),
        }
    }

    // Rebuilt per solve: integrality differs between relaxation and MIP, and
    // HiGHS restarts branch-and-bound after row additions either way.
    fn model(&self, relax: bool) -> Model {
        let p = &self.problem;
        let mut model = ColProblem::default().optimise(Sense::Minimise);
        let mut cols = Vec::with_capacity(self.cols);
        for j in 0..p.num_cols {
            cols.push(model.add_column_with_integrality(p.cost[j], 0.0..=1.0, [], !relax));
        }
        for &(c, a, b) in &p.quadratic {
            let aux = model.add_col(c, 0.0..=1.0, []);
            let (ca, cb) = (cols[a], cols[b]);
            if c < 0.0 {
                model.add_row(..=0.0, [(aux, 1.0), (ca, -1.0)]);
                model.add_row(..=0.0, [(aux, 1.0), (cb, -1.0)]);
            } else {
                model.add_row(-1.0.., [(aux, 1.0), (ca, -1.0), (cb, -1.0)]);
            }
            cols.push(aux);
        }
        for r in &p.rows {
            let coefs = r.coefs.iter().map(|&(j, c)| (cols[j], c));
            model.add_row(r.lb..=r.ub, coefs);
        }
        model
    }
}

fn info(model: &highs::SolvedModel, name: &'static [u8]) -> Option<f64> {
    let name = CStr::from_bytes_with_nul(name).ok()?;
    model.double_info_value(name).ok()
}

impl Session for HighsSession {
    fn add_rows(&mut self, rows: &[Row]) -> Result<(), BackendError> {
        self.problem.rows.extend_from_slice(rows);
        Ok(())
    }

    fn solve(&mut self, params: &SolveParams) -> Result<BackendSolution, BackendError> {
        if self.cols == 0 {
            let infeasible = self.problem.rows.iter().any(|r| r.lb > 1e-9 || r.ub < -1e-9);
            return Ok(BackendSolution {
                status: if infeasible { BackendStatus::Infeasible } else { BackendStatus::Optimal },
                values: (!infeasible).then(Vec::new),
                objective: self.problem.offset,
                bound: self.problem.offset,
            });
        }
        let mut model = self.model(params.relax);
        model.make_quiet();
        model.set_threads(NonZeroU32::new(1).unwrap());
        model.set_option("time_limit", params.time_limit.max(1e-3));
        model.set_option("random_seed", (params.seed % i32::MAX as u64) as i32);
        model.set_option("mip_rel_gap", 0.0);
        // objectives are integral: a gap below 1 proves optimality
        model.set_option("mip_abs_gap", 1.0 - 1e-6);
        if let (Some(start), false) = (&params.start, params.relax) {
            let mut full = start.clone();
            full.extend(self.products.iter().map(|&(a, b)| start[a] * start[b]));
            model
                .try_set_solution(Some(&full), None, None, None)
                .map_err(|e| BackendError::Failed(format!("warm start rejected: {e:?}")))?;
        }
        let solved = model
            .try_solve()
            .map_err(|e| BackendError::Failed(format!("{e:?}")))?;
        let status = solved.status();
        let (status, has_values) = match status {
            HighsModelStatus::Optimal => (BackendStatus::Optimal, true),
            HighsModelStatus::Infeasible => (BackendStatus::Infeasible, false),
            HighsModelStatus::ReachedTimeLimit => (
                BackendStatus::TimeLimit,
                solved.primal_solution_status() == highs::HighsSolutionStatus::Feasible,
            ),
            HighsModelStatus::ModelEmpty => (BackendStatus::Optimal, true),
            other => return Err(BackendError::Failed(format!("solver stopped with status {other:?}"))),
        };
        let values = has_values.then(|| solved.get_solution().columns()[..self.problem.num_cols].to_vec());
        let objective = values.as_ref().map_or(f64::INFINITY, |v| self.problem.objective(v));
        let bound = if params.relax {
            if status == BackendStatus::Optimal {
                solved.objective_value()
            } else {
                f64::NEG_INFINITY
            }
        } else {
            match status {
                BackendStatus::Optimal => info(&solved, b"mip_dual_bound\0").unwrap_or(objective).min(objective),
                _ => info(&solved, b"mip_dual_bound\0").unwrap_or(f64::NEG_INFINITY),
            }
        };
        Ok(BackendSolution {
            status,
            values,
            objective,
            bound: if bound.is_finite() { bound } else { f64::NEG_INFINITY },
        })
    }
}
