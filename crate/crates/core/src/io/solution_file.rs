use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::crossings::total_crossings;
use crate::drawing::{validate, Drawing};
use crate::instance::StorylineInstance;
use crate::solver::{SolveReport, SolveStatus};

use super::{read_text, write_text, IoError, SCHEMA_VERSION};

/// The report fields stored next to a drawing.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionReport {
    /// Formulation or heuristic that produced the drawing.
    pub method: String,
    pub status: SolveStatus,
    pub crossings: u64,
    pub bound: f64,
    pub separation_rounds: usize,
    pub lop_added: usize,
    pub transitivity_fallback: usize,
    /// Omitted unless requested, so files stay byte-identical across runs.
    pub wall_time: Option<f64>,
}

impl SolutionReport {
    pub fn from_solve(method: &str, r: &SolveReport, record_time: bool) -> Self {
        SolutionReport {
            method: method.to_string(),
            status: r.status,
            crossings: r.best_crossings,
            bound: r.bound,
            separation_rounds: r.separation_rounds,
            lop_added: r.lop_added,
            transitivity_fallback: r.transitivity_fallback,
            wall_time: record_time.then_some(r.wall_time),
        }
    }

    /// Report for a drawing that comes without solver statistics.
    pub fn heuristic(method: &str, crossings: u64) -> Self {
        SolutionReport {
            method: method.to_string(),
            status: SolveStatus::FeasibleTimeout,
            crossings,
            bound: 0.0,
            separation_rounds: 0,
            lop_added: 0,
            transitivity_fallback: 0,
            wall_time: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub version: u32,
    pub method: String,
    pub status: String,
    pub crossings: u64,
    pub bound: f64,
    pub separation_rounds: usize,
    pub lop_added: usize,
    pub transitivity_fallback: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
    /// Top-to-bottom character ids per layer.
    pub layers: Vec<Vec<String>>,
}

pub fn solution_to_string(inst: &StorylineInstance, d: &Drawing, report: &SolutionReport) -> String {
    let names = inst.names();
    let file = SolutionFile {
        version: SCHEMA_VERSION,
        method: report.method.clone(),
        status: report.status.name().to_string(),
        crossings: report.crossings,
        bound: report.bound,
        separation_rounds: report.separation_rounds,
        lop_added: report.lop_added,
        transitivity_fallback: report.transitivity_fallback,
        wall_time: report.wall_time,
        layers: d
            .perms()
            .iter()
            .map(|p| p.iter().map(|&c| names[c].clone()).collect())
            .collect(),
    };
    toml::to_string(&file).expect("solution file serializes")
}

pub fn write_solution(
    path: impl AsRef<Path>,
    inst: &StorylineInstance,
    d: &Drawing,
    report: &SolutionReport,
) -> Result<(), IoError> {
    write_text(path.as_ref(), &solution_to_string(inst, d, report))
}

/// Parses a solution and checks it against `inst`: ids must resolve, the drawing
/// must be valid and the stored crossing count must match a recount.
pub fn read_solution_str(text: &str, inst: &StorylineInstance) -> Result<(Drawing, SolutionReport), IoError> {
    let file: SolutionFile = toml::from_str(text).map_err(|e| IoError::from_toml(text, e))?;
    if file.version != SCHEMA_VERSION {
        return Err(IoError::Schema(format!(
            "unsupported schema version {} (expected {SCHEMA_VERSION})",
            file.version
        )));
    }
    let status: SolveStatus = file.status.parse().map_err(IoError::Schema)?;
    let index: HashMap<&str, usize> = inst.names().iter().enumerate().map(|(c, n)| (n.as_str(), c)).collect();
    let mut perms = Vec::with_capacity(file.layers.len());
    for (i, layer) in file.layers.iter().enumerate() {
        let perm = layer
            .iter()
            .map(|id| {
                index
                    .get(id.as_str())
                    .copied()
                    .ok_or_else(|| IoError::Schema(format!("layer {} lists unknown character '{id}'", i + 1)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        perms.push(perm);
    }
    let d = Drawing::new(perms);
    let violations = validate(inst, &d);
    if !violations.is_empty() {
        return Err(IoError::Invalid(violations));
    }
    let recount = total_crossings(inst, &d)?.total;
    if recount != file.crossings {
        return Err(IoError::Schema(format!(
            "file records {} crossings but the drawing has {recount}",
            file.crossings
        )));
    }
    let report = SolutionReport {
        method: file.method,
        status,
        crossings: file.crossings,
        bound: file.bound,
        separation_rounds: file.separation_rounds,
        lop_added: file.lop_added,
        transitivity_fallback: file.transitivity_fallback,
        wall_time: file.wall_time,
    };
    Ok((d, report))
}

pub fn read_solution(path: impl AsRef<Path>, inst: &StorylineInstance) -> Result<(Drawing, SolutionReport), IoError> {
    read_solution_str(&read_text(path.as_ref())?, inst)
}
