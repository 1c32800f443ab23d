//! Heuristic drawings: greedy baseline, slicing, rounding and local improvements.

mod greedy;
mod local;
mod rounding;
mod slicing;

use thiserror::Error;

use crate::drawing::Violation;

pub use greedy::greedy_baseline;
pub use local::{barycenter_sl, improve, push_crossings, remove_double_crossings};
pub use rounding::{round_fractional, EPS};
pub use slicing::{initial_slicing, SliceConfig, SliceOutcome};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HeuristicError {
    #[error("drawing is invalid: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidDrawing(Vec<Violation>),
}
