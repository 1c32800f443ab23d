//! Crossing minimization for storyline drawings.

pub mod consistency;
pub mod crossings;
pub mod drawing;
pub mod generate;
pub mod heuristics;
pub mod instance;
pub mod io;
pub mod models;
pub mod solver;

pub use consistency::{ConsistencyError, ConsistencyReport};
pub use crossings::{crossings_between, crossings_restricted, total_crossings, CrossingCount, CrossingError};
pub use drawing::{validate, Drawing, Violation};
pub use instance::{Activity, CharId, InstanceError, Interaction, Layer, StorylineInstance};
