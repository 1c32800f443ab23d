use std::collections::HashMap;

use log::warn;

use crate::drawing::Drawing;
use crate::instance::{CharId, StorylineInstance};
use crate::models::Formulation;
use crate::solver::{solve_exact, SolveOptions, SolveStatus};

use super::greedy_baseline;

/// Window length `ℓ̂` and stride `ŝ` of the slicing heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SliceConfig {
    pub window: usize,
    pub stride: usize,
}

impl Default for SliceConfig {
    fn default() -> Self {
        SliceConfig { window: 30, stride: 5 }
    }
}

impl SliceConfig {
    pub fn new(window: usize, stride: usize) -> Result<Self, String> {
        if stride == 0 || stride >= window {
            return Err(format!("need 1 <= stride < window, got stride {stride}, window {window}"));
        }
        Ok(SliceConfig { window, stride })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SliceOutcome {
    pub windows: usize,
    /// Every window was solved to optimality.
    pub all_optimal: bool,
    /// Set when the greedy baseline replaced the result.
    pub fallback: Option<String>,
}

/// Solves windows of `window` layers exactly with PLO. The first window is
/// free; every later one starts at the last committed layer, whose order is
/// pinned, and commits the next `stride` layers. The last window commits
/// everything it covers.
pub fn initial_slicing(inst: &StorylineInstance, cfg: &SliceConfig, opts: &SolveOptions) -> (Drawing, SliceOutcome) {
    let fallback = |why: String| {
        warn!("slicing falls back to the greedy baseline: {why}");
        (
            greedy_baseline(inst),
            SliceOutcome {
                windows: 0,
                all_optimal: false,
                fallback: Some(why),
            },
        )
    };
    if let Err(e) = SliceConfig::new(cfg.window, cfg.stride) {
        return fallback(e);
    }
    let l = inst.num_layers();
    let mut perms: Vec<Vec<CharId>> = Vec::new();
    let mut outcome = SliceOutcome {
        windows: 0,
        all_optimal: true,
        fallback: None,
    };
    while perms.len() < l {
        let start = perms.len().saturating_sub(1);
        let end = (start + cfg.window).min(l);
        let (sub, ids) = match inst.slice(start, end) {
            Ok(s) => s,
            Err(e) => return fallback(e.to_string()),
        };
        let local: HashMap<CharId, CharId> = ids.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let fixed = match perms.last() {
            Some(p) => vec![(0, p.iter().map(|c| local[c]).collect())],
            None => Vec::new(),
        };
        let window_opts = SolveOptions {
            init: false,
            fixed,
            ..opts.clone()
        };
        let (d, report) = match solve_exact(&sub, Formulation::Plo, &window_opts) {
            Ok(r) => r,
            Err(e) => return fallback(e.to_string()),
        };
        outcome.windows += 1;
        outcome.all_optimal &= report.status == SolveStatus::Optimal;
        let target = if end == l {
            l
        } else if perms.is_empty() {
            cfg.stride
        } else {
            start + cfg.stride + 1
        };
        let skip = perms.len() - start;
        for layer in skip..target - start {
            perms.push(d.layer(layer).iter().map(|&c| ids[c]).collect());
        }
    }
    (Drawing::new(perms), outcome)
}
