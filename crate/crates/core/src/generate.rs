//! Seeded random instances.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::{Activity, Interaction, StorylineInstance};

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub n: usize,
    pub layers: usize,
    /// Inclusive range of interactions per layer.
    pub interactions: (usize, usize),
    /// Inclusive range of characters per interaction.
    pub size: (usize, usize),
    /// Probability that a layer repeats the previous layer's interactions.
    pub repeat: f64,
}

impl GenParams {
    pub fn new(n: usize, layers: usize) -> Self {
        GenParams {
            n,
            layers,
            interactions: (1, 2),
            size: (1, 3),
            repeat: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("need at least one character and one layer")]
    Empty,
    #[error("interaction size range {0}..={1} is infeasible for {2} characters")]
    Size(usize, usize, usize),
    #[error("interaction count range {0}..={1} is empty")]
    Count(usize, usize),
    #[error("repeat probability {0} is outside [0, 1]")]
    Repeat(String),
}

pub fn generate_instance(params: &GenParams, seed: u64) -> Result<StorylineInstance, GenError> {
    let GenParams { n, layers, .. } = *params;
    let (smin, smax) = params.size;
    let (imin, imax) = params.interactions;
    if n == 0 || layers == 0 {
        return Err(GenError::Empty);
    }
    if smin == 0 || smin > smax || smin > n {
        return Err(GenError::Size(smin, smax, n));
    }
    if imin > imax {
        return Err(GenError::Count(imin, imax));
    }
    if !(0.0..=1.0).contains(&params.repeat) {
        return Err(GenError::Repeat(params.repeat.to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut interactions: Vec<Interaction> = Vec::new();
    let mut prev: Vec<Vec<usize>> = Vec::new();
    for t in 0..layers {
        let groups: Vec<Vec<usize>> = if !prev.is_empty() && rng.gen_bool(params.repeat) {
            prev.clone()
        } else {
            let mut pool: Vec<usize> = (0..n).collect();
            pool.shuffle(&mut rng);
            let count = rng.gen_range(imin..=imax);
            let mut groups = Vec::new();
            for _ in 0..count {
                if pool.len() < smin {
                    break;
                }
                let size = rng.gen_range(smin..=smax.min(pool.len()));
                groups.push(pool.split_off(pool.len() - size));
            }
            groups
        };
        interactions.extend(groups.iter().map(|g| Interaction::new(t, g.iter().copied())));
        prev = groups;
    }

    let interacts: Vec<bool> = (0..n)
        .map(|c| interactions.iter().any(|it| it.contains(c)))
        .collect();
    let mut activity: Vec<Option<Activity>> = (0..n)
        .map(|c| {
            (!interacts[c]).then(|| {
                let a = rng.gen_range(0..layers);
                let b = rng.gen_range(0..layers);
                Activity::new(a.min(b), a.max(b))
            })
        })
        .collect();
    // every layer needs an active character
    for t in 0..layers {
        let covered = (0..n).any(|c| match activity[c] {
            Some(a) => a.contains(t),
            None => interactions.iter().any(|it| it.contains(c) && it.time <= t)
                && interactions.iter().any(|it| it.contains(c) && it.time >= t),
        });
        if !covered {
            let c = rng.gen_range(0..n);
            if let Some(a) = activity[c] {
                activity[c] = Some(Activity::new(a.start.min(t), a.end.max(t)));
            } else {
                interactions.push(Interaction::new(t, [c]));
            }
        }
    }
    let inst = StorylineInstance::unnamed(n, layers, interactions, activity).expect("generated instance is valid");
    Ok(inst)
}
