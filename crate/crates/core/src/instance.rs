//! Storyline instances: characters, layers, interactions and activity intervals.

use std::collections::BTreeSet;

use thiserror::Error;

/// Dense character index, `0..n`.
pub type CharId = usize;

/// Zero-based layer (time step) index, `0..layers`.
pub type Layer = usize;

/// Inclusive range of layers during which a character is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Activity {
    pub start: Layer,
    pub end: Layer,
}

impl Activity {
    pub fn new(start: Layer, end: Layer) -> Self {
        Activity { start, end }
    }

    pub fn contains(&self, layer: Layer) -> bool {
        self.start <= layer && layer <= self.end
    }
}

/// A group of characters that must be drawn consecutively at one layer.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interaction {
    pub time: Layer,
    /// Sorted, duplicate-free.
    pub chars: Vec<CharId>,
}

impl Interaction {
    pub fn new(time: Layer, chars: impl IntoIterator<Item = CharId>) -> Self {
        let chars: BTreeSet<CharId> = chars.into_iter().collect();
        Interaction {
            time,
            chars: chars.into_iter().collect(),
        }
    }

    pub fn contains(&self, c: CharId) -> bool {
        self.chars.binary_search(&c).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("instance has no layers")]
    NoLayers,
    #[error("interaction {interaction} is at layer {time}, but the instance has {layers} layers")]
    InteractionLayerOutOfRange {
        interaction: usize,
        time: Layer,
        layers: usize,
    },
    #[error("interaction {interaction} has no characters")]
    EmptyInteraction { interaction: usize },
    #[error("interaction {interaction} references unknown character {character}")]
    UnknownCharacter { interaction: usize, character: CharId },
    #[error("character {character} of interaction {interaction} is not active at layer {time}")]
    InactiveMember {
        interaction: usize,
        character: CharId,
        time: Layer,
    },
    #[error("character {character} belongs to more than one interaction at layer {layer}")]
    OverlappingInteractions { layer: Layer, character: CharId },
    #[error("activity of character {character} is not a valid layer range ({start}..={end})")]
    InvalidActivity {
        character: CharId,
        start: Layer,
        end: Layer,
    },
    #[error("character {character} has no activity interval and takes part in no interaction")]
    MissingActivity { character: CharId },
    #[error("layer {layer} has no active character")]
    EmptyLayer { layer: Layer },
    #[error("expected {expected} activity entries, got {got}")]
    ActivityLength { expected: usize, got: usize },
    #[error("layer {layer} is out of range for an instance with {layers} layers")]
    LayerOutOfRange { layer: Layer, layers: usize },
    #[error("empty layer interval {start}..={end}")]
    EmptyInterval { start: Layer, end: Layer },
}

/// A storyline instance `(T, C, I, A)`.
///
/// Immutable after construction; all derived lookups (active sets, interactions per
/// layer, membership) are computed once in [`StorylineInstance::new`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StorylineInstance {
    names: Vec<String>,
    num_layers: usize,
    interactions: Vec<Interaction>,
    activity: Vec<Activity>,

    active: Vec<Vec<CharId>>,
    by_layer: Vec<Vec<usize>>,
    membership: Vec<Vec<Option<usize>>>,
}

impl StorylineInstance {
    /// Builds an instance and checks every structural invariant.
    ///
    /// `activity[c] == None` derives the interval from the first to the last layer
    /// in which `c` interacts.
    pub fn new(
        names: Vec<String>,
        num_layers: usize,
        interactions: Vec<Interaction>,
        activity: Vec<Option<Activity>>,
    ) -> Result<Self, InstanceError> {
        let n = names.len();
        if num_layers == 0 {
            return Err(InstanceError::NoLayers);
        }
        if activity.len() != n {
            return Err(InstanceError::ActivityLength {
                expected: n,
                got: activity.len(),
            });
        }
        for (idx, it) in interactions.iter().enumerate() {
            if it.time >= num_layers {
                return Err(InstanceError::InteractionLayerOutOfRange {
                    interaction: idx,
                    time: it.time,
                    layers: num_layers,
                });
            }
            if it.chars.is_empty() {
                return Err(InstanceError::EmptyInteraction { interaction: idx });
            }
            if let Some(&c) = it.chars.iter().find(|&&c| c >= n) {
                return Err(InstanceError::UnknownCharacter {
                    interaction: idx,
                    character: c,
                });
            }
        }

        let mut resolved = Vec::with_capacity(n);
        for (c, act) in activity.into_iter().enumerate() {
            let act = match act {
                Some(a) => a,
                None => derive_activity(c, &interactions)
                    .ok_or(InstanceError::MissingActivity { character: c })?,
            };
            if act.start > act.end || act.end >= num_layers {
                return Err(InstanceError::InvalidActivity {
                    character: c,
                    start: act.start,
                    end: act.end,
                });
            }
            resolved.push(act);
        }

        let mut active = vec![Vec::new(); num_layers];
        for (c, act) in resolved.iter().enumerate() {
            for layer in &mut active[act.start..=act.end] {
                layer.push(c);
            }
        }
        if let Some(layer) = active.iter().position(|a| a.is_empty()) {
            return Err(InstanceError::EmptyLayer { layer });
        }

        let mut by_layer = vec![Vec::new(); num_layers];
        let mut membership = vec![vec![None; n]; num_layers];
        for (idx, it) in interactions.iter().enumerate() {
            by_layer[it.time].push(idx);
            for &c in &it.chars {
                if !resolved[c].contains(it.time) {
                    return Err(InstanceError::InactiveMember {
                        interaction: idx,
                        character: c,
                        time: it.time,
                    });
                }
                let slot = &mut membership[it.time][c];
                if slot.is_some() {
                    return Err(InstanceError::OverlappingInteractions {
                        layer: it.time,
                        character: c,
                    });
                }
                *slot = Some(idx);
            }
        }

        Ok(StorylineInstance {
            names,
            num_layers,
            interactions,
            activity: resolved,
            active,
            by_layer,
            membership,
        })
    }

    /// Instance whose activity intervals are all derived from the interactions.
    pub fn with_derived_activity(
        names: Vec<String>,
        num_layers: usize,
        interactions: Vec<Interaction>,
    ) -> Result<Self, InstanceError> {
        let n = names.len();
        Self::new(names, num_layers, interactions, vec![None; n])
    }

    /// Instance with characters named `c0, c1, ...`.
    pub fn unnamed(
        n: usize,
        num_layers: usize,
        interactions: Vec<Interaction>,
        activity: Vec<Option<Activity>>,
    ) -> Result<Self, InstanceError> {
        let names = (0..n).map(|c| format!("c{c}")).collect();
        Self::new(names, num_layers, interactions, activity)
    }

    pub fn num_chars(&self) -> usize {
        self.names.len()
    }

    pub fn num_layers(&self) -> usize {
        self.num_layers
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, c: CharId) -> &str {
        &self.names[c]
    }

    pub fn interactions(&self) -> &[Interaction] {
        &self.interactions
    }

    pub fn interaction(&self, idx: usize) -> &Interaction {
        &self.interactions[idx]
    }

    pub fn activity(&self, c: CharId) -> Activity {
        self.activity[c]
    }

    pub fn activities(&self) -> &[Activity] {
        &self.activity
    }

    pub fn is_active(&self, c: CharId, layer: Layer) -> bool {
        self.activity[c].contains(layer)
    }

    /// `AC(t_i)`, sorted by id.
    pub fn active_chars(&self, layer: Layer) -> Result<&[CharId], InstanceError> {
        self.active
            .get(layer)
            .map(Vec::as_slice)
            .ok_or(InstanceError::LayerOutOfRange {
                layer,
                layers: self.num_layers,
            })
    }

    /// Panicking variant of [`Self::active_chars`] for internal loops over valid layers.
    pub fn active(&self, layer: Layer) -> &[CharId] {
        &self.active[layer]
    }

    /// `AC(t_i, t_j)`: characters active at every layer in `i..=j`.
    pub fn active_interval(&self, i: Layer, j: Layer) -> Result<Vec<CharId>, InstanceError> {
        if i > j {
            return Err(InstanceError::EmptyInterval { start: i, end: j });
        }
        if j >= self.num_layers {
            return Err(InstanceError::LayerOutOfRange {
                layer: j,
                layers: self.num_layers,
            });
        }
        Ok(self.active[i]
            .iter()
            .copied()
            .filter(|&c| self.activity[c].end >= j)
            .collect())
    }

    /// Characters active at both `layer` and `layer + 1`.
    pub fn shared(&self, layer: Layer) -> Vec<CharId> {
        self.active[layer]
            .iter()
            .copied()
            .filter(|&c| self.activity[c].end > layer)
            .collect()
    }

    /// Indices of the interactions at `layer` (`I(t)`).
    pub fn interactions_at(&self, layer: Layer) -> &[usize] {
        &self.by_layer[layer]
    }

    /// Interaction that `c` takes part in at `layer`, if any.
    pub fn interaction_of(&self, layer: Layer, c: CharId) -> Option<usize> {
        self.membership[layer][c]
    }

    /// `CI(t)`: characters taking part in some interaction at `layer`.
    pub fn interacting_chars(&self, layer: Layer) -> Vec<CharId> {
        let mut out: Vec<CharId> = self.by_layer[layer]
            .iter()
            .flat_map(|&idx| self.interactions[idx].chars.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }

    /// Copy of the instance without layers that hold no interaction.
    ///
    /// Returns the new instance and, for every kept layer, its index in `self`.
    /// Activity intervals are clipped to the kept layers.
    pub fn drop_empty_layers(&self) -> Result<(StorylineInstance, Vec<Layer>), InstanceError> {
        let kept: Vec<Layer> = (0..self.num_layers)
            .filter(|&l| !self.by_layer[l].is_empty())
            .collect();
        let mut remap = vec![None; self.num_layers];
        for (new, &old) in kept.iter().enumerate() {
            remap[old] = Some(new);
        }
        let interactions = self
            .interactions
            .iter()
            .map(|it| Interaction {
                time: remap[it.time].expect("interaction layers are kept"),
                chars: it.chars.clone(),
            })
            .collect();
        let activity = self
            .activity
            .iter()
            .map(|a| {
                let mapped: Vec<Layer> = (a.start..=a.end).filter_map(|l| remap[l]).collect();
                match (mapped.first(), mapped.last()) {
                    (Some(&s), Some(&e)) => Some(Activity::new(s, e)),
                    _ => None,
                }
            })
            .collect();
        let inst = StorylineInstance::new(self.names.clone(), kept.len(), interactions, activity)?;
        Ok((inst, kept))
    }

    /// Restriction to the layers `start..end`, keeping only characters active there.
    ///
    /// Returns the sub-instance and the original id of each of its characters.
    pub fn slice(&self, start: Layer, end: Layer) -> Result<(StorylineInstance, Vec<CharId>), InstanceError> {
        if start >= end || end > self.num_layers {
            return Err(InstanceError::EmptyInterval { start, end });
        }
        let chars: Vec<CharId> = (0..self.num_chars())
            .filter(|&c| self.activity[c].start < end && self.activity[c].end >= start)
            .collect();
        let mut local = vec![usize::MAX; self.num_chars()];
        for (new, &old) in chars.iter().enumerate() {
            local[old] = new;
        }
        let names = chars.iter().map(|&c| self.names[c].clone()).collect();
        let activity = chars
            .iter()
            .map(|&c| {
                let a = self.activity[c];
                Some(Activity::new(
                    a.start.max(start) - start,
                    a.end.min(end - 1) - start,
                ))
            })
            .collect();
        let interactions = self
            .interactions
            .iter()
            .filter(|it| it.time >= start && it.time < end)
            .map(|it| Interaction::new(it.time - start, it.chars.iter().map(|&c| local[c])))
            .collect();
        let inst = StorylineInstance::new(names, end - start, interactions, activity)?;
        Ok((inst, chars))
    }
}

fn derive_activity(c: CharId, interactions: &[Interaction]) -> Option<Activity> {
    let mut range: Option<Activity> = None;
    for it in interactions.iter().filter(|it| it.contains(c)) {
        range = Some(match range {
            None => Activity::new(it.time, it.time),
            Some(a) => Activity::new(a.start.min(it.time), a.end.max(it.time)),
        });
    }
    range
}
