use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::instance::{Activity, Interaction, StorylineInstance};

use super::{read_text, write_text, IoError, SCHEMA_VERSION};

/// On-disk instance. Layers are 1-based; characters are referenced by `id`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub version: u32,
    pub layers: usize,
    #[serde(default)]
    pub characters: Vec<CharacterEntry>,
    #[serde(default)]
    pub interactions: Vec<InteractionEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub activity: Vec<ActivityEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacterEntry {
    pub id: String,
    /// Free-form display name; not used by the algorithms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionEntry {
    pub time: usize,
    pub chars: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActivityEntry {
    #[serde(rename = "char")]
    pub character: String,
    pub start: usize,
    pub end: usize,
}

impl InstanceFile {
    pub fn from_instance(inst: &StorylineInstance) -> Self {
        let names = inst.names();
        InstanceFile {
            version: SCHEMA_VERSION,
            layers: inst.num_layers(),
            characters: names
                .iter()
                .map(|id| CharacterEntry {
                    id: id.clone(),
                    name: None,
                })
                .collect(),
            interactions: inst
                .interactions()
                .iter()
                .map(|it| InteractionEntry {
                    time: it.time + 1,
                    chars: it.chars.iter().map(|&c| names[c].clone()).collect(),
                })
                .collect(),
            activity: inst
                .activities()
                .iter()
                .enumerate()
                .map(|(c, a)| ActivityEntry {
                    character: names[c].clone(),
                    start: a.start + 1,
                    end: a.end + 1,
                })
                .collect(),
        }
    }

    pub fn to_instance(&self) -> Result<StorylineInstance, IoError> {
        if self.version != SCHEMA_VERSION {
            return Err(IoError::Schema(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                self.version
            )));
        }
        let mut index = HashMap::new();
        for (c, ch) in self.characters.iter().enumerate() {
            if index.insert(ch.id.as_str(), c).is_some() {
                return Err(IoError::Schema(format!("duplicate character id '{}'", ch.id)));
            }
        }
        let lookup = |id: &str, ctx: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| IoError::Schema(format!("{ctx} references unknown character '{id}'")))
        };
        let layer = |t: usize, ctx: &str| {
            if t == 0 || t > self.layers {
                Err(IoError::Schema(format!("{ctx}: layer {t} is outside 1..={}", self.layers)))
            } else {
                Ok(t - 1)
            }
        };
        let mut interactions = Vec::with_capacity(self.interactions.len());
        for (k, it) in self.interactions.iter().enumerate() {
            let ctx = format!("interaction {}", k + 1);
            let time = layer(it.time, &ctx)?;
            let mut chars = Vec::with_capacity(it.chars.len());
            for id in &it.chars {
                let c = lookup(id, &ctx)?;
                if chars.contains(&c) {
                    return Err(IoError::Schema(format!("{ctx} lists '{id}' twice")));
                }
                chars.push(c);
            }
            interactions.push(Interaction::new(time, chars));
        }
        let mut activity: Vec<Option<Activity>> = vec![None; self.characters.len()];
        for a in &self.activity {
            let ctx = format!("activity of '{}'", a.character);
            let c = lookup(&a.character, &ctx)?;
            if activity[c].is_some() {
                return Err(IoError::Schema(format!("{ctx} is given twice")));
            }
            let (start, end) = (layer(a.start, &ctx)?, layer(a.end, &ctx)?);
            if start > end {
                return Err(IoError::Schema(format!("{ctx}: start {} is after end {}", a.start, a.end)));
            }
            activity[c] = Some(Activity::new(start, end));
        }
        let names = self.characters.iter().map(|c| c.id.clone()).collect();
        Ok(StorylineInstance::new(names, self.layers, interactions, activity)?)
    }
}

pub fn parse_instance_str(text: &str) -> Result<StorylineInstance, IoError> {
    let file: InstanceFile = toml::from_str(text).map_err(|e| IoError::from_toml(text, e))?;
    file.to_instance()
}

pub fn parse_instance(path: impl AsRef<Path>) -> Result<StorylineInstance, IoError> {
    parse_instance_str(&read_text(path.as_ref())?)
}

/// Writes every activity interval explicitly, so parsing gives back the same instance.
pub fn instance_to_string(inst: &StorylineInstance) -> String {
    toml::to_string(&InstanceFile::from_instance(inst)).expect("instance file serializes")
}

pub fn write_instance(path: impl AsRef<Path>, inst: &StorylineInstance) -> Result<(), IoError> {
    write_text(path.as_ref(), &instance_to_string(inst))
}
