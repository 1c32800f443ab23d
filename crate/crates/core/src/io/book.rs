//! Importer for GraphBase-style book files.
//!
//! Each chapter becomes a layer and each clique of a chapter an interaction.
//! Cliques of one chapter that share a character are merged, since a character
//! takes part in at most one interaction per layer. Chapters without cliques are
//! dropped and characters that never appear are omitted.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::instance::{InstanceError, Interaction, StorylineInstance};

#[derive(Debug, Error)]
pub enum BookError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("book has no chapter with interactions")]
    Empty,
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BookSummary {
    /// Chapter labels in layer order.
    pub chapters: Vec<String>,
    pub skipped_chapters: usize,
    /// Cliques absorbed into another clique of the same chapter.
    pub merged_cliques: usize,
    /// Codes listed in the character section but never used.
    pub unused_characters: Vec<String>,
    /// Codes used in chapters without a character entry.
    pub undeclared_characters: Vec<String>,
}

fn is_code(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric())
}

/// Joins `&`-continued lines, keeping the number of the first physical line.
fn logical_lines(text: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut pending: Option<(usize, String)> = None;
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        let (start, mut acc) = pending.take().unwrap_or((k + 1, String::new()));
        acc.push_str(if acc.is_empty() { line } else { line.trim_start() });
        if let Some(stripped) = acc.strip_suffix('&') {
            pending = Some((start, stripped.to_string()));
        } else {
            out.push((start, acc));
        }
    }
    if let Some(p) = pending {
        out.push(p);
    }
    out
}

pub fn convert_book(text: &str) -> Result<(StorylineInstance, BookSummary), BookError> {
    let mut declared: Vec<String> = Vec::new();
    let mut chapters: Vec<(String, Vec<Vec<String>>)> = Vec::new();
    let mut summary = BookSummary::default();

    for (line, content) in logical_lines(text) {
        let t = content.trim();
        if t.is_empty() || t.starts_with('*') {
            continue;
        }
        if let Some((label, body)) = t.split_once(':') {
            if !label.contains(' ') {
                let mut cliques = Vec::new();
                for group in body.split(';').map(str::trim).filter(|g| !g.is_empty()) {
                    let mut members: Vec<String> = Vec::new();
                    for code in group.split(',').map(str::trim).filter(|c| !c.is_empty()) {
                        if !is_code(code) {
                            return Err(BookError::Syntax {
                                line,
                                message: format!("'{code}' is not a character code"),
                            });
                        }
                        if !members.iter().any(|m| m == code) {
                            members.push(code.to_string());
                        }
                    }
                    if !members.is_empty() {
                        cliques.push(members);
                    }
                }
                chapters.push((label.to_string(), cliques));
                continue;
            }
        }
        let code = t.split_whitespace().next().unwrap_or_default();
        if !is_code(code) {
            return Err(BookError::Syntax {
                line,
                message: format!("expected a character entry or a chapter line, got '{t}'"),
            });
        }
        if !declared.iter().any(|d| d == code) {
            declared.push(code.to_string());
        }
    }

    // characters keep declaration order; undeclared ones follow in first-use order
    let mut order: Vec<String> = Vec::new();
    let mut used: HashMap<String, usize> = HashMap::new();
    for (_, cliques) in &chapters {
        for code in cliques.iter().flatten() {
            used.entry(code.clone()).or_insert(0);
        }
    }
    for code in &declared {
        if used.contains_key(code) {
            order.push(code.clone());
        } else {
            summary.unused_characters.push(code.clone());
        }
    }
    for (_, cliques) in &chapters {
        for code in cliques.iter().flatten() {
            if !order.contains(code) {
                summary.undeclared_characters.push(code.clone());
                order.push(code.clone());
            }
        }
    }
    for (c, code) in order.iter().enumerate() {
        used.insert(code.clone(), c);
    }

    let mut interactions = Vec::new();
    let mut layer = 0;
    for (label, cliques) in chapters {
        if cliques.is_empty() {
            summary.skipped_chapters += 1;
            continue;
        }
        // union-find over the cliques of this chapter
        let mut parent: Vec<usize> = (0..cliques.len()).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        let mut owner: HashMap<usize, usize> = HashMap::new();
        for (k, clique) in cliques.iter().enumerate() {
            for code in clique {
                let c = used[code];
                if let Some(&j) = owner.get(&c) {
                    let (a, b) = (find(&mut parent, j), find(&mut parent, k));
                    if a != b {
                        parent[b.max(a)] = a.min(b);
                        summary.merged_cliques += 1;
                    }
                } else {
                    owner.insert(c, k);
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (c, k) in owner {
            groups.entry(find(&mut parent, k)).or_default().push(c);
        }
        interactions.extend(groups.into_values().map(|g| Interaction::new(layer, g)));
        summary.chapters.push(label);
        layer += 1;
    }
    if layer == 0 {
        return Err(BookError::Empty);
    }
    let inst = StorylineInstance::with_derived_activity(order, layer, interactions)?;
    Ok((inst, summary))
}
