//! Integer programming models over pairwise ordering variables.
//!
//! Only variables `x[i,u,v]` / `y[i,u,v]` with `u < v` exist; any term over
//! `x[i,v,u]` is rewritten as `1 - x[i,u,v]` by [`Expr::ord`] at construction.

mod build;
mod lp;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::drawing::Drawing;
use crate::instance::{CharId, Layer};

pub use build::{add_sbc, build_lin, build_model, build_plo, build_qdr, representative_char, ModelOptions};
pub use lp::write_lp;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("model was built for a different instance")]
    InstanceMismatch,
    #[error("model already contains symmetry-breaking constraints")]
    SbcPresent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    Ordering,
    Crossing,
}

/// `x[layer,u,v]` (1 iff `u` is above `v`) or `y[layer,u,v]` (1 iff the pair
/// crosses between `layer` and `layer + 1`). Always `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId {
    pub kind: VarKind,
    pub layer: Layer,
    pub u: CharId,
    pub v: CharId,
}

impl VarId {
    pub fn ordering(layer: Layer, u: CharId, v: CharId) -> Self {
        debug_assert!(u < v);
        VarId {
            kind: VarKind::Ordering,
            layer,
            u,
            v,
        }
    }

    pub fn crossing(layer: Layer, u: CharId, v: CharId) -> Self {
        debug_assert!(u < v);
        VarId {
            kind: VarKind::Crossing,
            layer,
            u,
            v,
        }
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = match self.kind {
            VarKind::Ordering => 'x',
            VarKind::Crossing => 'y',
        };
        write!(f, "{p}_{}_{}_{}", self.layer, self.u, self.v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

/// Constraint family a row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Lop,
    Tree,
    Cr,
    PropR1,
    PropR2,
    PropI,
    Sbc1,
    Sbc2,
    /// Pins the ordering of a layer (used by the slicing heuristic).
    Fix,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Lop => "LOP",
            Family::Tree => "TREE",
            Family::Cr => "CR",
            Family::PropR1 => "PROP-R1",
            Family::PropR2 => "PROP-R2",
            Family::PropI => "PROP-I",
            Family::Sbc1 => "SBC-1",
            Family::Sbc2 => "SBC-2",
            Family::Fix => "FIX",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinConstraint {
    pub terms: Vec<(i64, VarId)>,
    pub sense: Sense,
    pub rhs: i64,
    pub family: Family,
    pub lazy: bool,
}

impl LinConstraint {
    pub fn activity(&self, value: impl Fn(VarId) -> f64) -> f64 {
        self.terms.iter().map(|&(c, v)| c as f64 * value(v)).sum()
    }

    /// Amount by which `value` violates the row (0 when satisfied).
    pub fn violation(&self, value: impl Fn(VarId) -> f64) -> f64 {
        let lhs = self.activity(value);
        let rhs = self.rhs as f64;
        match self.sense {
            Sense::Le => (lhs - rhs).max(0.0),
            Sense::Ge => (rhs - lhs).max(0.0),
            Sense::Eq => (lhs - rhs).abs(),
        }
    }
}

/// Affine expression with integer coefficients over projected variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Expr {
    pub constant: i64,
    pub terms: BTreeMap<VarId, i64>,
}

impl Expr {
    pub fn var(v: VarId) -> Self {
        let mut e = Expr::default();
        e.terms.insert(v, 1);
        e
    }

    pub fn constant(c: i64) -> Self {
        Expr {
            constant: c,
            terms: BTreeMap::new(),
        }
    }

    /// `x[layer,a,b]` for any distinct `a`, `b`, projected onto `u < v`.
    pub fn ord(layer: Layer, a: CharId, b: CharId) -> Self {
        if a < b {
            Expr::var(VarId::ordering(layer, a, b))
        } else {
            Expr::constant(1) - Expr::var(VarId::ordering(layer, b, a))
        }
    }

    pub fn scale(mut self, k: i64) -> Self {
        self.constant *= k;
        for c in self.terms.values_mut() {
            *c *= k;
        }
        self
    }

    /// `self (sense) rhs`, with the constant moved to the right-hand side.
    pub fn constrain(self, sense: Sense, rhs: i64, family: Family, lazy: bool) -> LinConstraint {
        LinConstraint {
            terms: self
                .terms
                .into_iter()
                .filter(|&(_, c)| c != 0)
                .map(|(v, c)| (c, v))
                .collect(),
            sense,
            rhs: rhs - self.constant,
            family,
            lazy,
        }
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(mut self, rhs: Expr) -> Expr {
        self.constant += rhs.constant;
        for (v, c) in rhs.terms {
            *self.terms.entry(v).or_insert(0) += c;
        }
        self.terms.retain(|_, c| *c != 0);
        self
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        self + rhs.scale(-1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Formulation {
    Lin,
    Qdr,
    Plo,
}

impl Formulation {
    pub fn name(self) -> &'static str {
        match self {
            Formulation::Lin => "lin",
            Formulation::Qdr => "qdr",
            Formulation::Plo => "plo",
        }
    }
}

impl std::str::FromStr for Formulation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "lin" => Ok(Formulation::Lin),
            "qdr" => Ok(Formulation::Qdr),
            "plo" => Ok(Formulation::Plo),
            other => Err(format!("unknown formulation '{other}' (expected lin, qdr or plo)")),
        }
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadTerm {
    pub coef: i64,
    pub a: VarId,
    pub b: VarId,
}

/// `constant + Σ linear + Σ quadratic`, minimized.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Objective {
    pub constant: i64,
    pub linear: Vec<(i64, VarId)>,
    pub quadratic: Vec<QuadTerm>,
}

impl Objective {
    pub fn evaluate(&self, value: impl Fn(VarId) -> f64) -> f64 {
        self.constant as f64
            + self.linear.iter().map(|&(c, v)| c as f64 * value(v)).sum::<f64>()
            + self
                .quadratic
                .iter()
                .map(|q| q.coef as f64 * value(q.a) * value(q.b))
                .sum::<f64>()
    }
}

/// Which LOP triples of a layer are part of the model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LopScope {
    /// Every triple of active characters.
    All,
    /// Layer reduced by propagation: triples with outside characters are kept
    /// only as `{u, v, rep}` with `u`, `v` outside the interaction.
    Reduced {
        rep: CharId,
        members: Vec<CharId>,
        keep_inside: bool,
    },
}

impl LopScope {
    pub fn allows(&self, triple: [CharId; 3]) -> bool {
        match self {
            LopScope::All => true,
            LopScope::Reduced {
                rep,
                members,
                keep_inside,
            } => {
                let inside: Vec<CharId> = triple.iter().copied().filter(|c| members.contains(c)).collect();
                match inside.len() {
                    3 => *keep_inside,
                    1 => inside[0] == *rep,
                    _ => false,
                }
            }
        }
    }
}

/// The two LOP rows of a triple `a < b < c` at `layer`.
pub fn lop_rows(layer: Layer, [a, b, c]: [CharId; 3]) -> [LinConstraint; 2] {
    let cyc = |p: CharId, q: CharId, r: CharId| Expr::ord(layer, p, q) + Expr::ord(layer, q, r) + Expr::ord(layer, r, p);
    [
        cyc(a, b, c).constrain(Sense::Le, 2, Family::Lop, true),
        cyc(b, a, c).constrain(Sense::Le, 2, Family::Lop, true),
    ]
}

/// A formulation-agnostic ILP: binary variables, a (possibly quadratic)
/// objective, explicit rows, and the lazily separated LOP family described per
/// layer instead of materialized.
#[derive(Debug, Clone)]
pub struct IlpModel {
    pub formulation: Formulation,
    pub sbc: bool,
    vars: Vec<VarId>,
    index: HashMap<VarId, usize>,
    pub objective: Objective,
    pub constraints: Vec<LinConstraint>,
    layers: Vec<Vec<CharId>>,
    lop: Vec<LopScope>,
}

/// Row counts per family.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ModelStats {
    pub ordering_vars: usize,
    pub crossing_vars: usize,
    pub quadratic_terms: usize,
    pub rows: BTreeMap<Family, usize>,
}

impl ModelStats {
    pub fn count(&self, f: Family) -> usize {
        self.rows.get(&f).copied().unwrap_or(0)
    }

    pub fn total_rows(&self) -> usize {
        self.rows.values().sum()
    }
}

/// Values aligned with [`IlpModel::vars`].
pub type Assignment = Vec<f64>;

impl IlpModel {
    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    pub fn var_index(&self, v: VarId) -> Option<usize> {
        self.index.get(&v).copied()
    }

    /// Active characters per layer, as seen by the model.
    pub fn layers(&self) -> &[Vec<CharId>] {
        &self.layers
    }

    pub fn lop_scope(&self, layer: Layer) -> &LopScope {
        &self.lop[layer]
    }

    /// LOP triples of `layer` that belong to the model, in lexicographic order.
    pub fn lop_triples(&self, layer: Layer) -> impl Iterator<Item = [CharId; 3]> + '_ {
        let act = &self.layers[layer];
        let scope = &self.lop[layer];
        let k = act.len();
        (0..k).flat_map(move |i| {
            (i + 1..k).flat_map(move |j| (j + 1..k).map(move |l| [act[i], act[j], act[l]]))
        })
        .filter(move |t| scope.allows(*t))
    }

    /// Every LOP row of the model, streamed.
    pub fn lop_rows(&self) -> impl Iterator<Item = LinConstraint> + '_ {
        (0..self.layers.len()).flat_map(move |layer| {
            self.lop_triples(layer).flat_map(move |t| lop_rows(layer, t))
        })
    }

    pub fn lop_row_count(&self) -> usize {
        (0..self.layers.len()).map(|l| 2 * self.lop_triples(l).count()).sum()
    }

    pub fn stats(&self) -> ModelStats {
        let mut s = ModelStats {
            ordering_vars: self.vars.iter().filter(|v| v.kind == VarKind::Ordering).count(),
            crossing_vars: self.vars.iter().filter(|v| v.kind == VarKind::Crossing).count(),
            quadratic_terms: self.objective.quadratic.len(),
            rows: BTreeMap::new(),
        };
        for c in &self.constraints {
            *s.rows.entry(c.family).or_insert(0) += 1;
        }
        let lop = self.lop_row_count();
        if lop > 0 {
            s.rows.insert(Family::Lop, lop);
        }
        s
    }

    pub fn value(&self, values: &[f64], v: VarId) -> f64 {
        self.var_index(v).map_or(0.0, |i| values[i])
    }

    /// Value of `x[layer,a,b]` for any ordered pair, via projection.
    pub fn ordering_value(&self, values: &[f64], layer: Layer, a: CharId, b: CharId) -> f64 {
        if a < b {
            self.value(values, VarId::ordering(layer, a, b))
        } else {
            1.0 - self.value(values, VarId::ordering(layer, b, a))
        }
    }

    /// The characteristic vector of a drawing: ordering variables from the
    /// relative orders, crossing variables from the inversions between layers.
    pub fn encode(&self, d: &Drawing) -> Assignment {
        let pos: Vec<HashMap<CharId, usize>> = d
            .perms()
            .iter()
            .map(|p| p.iter().enumerate().map(|(i, &c)| (c, i)).collect())
            .collect();
        let above = |layer: Layer, u: CharId, v: CharId| pos[layer][&u] < pos[layer][&v];
        self.vars
            .iter()
            .map(|v| {
                let on = match v.kind {
                    VarKind::Ordering => above(v.layer, v.u, v.v),
                    VarKind::Crossing => above(v.layer, v.u, v.v) != above(v.layer + 1, v.u, v.v),
                };
                if on {
                    1.0
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Rows (explicit and LOP) violated by more than `tol`.
    pub fn violated_rows(&self, values: &[f64], tol: f64) -> Vec<LinConstraint> {
        let val = |v: VarId| self.value(values, v);
        self.constraints
            .iter()
            .cloned()
            .chain(self.lop_rows())
            .filter(|c| c.violation(val) > tol)
            .collect()
    }

    fn declare(&mut self, v: VarId) {
        if !self.index.contains_key(&v) {
            self.index.insert(v, self.vars.len());
            self.vars.push(v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_rewrites_reversed_pairs() {
        let e = Expr::ord(0, 3, 1);
        assert_eq!(e.constant, 1);
        assert_eq!(e.terms.get(&VarId::ordering(0, 1, 3)), Some(&-1));
    }

    #[test]
    fn lop_rows_for_a_triple() {
        // x_ab + x_bc + x_ca <= 2  ->  x_ab + x_bc - x_ac <= 1
        // x_ba + x_ac + x_cb <= 2  -> -x_ab + x_ac - x_bc <= 0
        let [r1, r2] = lop_rows(0, [0, 1, 2]);
        let ab = VarId::ordering(0, 0, 1);
        let ac = VarId::ordering(0, 0, 2);
        let bc = VarId::ordering(0, 1, 2);
        assert_eq!(r1.terms, vec![(1, ab), (-1, ac), (1, bc)]);
        assert_eq!((r1.sense, r1.rhs), (Sense::Le, 1));
        assert_eq!(r2.terms, vec![(-1, ab), (1, ac), (-1, bc)]);
        assert_eq!((r2.sense, r2.rhs), (Sense::Le, 0));
        assert!(r1.lazy && r2.lazy);
    }

    #[test]
    fn lop_rows_cut_exactly_the_cyclic_points() {
        // over all 8 binary points, the two rows exclude exactly the 2 cyclic tournaments
        let rows = lop_rows(0, [0, 1, 2]);
        let mut feasible = 0;
        for bits in 0..8u32 {
            let val = |v: VarId| {
                let i = match (v.u, v.v) {
                    (0, 1) => 0,
                    (0, 2) => 1,
                    _ => 2,
                };
                f64::from((bits >> i) & 1)
            };
            if rows.iter().all(|r| r.violation(val) == 0.0) {
                feasible += 1;
            }
        }
        assert_eq!(feasible, 6);
    }

    #[test]
    fn reduced_scope_triples() {
        let scope = LopScope::Reduced {
            rep: 0,
            members: vec![0, 1],
            keep_inside: false,
        };
        assert!(scope.allows([0, 5, 6]));
        assert!(!scope.allows([1, 5, 6]));
        assert!(!scope.allows([0, 1, 5]));
        assert!(!scope.allows([4, 5, 6]));
    }
}
