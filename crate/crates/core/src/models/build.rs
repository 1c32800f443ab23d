use std::collections::HashSet;

use super::{
    Expr, Family, Formulation, IlpModel, LinConstraint, LopScope, ModelError, Objective, QuadTerm, Sense, VarId,
};
use crate::consistency::{anchor_layer, qualifying_pairs};
use crate::instance::{CharId, Interaction, Layer, StorylineInstance};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ModelOptions {
    /// Add the symmetry-breaking equalities.
    pub sbc: bool,
    /// Layers whose order is fixed, as `(layer, permutation of its active characters)`.
    pub fixed: Vec<(Layer, Vec<CharId>)>,
}

/// Deterministic representative of an interaction: its smallest character id.
pub fn representative_char(it: &Interaction) -> CharId {
    it.chars[0]
}

fn pairs(chars: &[CharId]) -> impl Iterator<Item = (CharId, CharId)> + '_ {
    chars
        .iter()
        .enumerate()
        .flat_map(move |(i, &u)| chars[i + 1..].iter().map(move |&v| (u, v)))
}

fn skeleton(inst: &StorylineInstance, formulation: Formulation) -> IlpModel {
    let layers: Vec<Vec<CharId>> = (0..inst.num_layers()).map(|l| inst.active(l).to_vec()).collect();
    let mut m = IlpModel {
        formulation,
        sbc: false,
        vars: Vec::new(),
        index: Default::default(),
        objective: Objective::default(),
        constraints: Vec::new(),
        lop: vec![LopScope::All; layers.len()],
        layers,
    };
    for layer in 0..inst.num_layers() {
        for (u, v) in pairs(inst.active(layer)) {
            m.declare(VarId::ordering(layer, u, v));
        }
    }
    // TREE: members of an interaction compare identically against outsiders
    for it in inst.interactions() {
        let outside: Vec<CharId> = inst
            .active(it.time)
            .iter()
            .copied()
            .filter(|c| !it.contains(*c))
            .collect();
        for (u, v) in pairs(&it.chars) {
            for &w in &outside {
                let row = (Expr::ord(it.time, u, w) - Expr::ord(it.time, v, w)).constrain(Sense::Eq, 0, Family::Tree, false);
                m.constraints.push(row);
            }
        }
    }
    m
}

fn add_crossing_part(inst: &StorylineInstance, m: &mut IlpModel) {
    for gap in 0..inst.num_layers().saturating_sub(1) {
        for (u, v) in pairs(&inst.shared(gap)) {
            let y = VarId::crossing(gap, u, v);
            m.declare(y);
            m.objective.linear.push((1, y));
            let now = Expr::ord(gap, u, v);
            let next = Expr::ord(gap + 1, u, v);
            m.constraints.push(
                (Expr::var(y) - now.clone() + next.clone()).constrain(Sense::Ge, 0, Family::Cr, false),
            );
            m.constraints
                .push((Expr::var(y) + now - next).constrain(Sense::Ge, 0, Family::Cr, false));
        }
    }
}

fn add_fixed(m: &mut IlpModel, fixed: &[(Layer, Vec<CharId>)]) {
    for (layer, perm) in fixed {
        for (i, &a) in perm.iter().enumerate() {
            for &b in &perm[i + 1..] {
                m.constraints
                    .push(Expr::ord(*layer, a, b).constrain(Sense::Eq, 1, Family::Fix, false));
            }
        }
    }
}

fn finish(inst: &StorylineInstance, mut m: IlpModel, opts: &ModelOptions) -> IlpModel {
    add_fixed(&mut m, &opts.fixed);
    if opts.sbc {
        m = add_sbc(inst, m).expect("fresh model matches its instance");
    }
    m
}

/// Linearized model: crossing variables `y` linked by the CR rows, objective `Σ y`.
pub fn build_lin(inst: &StorylineInstance, opts: &ModelOptions) -> IlpModel {
    let mut m = skeleton(inst, Formulation::Lin);
    add_crossing_part(inst, &mut m);
    finish(inst, m, opts)
}

/// Quadratic model: `Σ x[i,u,v] x[i+1,v,u]` over ordered pairs, no crossing variables.
pub fn build_qdr(inst: &StorylineInstance, opts: &ModelOptions) -> IlpModel {
    let mut m = skeleton(inst, Formulation::Qdr);
    for gap in 0..inst.num_layers().saturating_sub(1) {
        for (u, v) in pairs(&inst.shared(gap)) {
            // x_i(1 - x_j) + (1 - x_i) x_j = x_i + x_j - 2 x_i x_j
            let a = VarId::ordering(gap, u, v);
            let b = VarId::ordering(gap + 1, u, v);
            m.objective.linear.push((1, a));
            m.objective.linear.push((1, b));
            m.objective.quadratic.push(QuadTerm { coef: -2, a, b });
        }
    }
    finish(inst, m, opts)
}

/// Propagated linear order model: the linearized model where layers with a
/// single interaction and no new outside characters replace most LOP triples by
/// propagation rows tied to the previous layer.
pub fn build_plo(inst: &StorylineInstance, opts: &ModelOptions) -> IlpModel {
    let mut m = skeleton(inst, Formulation::Plo);
    add_crossing_part(inst, &mut m);
    for layer in 1..inst.num_layers() {
        let [idx] = inst.interactions_at(layer) else {
            continue;
        };
        let it = inst.interaction(*idx);
        let prev = inst.active(layer - 1);
        let was_active = |c: &CharId| prev.binary_search(c).is_ok();
        if !inst
            .active(layer)
            .iter()
            .filter(|c| !was_active(c))
            .all(|c| it.contains(*c))
        {
            continue;
        }
        let rep = representative_char(it);
        let keep_inside = !it.chars.iter().all(was_active);
        let outside: Vec<CharId> = inst
            .active(layer)
            .iter()
            .copied()
            .filter(|c| !it.contains(*c))
            .collect();

        for (a, b) in pairs(&outside) {
            for (u, v) in [(a, b), (b, a)] {
                let lhs = Expr::ord(layer, u, v);
                let prev_uv = Expr::ord(layer - 1, u, v);
                // both above the representative
                let r1 = lhs.clone() - prev_uv.clone() - Expr::ord(layer, u, rep) - Expr::ord(layer, v, rep);
                m.constraints.push(r1.constrain(Sense::Ge, -2, Family::PropR1, false));
                // both below the representative
                let r2 = lhs - prev_uv - Expr::ord(layer, rep, u) - Expr::ord(layer, rep, v);
                m.constraints.push(r2.constrain(Sense::Ge, -2, Family::PropR2, false));
            }
        }
        if !keep_inside {
            for (u, v) in pairs(&it.chars) {
                let row = (Expr::ord(layer, u, v) - Expr::ord(layer - 1, u, v)).constrain(Sense::Eq, 0, Family::PropI, false);
                m.constraints.push(row);
            }
        }
        m.lop[layer] = LopScope::Reduced {
            rep,
            members: it.chars.clone(),
            keep_inside,
        };
    }
    finish(inst, m, opts)
}

pub fn build_model(inst: &StorylineInstance, formulation: Formulation, opts: &ModelOptions) -> IlpModel {
    match formulation {
        Formulation::Lin => build_lin(inst, opts),
        Formulation::Qdr => build_qdr(inst, opts),
        Formulation::Plo => build_plo(inst, opts),
    }
}

/// Adds the symmetry-breaking equalities: type-1 (an interaction's internal
/// order holds from its anchor layer on) and type-2 (a repeated character set
/// stays a block in between).
pub fn add_sbc(inst: &StorylineInstance, mut model: IlpModel) -> Result<IlpModel, ModelError> {
    let matches = model.layers.len() == inst.num_layers()
        && (0..inst.num_layers()).all(|l| model.layers[l] == inst.active(l));
    if !matches {
        return Err(ModelError::InstanceMismatch);
    }
    if model.sbc {
        return Err(ModelError::SbcPresent);
    }
    let mut seen: HashSet<LinConstraint> = HashSet::new();
    let mut push = |m: &mut IlpModel, row: LinConstraint| {
        if !row.terms.is_empty() && seen.insert(row.clone()) {
            m.constraints.push(row);
        }
    };

    for (idx, it) in inst.interactions().iter().enumerate() {
        let anchor = anchor_layer(inst, idx);
        for k in anchor..it.time {
            for (u, v) in pairs(&it.chars) {
                let row = (Expr::ord(k, u, v) - Expr::ord(it.time, u, v)).constrain(Sense::Eq, 0, Family::Sbc1, false);
                push(&mut model, row);
            }
        }
    }
    for (a, b) in qualifying_pairs(inst) {
        let (ia, ib) = (inst.interaction(a), inst.interaction(b));
        for k in ia.time + 1..ib.time {
            let outside: Vec<CharId> = inst
                .active(k)
                .iter()
                .copied()
                .filter(|c| !ia.contains(*c))
                .collect();
            for (u, v) in pairs(&ia.chars) {
                for &w in &outside {
                    let row = (Expr::ord(k, u, w) - Expr::ord(k, v, w)).constrain(Sense::Eq, 0, Family::Sbc2, false);
                    push(&mut model, row);
                }
            }
        }
    }
    model.sbc = true;
    Ok(model)
}
