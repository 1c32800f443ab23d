use std::fmt::Write;

use super::{IlpModel, LinConstraint, Sense};

fn term(out: &mut String, first: bool, coef: i64, name: &str) {
    let sign = if coef < 0 { "-" } else if first { "" } else { "+" };
    let mag = coef.unsigned_abs();
    let sep = if first && coef >= 0 { "" } else { " " };
    if mag == 1 {
        let _ = write!(out, "{sign}{sep}{name}");
    } else {
        let _ = write!(out, "{sign}{sep}{mag} {name}");
    }
}

fn row(out: &mut String, name: &str, c: &LinConstraint) {
    let _ = write!(out, " {name}: ");
    if c.terms.is_empty() {
        out.push('0');
    }
    for (k, &(coef, v)) in c.terms.iter().enumerate() {
        if k > 0 {
            out.push(' ');
        }
        term(out, k == 0, coef, &v.to_string());
    }
    let op = match c.sense {
        Sense::Le => "<=",
        Sense::Eq => "=",
        Sense::Ge => ">=",
    };
    let _ = writeln!(out, " {op} {}", c.rhs);
}

/// The model in CPLEX LP format, LOP rows materialized under a `lazy` comment.
/// Quadratic objective terms appear as `[ ... ] / 2` with doubled coefficients.
pub fn write_lp(model: &IlpModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ formulation {} sbc {}", model.formulation, model.sbc);
    out.push_str("Minimize\n obj: ");
    let mut first = true;
    for &(coef, v) in &model.objective.linear {
        if !first {
            out.push(' ');
        }
        term(&mut out, first, coef, &v.to_string());
        first = false;
    }
    if !model.objective.quadratic.is_empty() {
        out.push_str(if first { "[ " } else { " + [ " });
        for (k, q) in model.objective.quadratic.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            term(&mut out, k == 0, 2 * q.coef, &format!("{} * {}", q.a, q.b));
        }
        out.push_str(" ] / 2");
        first = false;
    }
    if model.objective.constant != 0 {
        let _ = write!(out, " + {}", model.objective.constant);
    } else if first {
        out.push('0');
    }
    out.push('\n');
    out.push_str("Subject To\n");
    let mut counts = std::collections::BTreeMap::new();
    for c in &model.constraints {
        let n = counts.entry(c.family).or_insert(0usize);
        *n += 1;
        let name = format!("{}_{}", c.family.name().replace('-', "_").to_lowercase(), n);
        row(&mut out, &name, c);
    }
    let lop = model.lop_row_count();
    if lop > 0 {
        out.push_str("\\ lazy LOP rows\n");
        for (k, c) in model.lop_rows().enumerate() {
            row(&mut out, &format!("lop_{}", k + 1), &c);
        }
    }
    out.push_str("Binaries\n");
    for v in model.vars() {
        let _ = writeln!(out, " {v}");
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Activity, Interaction, StorylineInstance};
    use crate::models::{build_lin, build_qdr, ModelOptions};

    fn inst() -> StorylineInstance {
        StorylineInstance::unnamed(
            3,
            2,
            vec![Interaction::new(0, [0, 1]), Interaction::new(1, [1, 2])],
            vec![Some(Activity::new(0, 1)), None, Some(Activity::new(0, 1))],
        )
        .unwrap()
    }

    #[test]
    fn lin_sections() {
        let s = write_lp(&build_lin(&inst(), &ModelOptions::default()));
        let heads: Vec<&str> = s.lines().filter(|l| !l.starts_with(' ') && !l.starts_with('\\')).collect();
        assert_eq!(heads, ["Minimize", "Subject To", "Binaries", "End"]);
        assert!(s.contains(" obj: y_0_0_1 + y_0_0_2 + y_0_1_2\n"));
        assert!(s.contains(" lop_1: x_0_0_1 - x_0_0_2 + x_0_1_2 <= 1\n"));
    }

    #[test]
    fn qdr_uses_bracket_form() {
        let s = write_lp(&build_qdr(&inst(), &ModelOptions::default()));
        assert!(s.contains("[ - 4 x_0_0_1 * x_1_0_1"), "{s}");
        assert!(s.contains("] / 2"));
        assert!(!s.contains("y_"));
    }
}
