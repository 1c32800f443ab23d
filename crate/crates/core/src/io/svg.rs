//! SVG output: one curve per character, gray bars for interactions.

use std::fmt::Write;

use thiserror::Error;

use crate::drawing::{validate, Drawing, Violation};
use crate::instance::StorylineInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveStyle {
    /// Horizontal runs at each layer joined by straight segments.
    Orthogonal,
    /// Horizontal runs joined by cubic Bézier segments.
    Smooth,
}

impl std::str::FromStr for CurveStyle {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "orthogonal" => Ok(CurveStyle::Orthogonal),
            "smooth" => Ok(CurveStyle::Smooth),
            _ => Err(format!("unknown style '{s}' (expected orthogonal or smooth)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderSpec {
    /// Horizontal distance between layers.
    pub column_width: f64,
    /// Vertical distance between consecutive positions.
    pub row_gap: f64,
    pub margin: f64,
    pub style: CurveStyle,
    pub bar_width: f64,
    pub bar_fill: String,
    pub stroke_width: f64,
    pub labels: bool,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec {
            column_width: 60.0,
            row_gap: 20.0,
            margin: 20.0,
            style: CurveStyle::Orthogonal,
            bar_width: 8.0,
            bar_fill: "#c0c0c0".to_string(),
            stroke_width: 2.0,
            labels: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenderError {
    #[error("{0} must be positive")]
    Geometry(&'static str),
    #[error("drawing is invalid: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidDrawing(Vec<Violation>),
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];
const LABEL_WIDTH: f64 = 90.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn render_svg(inst: &StorylineInstance, d: &Drawing, spec: &RenderSpec) -> Result<String, RenderError> {
    for (name, v) in [
        ("column width", spec.column_width),
        ("row gap", spec.row_gap),
        ("bar width", spec.bar_width),
        ("stroke width", spec.stroke_width),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(RenderError::Geometry(name));
        }
    }
    if !(spec.margin >= 0.0 && spec.margin.is_finite()) {
        return Err(RenderError::Geometry("margin"));
    }
    let violations = validate(inst, d);
    if !violations.is_empty() {
        return Err(RenderError::InvalidDrawing(violations));
    }

    let l = inst.num_layers();
    let left = spec.margin + if spec.labels { LABEL_WIDTH } else { 0.0 };
    let x = |i: usize| left + i as f64 * spec.column_width;
    let y = |p: usize| spec.margin + p as f64 * spec.row_gap;
    // half length of the horizontal run at each layer
    let run = spec.column_width * 0.2;
    let rows = d.perms().iter().map(Vec::len).max().unwrap_or(1).max(1);
    let width = x(l - 1) + run + spec.margin;
    let height = y(rows - 1) + spec.margin;

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.2}" height="{height:.2}" viewBox="0 0 {width:.2} {height:.2}">"#
    )
    .unwrap();

    writeln!(out, r#"<g class="interactions" fill="{}">"#, escape(&spec.bar_fill)).unwrap();
    for it in inst.interactions() {
        let pos: Vec<usize> = it.chars.iter().map(|&c| d.position(it.time, c).expect("validated")).collect();
        let (lo, hi) = (*pos.iter().min().unwrap(), *pos.iter().max().unwrap());
        let pad = spec.row_gap * 0.3;
        writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" rx="{:.2}"/>"#,
            x(it.time) - spec.bar_width / 2.0,
            y(lo) - pad,
            spec.bar_width,
            y(hi) - y(lo) + 2.0 * pad,
            spec.bar_width / 2.0
        )
        .unwrap();
    }
    writeln!(out, "</g>").unwrap();

    writeln!(
        out,
        r#"<g class="characters" fill="none" stroke-width="{:.2}" stroke-linejoin="round">"#,
        spec.stroke_width
    )
    .unwrap();
    for c in 0..inst.num_chars() {
        let act = inst.activity(c);
        let mut path = String::new();
        let mut prev: Option<(f64, f64)> = None;
        for i in act.start..=act.end {
            let yi = y(d.position(i, c).expect("validated"));
            let (a, b) = (x(i) - run, x(i) + run);
            match prev {
                None => write!(path, "M {a:.2} {yi:.2}").unwrap(),
                Some((px, py)) => match spec.style {
                    CurveStyle::Orthogonal => write!(path, " L {a:.2} {yi:.2}").unwrap(),
                    CurveStyle::Smooth => {
                        let mid = (px + a) / 2.0;
                        write!(path, " C {mid:.2} {py:.2} {mid:.2} {yi:.2} {a:.2} {yi:.2}").unwrap()
                    }
                },
            }
            write!(path, " H {b:.2}").unwrap();
            prev = Some((b, yi));
        }
        writeln!(
            out,
            r#"<path id="char-{c}" stroke="{}" d="{path}"><title>{}</title></path>"#,
            PALETTE[c % PALETTE.len()],
            escape(inst.name(c))
        )
        .unwrap();
    }
    writeln!(out, "</g>").unwrap();

    if spec.labels {
        writeln!(out, r#"<g class="labels" font-family="sans-serif" font-size="{:.2}" text-anchor="end">"#, spec.row_gap * 0.6).unwrap();
        for c in 0..inst.num_chars() {
            let act = inst.activity(c);
            let yi = y(d.position(act.start, c).expect("validated"));
            writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" dominant-baseline="middle">{}</text>"#,
                x(act.start) - run - 4.0,
                yi,
                escape(inst.name(c))
            )
            .unwrap();
        }
        writeln!(out, "</g>").unwrap();
    }
    writeln!(out, "</svg>").unwrap();
    Ok(out)
}
