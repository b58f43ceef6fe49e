//! Plain-text renderings of explanations.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::explain::{WhyExplanation, WhyNotExplanation, WhyNotOutcome};
use crate::geometry::{LinearConstraint, Orientation, Provenance, Side, VRepresentation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    /// One inequality per line in `a·x <= b` form.
    Hrep,
    /// Per-dimension ranges and vertex lists.
    Vrep,
    /// One sentence per constraint.
    Text,
}

impl std::str::FromStr for Style {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hrep" => Ok(Self::Hrep),
            "vrep" => Ok(Self::Vrep),
            "text" => Ok(Self::Text),
            other => Err(Error::Parse(format!("unknown style `{other}`"))),
        }
    }
}

pub enum Explanation<'a> {
    Why(&'a WhyExplanation),
    WhyNot(&'a WhyNotExplanation),
}

pub fn render(e: Explanation<'_>, style: Style) -> Result<String> {
    match e {
        Explanation::Why(w) => render_why(w, style),
        Explanation::WhyNot(w) => render_why_not(w, style),
    }
}

/// `%g`-style formatting with six significant digits.
pub fn sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        return format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn linear_form(a: &[f64]) -> String {
    let mut out = String::new();
    for (j, &c) in a.iter().enumerate() {
        let mag = sig6(c.abs());
        if mag == "0" {
            continue;
        }
        let neg = c < 0.0;
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        if mag != "1" {
            out.push_str(&mag);
            out.push('·');
        }
        let _ = write!(out, "x{}", j + 1);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// `a·x < b` or `a·x ≤ b`.
pub fn format_constraint(c: &LinearConstraint) -> String {
    format!("{} {} {}", linear_form(&c.a), if c.strict { "<" } else { "≤" }, sig6(c.b))
}

/// Strict rows flipped to read as `(-a)·x > -b`, the direction in which
/// active neurons and winning logits are usually stated.
pub fn format_natural(c: &LinearConstraint) -> String {
    if c.strict {
        let neg: Vec<f64> = c.a.iter().map(|v| -v).collect();
        format!("{} > {}", linear_form(&neg), sig6(-c.b + 0.0))
    } else {
        format!("{} ≤ {}", linear_form(&c.a), sig6(c.b))
    }
}

pub fn describe_provenance(p: &Provenance) -> String {
    match p {
        Provenance::Neuron { layer, index, orientation } => format!(
            "hidden layer {}, neuron {} {}",
            layer + 1,
            index + 1,
            match orientation {
                Orientation::Active => "active",
                Orientation::Inactive => "inactive",
            }
        ),
        Provenance::OutputPair { winner, loser } => format!("class {winner} scores above class {loser}"),
        Provenance::DomainBox { dim, side } => format!(
            "input box, x{} {} bound",
            dim + 1,
            match side {
                Side::Lower => "lower",
                Side::Upper => "upper",
            }
        ),
    }
}

fn point(x: &[f64]) -> String {
    format!("({})", x.iter().map(|v| sig6(*v)).collect::<Vec<_>>().join(", "))
}

fn class_label(index: usize, name: Option<&str>) -> String {
    match name {
        Some(n) => format!("class {index} ({n})"),
        None => format!("class {index}"),
    }
}

fn write_vrep(out: &mut String, title: &str, v: &VRepresentation) {
    let _ = writeln!(out, "{title}:");
    if v.is_empty() {
        let _ = writeln!(out, "  (empty)");
        return;
    }
    for (j, [lo, hi]) in v.ranges.iter().enumerate() {
        let _ = writeln!(out, "  x{} in [{}, {}]", j + 1, sig6(*lo), sig6(*hi));
    }
    let _ = writeln!(out, "  vertices ({}):", v.len());
    for vx in &v.vertices {
        let _ = writeln!(out, "    {}", point(vx));
    }
}

fn notes(out: &mut String, boundary: bool, inside: bool) {
    if boundary {
        let _ = writeln!(out, "note: boundary point (a hidden pre-activation is exactly 0)");
    }
    if !inside {
        let _ = writeln!(out, "note: input lies outside the model's input bounds");
    }
}

pub fn render_why(e: &WhyExplanation, style: Style) -> Result<String> {
    let mut out = String::new();
    let class = class_label(e.class_index, e.class_name.as_deref());
    match style {
        Style::Hrep => {
            let _ = writeln!(out, "{class} at x = {}, signature {}", point(&e.input), e.signature);
            for c in &e.minimal_constraints {
                let _ = writeln!(out, "{}    [{}]", format_constraint(c), describe_provenance(&c.provenance));
            }
            let _ = writeln!(out, "{} of {} constraints removed as redundant ({} LPs)", e.removed_count, e.constraint_count, e.lp_calls);
        }
        Style::Text => {
            let _ = writeln!(out, "The network chose {class} at x = {}:", point(&e.input));
            for c in &e.minimal_constraints {
                let _ = writeln!(out, "  because {} ({})", format_natural(c), describe_provenance(&c.provenance));
            }
        }
        Style::Vrep => {
            let v = e.vrep.as_ref().ok_or(Error::MissingVrep)?;
            let _ = writeln!(out, "{class} at x = {}, signature {}", point(&e.input), e.signature);
            write_vrep(&mut out, "region", &v.region);
            write_vrep(&mut out, &format!("inputs in the region classified as {class}"), &v.output);
        }
    }
    notes(&mut out, e.boundary, e.inside_bounds);
    Ok(out)
}

pub fn render_why_not(e: &WhyNotExplanation, style: Style) -> Result<String> {
    let mut out = String::new();
    let class = class_label(e.class_index, e.class_name.as_deref());
    let alt = class_label(e.counterfactual_class, e.counterfactual_name.as_deref());
    if style == Style::Vrep {
        let v = e.vrep.as_ref().ok_or(Error::MissingVrep)?;
        let _ = writeln!(out, "{class} at x = {}, not {alt}", point(&e.input));
        write_vrep(&mut out, "query region", &v.origin);
        match &v.target {
            Some(t) => write_vrep(&mut out, &format!("nearest region where {alt} wins"), t),
            None => {
                let _ = writeln!(out, "no region where {alt} wins was found");
            }
        }
        return Ok(out);
    }
    match &e.outcome {
        WhyNotOutcome::SameRegion { delta_constraint, .. } => {
            let ineq = match style {
                Style::Hrep => format_constraint(delta_constraint),
                _ => format_natural(delta_constraint),
            };
            let _ = writeln!(out, "The network chose {class} over {alt} at x = {} because {ineq}.", point(&e.input));
        }
        WhyNotOutcome::DifferentRegion { distance, differing_constraints, witness, target_signature, examined } => match style {
            Style::Hrep => {
                let _ = writeln!(
                    out,
                    "{class} at x = {}, not {alt}: nearest region {} at distance {distance} ({examined} regions examined)",
                    point(&e.input),
                    target_signature
                );
                for pair in differing_constraints {
                    let _ = writeln!(
                        out,
                        "- {}    [{}]",
                        format_constraint(&pair.origin_side),
                        describe_provenance(&pair.origin_side.provenance)
                    );
                    let _ = writeln!(
                        out,
                        "+ {}    [{}]",
                        format_constraint(&pair.target_side),
                        describe_provenance(&pair.target_side.provenance)
                    );
                }
                let _ = writeln!(out, "witness {}", point(witness));
            }
            _ => {
                let _ = writeln!(
                    out,
                    "The network chose {class} over {alt} at x = {}; {alt} first wins {distance} hyperplane crossing(s) away, e.g. at {}:",
                    point(&e.input),
                    point(witness)
                );
                for pair in differing_constraints {
                    let _ = writeln!(
                        out,
                        "  because {} ({}), where {alt} needs {}",
                        format_natural(&pair.origin_side),
                        describe_provenance(&pair.origin_side.provenance),
                        format_natural(&pair.target_side)
                    );
                }
            }
        },
        WhyNotOutcome::ClassUnreachable { examined } => {
            let _ = writeln!(
                out,
                "{alt} does not win anywhere in the searched regions ({examined} examined); {class} stands at x = {}.",
                point(&e.input)
            );
        }
    }
    Ok(out)
}
