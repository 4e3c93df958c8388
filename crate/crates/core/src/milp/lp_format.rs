//! CPLEX-style LP text output, meant for reading models by eye.

use std::fmt::Write as _;

use super::model::{Model, Sense, VarKind};

const TERMS_PER_LINE: usize = 6;

fn push_terms(out: &mut String, model: &Model, terms: &[(usize, f64)]) {
    for (k, &(j, a)) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let name = &model.variable(j).name;
        if k == 0 {
            if a < 0.0 {
                let _ = write!(out, " - {} {name}", -a);
            } else {
                let _ = write!(out, " {a} {name}");
            }
        } else if a < 0.0 {
            let _ = write!(out, " - {} {name}", -a);
        } else {
            let _ = write!(out, " + {a} {name}");
        }
    }
}

/// Renders the model in the LP text dialect (`Minimize`, `Subject To`,
/// `Bounds`, `Binary`, `End`).
pub fn write_lp(model: &Model) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ {}", model.name());
    out.push_str("Minimize\n obj:");
    let obj: Vec<(usize, f64)> = model
        .objective()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0.0)
        .map(|(j, &c)| (j, c))
        .collect();
    if obj.is_empty() {
        if model.num_variables() > 0 {
            let _ = write!(out, " 0 {}", model.variable(0).name);
        }
    } else {
        push_terms(&mut out, model, &obj);
    }
    out.push_str("\nSubject To\n");
    for c in model.constraints() {
        let _ = write!(out, " {}:", c.name);
        if c.terms.is_empty() {
            // the dialect needs at least one term
            match model.variables().first() {
                Some(v) => {
                    let _ = write!(out, " 0 {}", v.name);
                }
                None => continue,
            }
        } else {
            push_terms(&mut out, model, &c.terms);
        }
        let op = match c.sense {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        };
        let _ = writeln!(out, " {op} {}", c.rhs);
    }
    out.push_str("Bounds\n");
    for v in model.variables() {
        let name = &v.name;
        match (v.lower, v.upper) {
            (l, u) if l == u => {
                let _ = writeln!(out, " {name} = {l}");
            }
            (l, u) if l == f64::NEG_INFINITY && u == f64::INFINITY => {
                let _ = writeln!(out, " {name} free");
            }
            (l, u) => {
                let lo = if l == f64::NEG_INFINITY { "-inf".to_string() } else { l.to_string() };
                let up = if u == f64::INFINITY { "+inf".to_string() } else { u.to_string() };
                let _ = writeln!(out, " {lo} <= {name} <= {up}");
            }
        }
    }
    let bins: Vec<&str> = model
        .variables()
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    if !bins.is_empty() {
        out.push_str("Binary\n");
        for chunk in bins.chunks(8) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_sections() {
        let mut m = Model::new("demo");
        let v = m.add_variable("v_1_1", 0.0, 1.0, VarKind::Binary).unwrap();
        let p = m.add_variable("p_1_1", 0.0, 500.0, VarKind::Continuous).unwrap();
        m.set_objective(p, 2.0).unwrap();
        m.set_objective(v, 5.0).unwrap();
        m.add_constraint("pmax_1_1", [(p, 1.0), (v, -500.0)], Sense::Le, 0.0).unwrap();
        let text = write_lp(&m);
        assert_eq!(
            text,
            "\\ demo\nMinimize\n obj: 5 v_1_1 + 2 p_1_1\nSubject To\n pmax_1_1: - 500 v_1_1 + 1 p_1_1 <= 0\nBounds\n 0 <= v_1_1 <= 1\n 0 <= p_1_1 <= 500\nBinary\n v_1_1\nEnd\n"
        );
    }
}
