//! Free-format MPS reader and writer. See `docs/formats.md` for the grammar.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::model::{check_name, Model, Sense, VarKind};
use crate::error::{ModelError, MpsError};

const OBJ_ROW: &str = "COST";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders a model as free-format MPS. Output is a pure function of the
/// model, so identical models give identical bytes.
pub fn write_mps(model: &Model) -> Result<String, ModelError> {
    let name = if model.name().is_empty() { "ucform" } else { model.name() };
    check_name(name)?;
    let mut out = String::new();
    let _ = writeln!(out, "NAME {name}");
    out.push_str("ROWS\n");
    let _ = writeln!(out, " N {OBJ_ROW}");
    for c in model.constraints() {
        let tag = match c.sense {
            Sense::Le => 'L',
            Sense::Eq => 'E',
            Sense::Ge => 'G',
        };
        let _ = writeln!(out, " {tag} {}", c.name);
    }

    // transpose rows into columns; rows are visited in order so each column
    // lists its entries by row index
    let n = model.num_variables();
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, c) in model.constraints().iter().enumerate() {
        for &(j, a) in &c.terms {
            columns[j].push((i, a));
        }
    }

    if n > 0 {
        out.push_str("COLUMNS\n");
    }
    let mut in_marker = false;
    let mut marker_count = 0;
    for (j, var) in model.variables().iter().enumerate() {
        let binary = var.kind == VarKind::Binary;
        if binary && !in_marker {
            let _ = writeln!(out, " MARKER{marker_count:04} 'MARKER' 'INTORG'");
            in_marker = true;
        } else if !binary && in_marker {
            let _ = writeln!(out, " MARKER{marker_count:04} 'MARKER' 'INTEND'");
            marker_count += 1;
            in_marker = false;
        }
        // the objective entry is always written so every column appears
        let _ = writeln!(out, " {} {OBJ_ROW} {}", var.name, num(model.objective()[j]));
        for &(i, a) in &columns[j] {
            let _ = writeln!(out, " {} {} {}", var.name, model.constraints()[i].name, num(a));
        }
    }
    if in_marker {
        let _ = writeln!(out, " MARKER{marker_count:04} 'MARKER' 'INTEND'");
    }

    let rhs: Vec<_> = model.constraints().iter().filter(|c| c.rhs != 0.0).collect();
    if !rhs.is_empty() {
        out.push_str("RHS\n");
        for c in rhs {
            let _ = writeln!(out, " RHS {} {}", c.name, num(c.rhs));
        }
    }

    let mut bounds = String::new();
    for var in model.variables() {
        let (lo, up) = (var.lower, var.upper);
        let nm = &var.name;
        if var.kind == VarKind::Binary && lo == 0.0 && up == 1.0 {
            let _ = writeln!(bounds, " BV BND {nm}");
        } else if lo == up {
            let _ = writeln!(bounds, " FX BND {nm} {}", num(lo));
        } else if var.kind == VarKind::Binary {
            // binary columns default to [0, 1] on input
            if lo != 0.0 {
                let _ = writeln!(bounds, " LO BND {nm} {}", num(lo));
            }
            if up != 1.0 {
                let _ = writeln!(bounds, " UP BND {nm} {}", num(up));
            }
        } else if lo == f64::NEG_INFINITY && up == f64::INFINITY {
            let _ = writeln!(bounds, " FR BND {nm}");
        } else {
            if lo == f64::NEG_INFINITY {
                let _ = writeln!(bounds, " MI BND {nm}");
            } else if lo != 0.0 {
                let _ = writeln!(bounds, " LO BND {nm} {}", num(lo));
            }
            if up != f64::INFINITY {
                let _ = writeln!(bounds, " UP BND {nm} {}", num(up));
            }
        }
    }
    if !bounds.is_empty() {
        out.push_str("BOUNDS\n");
        out.push_str(&bounds);
    }
    out.push_str("ENDATA\n");
    Ok(out)
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Rows,
    Columns,
    Rhs,
    Bounds,
    End,
}

struct Column {
    name: String,
    binary: bool,
    obj: f64,
    lower: f64,
    upper: f64,
    bound_line: usize,
}

fn parse_num(tok: &str, line: usize) -> Result<f64, MpsError> {
    tok.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| MpsError::Parse {
            line,
            message: format!("invalid number `{tok}`"),
        })
}

fn perr(line: usize, message: impl Into<String>) -> MpsError {
    MpsError::Parse {
        line,
        message: message.into(),
    }
}

/// Parses free-format MPS text back into a [`Model`].
pub fn read_mps(text: &str) -> Result<Model, MpsError> {
    let mut name = String::new();
    let mut section = Section::None;
    let mut obj_row: Option<String> = None;
    // (name, sense, line)
    let mut rows: Vec<(String, Sense, usize)> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut row_terms: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut cols: Vec<Column> = Vec::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut in_int = false;
    let mut last_line = 0;

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        last_line = line;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let toks: Vec<&str> = raw.split_whitespace().collect();
        let header = !raw.starts_with(' ') && !raw.starts_with('\t');
        if header {
            section = match toks[0] {
                "NAME" => {
                    name = toks.get(1).copied().unwrap_or("").to_string();
                    Section::None
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => {
                    section = Section::End;
                    break;
                }
                other => {
                    return Err(MpsError::UnsupportedSection {
                        line,
                        section: other.to_string(),
                    })
                }
            };
            continue;
        }
        match section {
            Section::None | Section::End => {
                return Err(perr(line, "data line outside of any section"));
            }
            Section::Rows => {
                if toks.len() != 2 {
                    return Err(perr(line, "ROWS entry needs a type and a name"));
                }
                let sense = match toks[0] {
                    "N" => {
                        if obj_row.is_some() {
                            return Err(perr(line, "more than one objective row"));
                        }
                        obj_row = Some(toks[1].to_string());
                        continue;
                    }
                    "L" => Sense::Le,
                    "E" => Sense::Eq,
                    "G" => Sense::Ge,
                    t => return Err(perr(line, format!("unknown row type `{t}`"))),
                };
                if row_index.contains_key(toks[1]) || obj_row.as_deref() == Some(toks[1]) {
                    return Err(perr(line, format!("duplicate row `{}`", toks[1])));
                }
                row_index.insert(toks[1].to_string(), rows.len());
                rows.push((toks[1].to_string(), sense, line));
                row_terms.push(Vec::new());
                rhs.push(0.0);
            }
            Section::Columns => {
                if toks.len() == 3 && toks[1] == "'MARKER'" {
                    match toks[2] {
                        "'INTORG'" => in_int = true,
                        "'INTEND'" => in_int = false,
                        m => return Err(perr(line, format!("unknown marker {m}"))),
                    }
                    continue;
                }
                if toks.len() != 3 && toks.len() != 5 {
                    return Err(perr(line, "COLUMNS entry needs a column, row and value"));
                }
                let j = match col_index.get(toks[0]) {
                    Some(&j) => j,
                    None => {
                        let j = cols.len();
                        col_index.insert(toks[0].to_string(), j);
                        cols.push(Column {
                            name: toks[0].to_string(),
                            binary: in_int,
                            obj: 0.0,
                            lower: 0.0,
                            upper: if in_int { 1.0 } else { f64::INFINITY },
                            bound_line: line,
                        });
                        j
                    }
                };
                for pair in toks[1..].chunks(2) {
                    let value = parse_num(pair[1], line)?;
                    if obj_row.as_deref() == Some(pair[0]) {
                        cols[j].obj += value;
                    } else if let Some(&i) = row_index.get(pair[0]) {
                        row_terms[i].push((j, value));
                    } else {
                        return Err(perr(line, format!("unknown row `{}`", pair[0])));
                    }
                }
            }
            Section::Rhs => {
                if toks.len() != 3 && toks.len() != 5 {
                    return Err(perr(line, "RHS entry needs a set name, row and value"));
                }
                for pair in toks[1..].chunks(2) {
                    let value = parse_num(pair[1], line)?;
                    if obj_row.as_deref() == Some(pair[0]) {
                        return Err(perr(line, "objective constants are not supported"));
                    }
                    let i = *row_index
                        .get(pair[0])
                        .ok_or_else(|| perr(line, format!("unknown row `{}`", pair[0])))?;
                    rhs[i] = value;
                }
            }
            Section::Bounds => {
                if toks.len() < 3 {
                    return Err(perr(line, "BOUNDS entry needs a type, set name and column"));
                }
                let j = *col_index
                    .get(toks[2])
                    .ok_or_else(|| perr(line, format!("unknown column `{}`", toks[2])))?;
                let value = match toks[0] {
                    "FR" | "MI" | "PL" | "BV" => {
                        if toks.len() != 3 {
                            return Err(perr(line, format!("{} takes no value", toks[0])));
                        }
                        0.0
                    }
                    _ => {
                        if toks.len() != 4 {
                            return Err(perr(line, format!("{} needs a value", toks[0])));
                        }
                        parse_num(toks[3], line)?
                    }
                };
                let col = &mut cols[j];
                match toks[0] {
                    "UP" => col.upper = value,
                    "LO" => col.lower = value,
                    "FX" => {
                        col.lower = value;
                        col.upper = value;
                    }
                    "FR" => {
                        col.lower = f64::NEG_INFINITY;
                        col.upper = f64::INFINITY;
                    }
                    "MI" => col.lower = f64::NEG_INFINITY,
                    "PL" => col.upper = f64::INFINITY,
                    "BV" => {
                        col.binary = true;
                        col.lower = 0.0;
                        col.upper = 1.0;
                    }
                    t => return Err(perr(line, format!("unsupported bound type `{t}`"))),
                }
                col.bound_line = line;
            }
        }
    }
    if section != Section::End {
        return Err(perr(last_line + 1, "missing ENDATA"));
    }
    if obj_row.is_none() {
        return Err(perr(last_line, "no objective row declared"));
    }

    let mut model = Model::new(&name);
    for col in &cols {
        let kind = if col.binary { VarKind::Binary } else { VarKind::Continuous };
        let j = model
            .add_variable(&col.name, col.lower, col.upper, kind)
            .map_err(|source| MpsError::Model {
                line: col.bound_line,
                source,
            })?;
        model.set_objective(j, col.obj).map_err(|source| MpsError::Model {
            line: col.bound_line,
            source,
        })?;
    }
    for ((rname, sense, line), (terms, b)) in rows.into_iter().zip(row_terms.into_iter().zip(rhs)) {
        model
            .add_constraint(&rname, terms, sense, b)
            .map_err(|source| MpsError::Model { line, source })?;
    }
    Ok(model)
}
