//! File-exchange bridge to external solver executables.
//!
//! The model is written as MPS, the command runs without a shell, and the
//! solution file it leaves behind is parsed in one of two dialects (see
//! `docs/solution-files.md`).

use std::collections::HashMap;
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;

use regex::Regex;

use super::{Mode, SolveConfig, Solution, Status};
use crate::error::SolverError;
use crate::milp::{write_mps, Model, VarKind};

/// Tokenized command line with `{input}` and `{output}` placeholders.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandTemplate {
    tokens: Vec<String>,
}

impl CommandTemplate {
    /// Splits on whitespace; double quotes group a token.
    pub fn parse(text: &str) -> Result<Self, SolverError> {
        let mut tokens = Vec::new();
        let mut cur = String::new();
        let mut quoted = false;
        let mut started = false;
        for ch in text.chars() {
            match ch {
                '"' => {
                    quoted = !quoted;
                    started = true;
                }
                c if c.is_whitespace() && !quoted => {
                    if started {
                        tokens.push(std::mem::take(&mut cur));
                        started = false;
                    }
                }
                c => {
                    cur.push(c);
                    started = true;
                }
            }
        }
        if quoted {
            return Err(SolverError::Template(format!("unbalanced quote in `{text}`")));
        }
        if started {
            tokens.push(cur);
        }
        let has = |p: &str| tokens.iter().any(|t| t.contains(p));
        if tokens.is_empty() || !has("{input}") || !has("{output}") {
            return Err(SolverError::Template(text.to_string()));
        }
        Ok(CommandTemplate { tokens })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    fn instantiate(&self, input: &Path, output: &Path) -> Vec<String> {
        let (i, o) = (input.display().to_string(), output.display().to_string());
        self.tokens
            .iter()
            .map(|t| t.replace("{input}", &i).replace("{output}", &o))
            .collect()
    }
}

/// Contents of a solution file before mapping onto a model.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParsedSolution {
    pub status: Option<String>,
    pub objective: Option<f64>,
    pub values: Vec<(String, f64)>,
}

fn parse_value(tok: &str, line: usize) -> Result<f64, String> {
    tok.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("line {line}: `{tok}` is not a number"))
}

fn parse_columns(text: &str) -> Result<ParsedSolution, String> {
    let mut out = ParsedSolution::default();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        match toks[0] {
            "status" if toks.len() >= 2 => out.status = Some(toks[1..].join(" ")),
            "objective" if toks.len() == 2 => out.objective = Some(parse_value(toks[1], line)?),
            _ if toks.len() == 2 => out.values.push((toks[0].to_string(), parse_value(toks[1], line)?)),
            _ => return Err(format!("line {line}: expected `name value`, got `{body}`")),
        }
    }
    Ok(out)
}

fn attr_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r#"([A-Za-z_][A-Za-z0-9_]*)\s*=\s*"([^"]*)""#).expect("valid regex"))
}

fn element_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"<\s*([A-Za-z_][A-Za-z0-9_]*)([^<>]*?)/?>").expect("valid regex"))
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset].matches('\n').count() + 1
}

fn parse_xml(text: &str) -> Result<ParsedSolution, String> {
    let mut out = ParsedSolution::default();
    let mut saw_element = false;
    for cap in element_regex().captures_iter(text) {
        saw_element = true;
        let whole = cap.get(0).expect("match");
        let tag = &cap[1];
        let attrs: HashMap<&str, &str> = attr_regex()
            .captures_iter(cap.get(2).map_or("", |m| m.as_str()))
            .map(|a| (a.get(1).unwrap().as_str(), a.get(2).unwrap().as_str()))
            .collect();
        let line = line_of(text, whole.start());
        if tag == "variable" {
            let name = attrs
                .get("name")
                .ok_or_else(|| format!("line {line}: <variable> without a name"))?;
            let value = attrs
                .get("value")
                .ok_or_else(|| format!("line {line}: <variable> without a value"))?;
            out.values.push((name.to_string(), parse_value(value, line)?));
        } else {
            if let Some(v) = attrs.get("objectiveValue") {
                out.objective = Some(parse_value(v, line)?);
            }
            if let Some(s) = attrs.get("solutionStatusString") {
                out.status = Some(s.to_string());
            }
        }
    }
    if !saw_element {
        return Err("no elements found in XML solution".to_string());
    }
    Ok(out)
}

/// Parses a solution file, choosing the XML dialect when the first
/// non-blank character is `<`.
pub fn parse_solution_file(text: &str) -> Result<ParsedSolution, String> {
    if text.trim_start().starts_with('<') {
        parse_xml(text)
    } else {
        parse_columns(text)
    }
}

fn map_status(text: Option<&str>) -> Status {
    let Some(s) = text else { return Status::Optimal };
    let s = s.to_ascii_lowercase();
    if s.contains("infeasible") {
        Status::Infeasible
    } else if s.contains("unbounded") {
        Status::Unbounded
    } else if s.contains("time") {
        Status::TimeLimit
    } else if s.contains("gap") || s.contains("tolerance") {
        Status::GapReached
    } else if s.contains("optimal") {
        Status::Optimal
    } else {
        Status::Error
    }
}

/// Maps parsed values onto the model's variables by name.
pub(crate) fn to_solution(model: &Model, parsed: ParsedSolution) -> Solution {
    let status = map_status(parsed.status.as_deref());
    if !status.has_solution() {
        return Solution::failed(status, format!("backend reported `{}`", parsed.status.unwrap_or_default()));
    }
    let mut values = vec![f64::NAN; model.num_variables()];
    for (name, v) in parsed.values {
        match model.var_id(&name) {
            Some(j) => values[j] = v,
            None => log::warn!("solution names unknown variable `{name}`, ignored"),
        }
    }
    let mut missing = 0;
    for v in values.iter_mut().filter(|v| v.is_nan()) {
        *v = 0.0;
        missing += 1;
    }
    if missing > 0 {
        log::warn!("{missing} variables missing from the solution file, set to 0");
    }
    let objective = parsed.objective.unwrap_or_else(|| model.evaluate(&values));
    Solution {
        status,
        objective,
        best_bound: objective,
        values,
        nodes: 0,
        iterations: 0,
        message: None,
    }
}

fn relaxed(model: &Model) -> Model {
    // LP mode hands the backend a model without integrality
    let mut m = Model::new(model.name());
    for v in model.variables() {
        m.add_variable(&v.name, v.lower, v.upper, VarKind::Continuous)
            .expect("names already validated");
    }
    for (j, &c) in model.objective().iter().enumerate() {
        m.set_objective(j, c).expect("finite");
    }
    for c in model.constraints() {
        m.add_constraint(&c.name, c.terms.iter().copied(), c.sense, c.rhs)
            .expect("rows already validated");
    }
    m
}

/// Writes the model, runs the configured command and reads its solution.
pub fn solve_external(model: &Model, config: &SolveConfig) -> Solution {
    let super::Backend::External(template) = config.backend() else {
        return Solution::failed(Status::Error, "no external command configured");
    };
    let dir = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return Solution::failed(Status::Error, format!("cannot create temp dir: {e}")),
    };
    let input = dir.path().join("model.mps");
    let output = dir.path().join("solution.sol");
    let text = match config.mode() {
        Mode::Mip => write_mps(model),
        Mode::LpRelaxation => write_mps(&relaxed(model)),
    };
    let text = match text {
        Ok(t) => t,
        Err(e) => return Solution::failed(Status::Error, e.to_string()),
    };
    if let Err(e) = std::fs::write(&input, text) {
        return Solution::failed(Status::Error, format!("cannot write {}: {e}", input.display()));
    }
    let argv = template.instantiate(&input, &output);
    log::debug!("running external backend: {argv:?}");
    let result = Command::new(&argv[0]).args(&argv[1..]).output();
    let out = match result {
        Ok(o) => o,
        Err(e) => return Solution::failed(Status::Error, format!("cannot run `{}`: {e}", argv[0])),
    };
    if !out.status.success() {
        let stderr = String::from_utf8_lossy(&out.stderr);
        return Solution::failed(
            Status::Error,
            format!("backend exited with {}: {}", out.status, stderr.trim()),
        );
    }
    let body = match std::fs::read_to_string(&output) {
        Ok(b) => b,
        Err(e) => return Solution::failed(Status::Error, format!("no solution file: {e}")),
    };
    match parse_solution_file(&body) {
        Ok(parsed) => to_solution(model, parsed),
        Err(e) => Solution::failed(Status::Error, format!("unparseable solution file: {e}")),
    }
}
