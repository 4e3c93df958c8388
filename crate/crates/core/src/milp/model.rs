use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::error::ModelError;

/// Index of a variable inside its [`Model`].
pub type VarId = usize;
/// Index of a constraint inside its [`Model`].
pub type ConId = usize;

pub const MAX_NAME_LEN: usize = 255;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub kind: VarKind,
}

/// A linear row. Terms are kept sorted by variable id with no repeats and
/// no zero coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    /// Left-hand side value at `x`.
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * x[j]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModelStats {
    pub variables: usize,
    pub constraints: usize,
    pub binaries: usize,
    pub nonzeros: usize,
}

/// Minimization MILP with binary and continuous variables.
#[derive(Debug, Clone, Default)]
pub struct Model {
    name: String,
    vars: Vec<Variable>,
    cons: Vec<Constraint>,
    objective: Vec<f64>,
    var_lookup: HashMap<String, VarId>,
    con_lookup: HashMap<String, ConId>,
}

impl PartialEq for Model {
    fn eq(&self, other: &Self) -> bool {
        // the lookup tables are derived from the ordered lists
        self.name == other.name
            && self.vars == other.vars
            && self.cons == other.cons
            && self.objective == other.objective
    }
}

pub(crate) fn check_name(name: &str) -> Result<(), ModelError> {
    let mut chars = name.chars();
    let ok = name.len() <= MAX_NAME_LEN
        && chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
    if ok {
        Ok(())
    } else {
        Err(ModelError::InvalidName(name.to_string()))
    }
}

impl Model {
    pub fn new(name: &str) -> Self {
        Model {
            name: name.to_string(),
            ..Default::default()
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn add_variable(
        &mut self,
        name: &str,
        lower: f64,
        upper: f64,
        kind: VarKind,
    ) -> Result<VarId, ModelError> {
        check_name(name)?;
        if self.var_lookup.contains_key(name) {
            return Err(ModelError::DuplicateVariable(name.to_string()));
        }
        if lower.is_nan() || upper.is_nan() || lower > upper || lower == f64::INFINITY || upper == f64::NEG_INFINITY {
            return Err(ModelError::InvertedBounds {
                name: name.to_string(),
                lower,
                upper,
            });
        }
        if kind == VarKind::Binary && (lower < 0.0 || upper > 1.0) {
            return Err(ModelError::BinaryBounds {
                name: name.to_string(),
                lower,
                upper,
            });
        }
        let id = self.vars.len();
        self.vars.push(Variable {
            name: name.to_string(),
            lower,
            upper,
            kind,
        });
        self.objective.push(0.0);
        self.var_lookup.insert(name.to_string(), id);
        Ok(id)
    }

    /// Appends a constraint. Repeated variables are summed and exact zeros
    /// dropped.
    pub fn add_constraint<I>(
        &mut self,
        name: &str,
        terms: I,
        sense: Sense,
        rhs: f64,
    ) -> Result<ConId, ModelError>
    where
        I: IntoIterator<Item = (VarId, f64)>,
    {
        check_name(name)?;
        if self.con_lookup.contains_key(name) {
            return Err(ModelError::DuplicateConstraint(name.to_string()));
        }
        if !rhs.is_finite() {
            return Err(ModelError::NonFinite {
                name: name.to_string(),
                value: rhs,
            });
        }
        let mut merged: BTreeMap<VarId, f64> = BTreeMap::new();
        for (j, a) in terms {
            if j >= self.vars.len() {
                return Err(ModelError::UnknownVariable(j));
            }
            if !a.is_finite() {
                return Err(ModelError::NonFinite {
                    name: self.vars[j].name.clone(),
                    value: a,
                });
            }
            *merged.entry(j).or_insert(0.0) += a;
        }
        let terms: Vec<(VarId, f64)> = merged.into_iter().filter(|&(_, a)| a != 0.0).collect();
        let id = self.cons.len();
        self.cons.push(Constraint {
            name: name.to_string(),
            terms,
            sense,
            rhs,
        });
        self.con_lookup.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn set_objective(&mut self, var: VarId, coef: f64) -> Result<(), ModelError> {
        let slot = self
            .objective
            .get_mut(var)
            .ok_or(ModelError::UnknownVariable(var))?;
        if !coef.is_finite() {
            return Err(ModelError::NonFinite {
                name: self.vars[var].name.clone(),
                value: coef,
            });
        }
        *slot = coef;
        Ok(())
    }

    pub fn add_objective(&mut self, var: VarId, coef: f64) -> Result<(), ModelError> {
        let current = *self
            .objective
            .get(var)
            .ok_or(ModelError::UnknownVariable(var))?;
        self.set_objective(var, current + coef)
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.vars[id]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.cons
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn num_variables(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.cons.len()
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.var_lookup.get(name).copied()
    }

    pub fn con_id(&self, name: &str) -> Option<ConId> {
        self.con_lookup.get(name).copied()
    }

    pub fn binaries(&self) -> impl Iterator<Item = VarId> + '_ {
        self.vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind == VarKind::Binary)
            .map(|(j, _)| j)
    }

    /// Objective value at `x`.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Copy of the model with each assigned variable fixed to its value.
    pub fn fix_variables(&self, assignments: &BTreeMap<VarId, f64>) -> Result<Model, ModelError> {
        let mut out = self.clone();
        for (&j, &value) in assignments {
            let var = out.vars.get_mut(j).ok_or(ModelError::UnknownVariable(j))?;
            if !(value >= var.lower && value <= var.upper) {
                return Err(ModelError::OutOfBounds {
                    name: var.name.clone(),
                    value,
                    lower: var.lower,
                    upper: var.upper,
                });
            }
            if var.kind == VarKind::Binary && value != 0.0 && value != 1.0 {
                return Err(ModelError::FractionalBinary {
                    name: var.name.clone(),
                    value,
                });
            }
            var.lower = value;
            var.upper = value;
        }
        Ok(out)
    }

    /// Overwrites the bounds of one variable without the binary checks;
    /// used by solvers on private copies.
    pub(crate) fn set_bounds_unchecked(&mut self, j: VarId, lower: f64, upper: f64) {
        self.vars[j].lower = lower;
        self.vars[j].upper = upper;
    }

    pub fn stats(&self) -> ModelStats {
        model_stats(self)
    }
}

/// Variable, constraint, binary and constraint-matrix nonzero counts.
pub fn model_stats(model: &Model) -> ModelStats {
    ModelStats {
        variables: model.vars.len(),
        constraints: model.cons.len(),
        binaries: model.binaries().count(),
        nonzeros: model.cons.iter().map(|c| c.terms.len()).sum(),
    }
}
