//! Builders turning an [`Instance`] into a unit commitment MILP.
//!
//! A model is a base (basic or extended) plus exactly one start-up cost
//! formulation. Variable names follow a fixed contract, all indices 1-based:
//! `v_i_t`, `p_i_t`, `cu_i_t`, `y_i_t`, `z_i_t`, `tmp_i_t`, `h_i_t`
//! (`t = 0..T-1`) and `d_i_t_s`.

mod base;
mod one_bin;
mod temp;
mod three_bin;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::{validate_instance, Instance, Unit};
use crate::error::FormulationError;
use crate::milp::{ConId, Model, VarId, VarIndex, VarKind};
use crate::startup::{approximate_steps_to, StepFunction};

pub use base::build_base;
pub use one_bin::add_startup_1bin;
pub use temp::add_startup_temp;
pub use three_bin::add_startup_3bin;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Base {
    Basic,
    Extended,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartupKind {
    #[serde(alias = "1-Bin")]
    OneBin,
    #[serde(alias = "1-Bin*")]
    OneBinStar,
    #[serde(alias = "3-Bin")]
    ThreeBin,
    #[serde(alias = "Temp")]
    Temp,
}

impl StartupKind {
    pub const ALL: [StartupKind; 4] = [
        StartupKind::OneBin,
        StartupKind::OneBinStar,
        StartupKind::ThreeBin,
        StartupKind::Temp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StartupKind::OneBin => "one_bin",
            StartupKind::OneBinStar => "one_bin_star",
            StartupKind::ThreeBin => "three_bin",
            StartupKind::Temp => "temp",
        }
    }

    /// Whether the formulation works on a step approximation.
    pub fn uses_steps(self) -> bool {
        self != StartupKind::Temp
    }
}

impl Base {
    pub fn as_str(self) -> &'static str {
        match self {
            Base::Basic => "basic",
            Base::Extended => "extended",
        }
    }
}

impl fmt::Display for StartupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StartupKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "one_bin" | "1bin" | "1_bin" => Ok(StartupKind::OneBin),
            "one_bin_star" | "1bin*" | "1_bin*" | "one_bin*" => Ok(StartupKind::OneBinStar),
            "three_bin" | "3bin" | "3_bin" => Ok(StartupKind::ThreeBin),
            "temp" | "temperature" => Ok(StartupKind::Temp),
            other => Err(format!("unknown formulation `{other}`")),
        }
    }
}

impl FromStr for Base {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "basic" => Ok(Base::Basic),
            "extended" => Ok(Base::Extended),
            other => Err(format!("unknown base `{other}`")),
        }
    }
}

/// Which model to build. `ktol` is the relative tolerance of the step
/// approximation and is ignored by [`StartupKind::Temp`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormulationChoice {
    pub base: Base,
    pub startup: StartupKind,
    pub ktol: f64,
}

impl FormulationChoice {
    pub fn new(base: Base, startup: StartupKind, ktol: f64) -> Self {
        FormulationChoice { base, startup, ktol }
    }

    /// Exact costs on the basic base.
    pub fn exact(startup: StartupKind) -> Self {
        FormulationChoice::new(Base::Basic, startup, 0.0)
    }
}

/// A built model with its variable index and the step functions it used.
#[derive(Debug, Clone)]
pub struct Built {
    pub model: Model,
    pub index: VarIndex,
    /// Per-unit approximations; empty for the temperature model.
    pub steps: Vec<StepFunction>,
}

/// Largest off-time a start-up inside the horizon can follow.
pub fn step_domain_end(unit: &Unit, horizon: usize) -> usize {
    (horizon + unit.pre_offline).saturating_sub(1)
}

/// Step approximations of every unit over the off-times the model can see.
pub fn step_functions(instance: &Instance, ktol: f64) -> Vec<StepFunction> {
    instance
        .units
        .iter()
        .map(|u| approximate_steps_to(u, step_domain_end(u, instance.horizon), ktol))
        .collect()
}

/// Builds base plus start-up formulation.
pub fn build(instance: &Instance, choice: &FormulationChoice) -> Result<Built, FormulationError> {
    if !(choice.ktol >= 0.0 && choice.ktol.is_finite()) {
        return Err(FormulationError::InvalidTolerance(choice.ktol));
    }
    let (mut model, mut index) = build_base(instance, choice.base)?;
    let steps = if choice.startup.uses_steps() {
        step_functions(instance, choice.ktol)
    } else {
        Vec::new()
    };
    match choice.startup {
        StartupKind::OneBin => add_startup_1bin(&mut model, &mut index, instance, &steps, false)?,
        StartupKind::OneBinStar => add_startup_1bin(&mut model, &mut index, instance, &steps, true)?,
        StartupKind::ThreeBin => add_startup_3bin(&mut model, &mut index, instance, &steps)?,
        StartupKind::Temp => add_startup_temp(&mut model, &mut index, instance)?,
    };
    Ok(Built { model, index, steps })
}

fn check_instance(instance: &Instance) -> Result<(), FormulationError> {
    let report = validate_instance(instance);
    if report.is_empty() {
        Ok(())
    } else {
        Err(FormulationError::InvalidInstance(report))
    }
}

fn check_steps(instance: &Instance, steps: &[StepFunction]) -> Result<(), FormulationError> {
    for (i, u) in instance.units.iter().enumerate() {
        let f = steps.get(i).ok_or(FormulationError::MissingStepFunction(i))?;
        let needed = step_domain_end(u, instance.horizon);
        if f.domain_end() < needed {
            return Err(FormulationError::ShortStepFunction {
                unit: i,
                covered: f.domain_end(),
                needed,
            });
        }
    }
    Ok(())
}

/// Creates one variable per unit and period named `{prefix}_i_t`.
fn add_table(
    model: &mut Model,
    instance: &Instance,
    prefix: &str,
    upper: impl Fn(&Unit) -> f64,
    kind: VarKind,
) -> Result<Vec<Vec<VarId>>, FormulationError> {
    let mut table = Vec::with_capacity(instance.num_units());
    for (i, u) in instance.units.iter().enumerate() {
        let mut row = Vec::with_capacity(instance.horizon);
        for t in 1..=instance.horizon {
            row.push(model.add_variable(&format!("{prefix}_{}_{t}", i + 1), 0.0, upper(u), kind)?);
        }
        table.push(row);
    }
    Ok(table)
}

/// Adds `cu_i_t >= 0` with objective coefficient `obj`.
fn add_cu(
    model: &mut Model,
    index: &mut VarIndex,
    instance: &Instance,
    obj: f64,
) -> Result<(), FormulationError> {
    if index.cu.is_some() {
        return Err(FormulationError::StartupAlreadyAdded);
    }
    let cu = add_table(model, instance, "cu", |_| f64::INFINITY, VarKind::Continuous)?;
    if obj != 0.0 {
        for &id in cu.iter().flatten() {
            model.set_objective(id, obj)?;
        }
    }
    index.cu = Some(cu);
    Ok(())
}

/// Start-up and shutdown indicators tied to `v` by the logic equalities.
fn add_indicators(
    model: &mut Model,
    index: &mut VarIndex,
    instance: &Instance,
) -> Result<Vec<ConId>, FormulationError> {
    let y = add_table(model, instance, "y", |_| 1.0, VarKind::Binary)?;
    let z = add_table(model, instance, "z", |_| 1.0, VarKind::Binary)?;
    let mut rows = Vec::new();
    for (i, u) in instance.units.iter().enumerate() {
        let v = &index.v[i];
        for t in 0..instance.horizon {
            let name = format!("logic_{}_{}", i + 1, t + 1);
            let mut terms = vec![(y[i][t], 1.0), (z[i][t], -1.0), (v[t], -1.0)];
            let rhs = if t == 0 {
                if u.online_before_horizon() {
                    -1.0
                } else {
                    0.0
                }
            } else {
                terms.push((v[t - 1], 1.0));
                0.0
            };
            rows.push(model.add_constraint(&name, terms, crate::milp::Sense::Eq, rhs)?);
        }
    }
    index.y = Some(y);
    index.z = Some(z);
    Ok(rows)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::domain::tests::unit;

    pub(crate) fn single(load: Vec<f64>, u: Unit) -> Instance {
        Instance {
            horizon: load.len(),
            load,
            units: vec![u],
            network: None,
        }
    }

    #[test]
    fn names_parse() {
        for k in StartupKind::ALL {
            assert_eq!(k.as_str().parse::<StartupKind>(), Ok(k));
        }
        assert_eq!("1-Bin*".parse::<StartupKind>(), Ok(StartupKind::OneBinStar));
        assert!("4bin".parse::<StartupKind>().is_err());
        assert_eq!("extended".parse::<Base>(), Ok(Base::Extended));
    }

    #[test]
    fn domain_end_counts_pre_horizon() {
        let mut u = unit("a");
        assert_eq!(step_domain_end(&u, 72), 71);
        u.pre_offline = 3;
        assert_eq!(step_domain_end(&u, 72), 74);
    }

    #[test]
    fn negative_ktol_rejected() {
        let inst = single(vec![10.0, 20.0], unit("a"));
        let choice = FormulationChoice::new(Base::Basic, StartupKind::OneBin, -0.1);
        assert!(matches!(build(&inst, &choice), Err(FormulationError::InvalidTolerance(_))));
    }

    #[test]
    fn short_step_function_rejected() {
        let inst = single(vec![10.0, 20.0, 30.0], unit("a"));
        let (mut m, mut idx) = build_base(&inst, Base::Basic).unwrap();
        let short = vec![approximate_steps_to(&inst.units[0], 1, 0.0)];
        assert!(matches!(
            add_startup_1bin(&mut m, &mut idx, &inst, &short, false),
            Err(FormulationError::ShortStepFunction { needed: 2, .. })
        ));
        assert!(matches!(
            add_startup_3bin(&mut m, &mut idx, &inst, &[]),
            Err(FormulationError::MissingStepFunction(0))
        ));
    }

    #[test]
    fn one_startup_per_model() {
        let inst = single(vec![10.0, 20.0], unit("a"));
        let steps = step_functions(&inst, 0.0);
        let (mut m, mut idx) = build_base(&inst, Base::Basic).unwrap();
        add_startup_1bin(&mut m, &mut idx, &inst, &steps, true).unwrap();
        assert!(matches!(
            add_startup_temp(&mut m, &mut idx, &inst),
            Err(FormulationError::StartupAlreadyAdded)
        ));
    }
}
