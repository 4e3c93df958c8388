//! Instances, schedules and their validation.
//!
//! Every quantity is expressed in abstract units: power in MW, money in
//! "cost", time in periods. A unit's history before the horizon is encoded
//! only through [`Unit::pre_offline`]: a positive value means the unit has
//! been offline for that many periods; zero means it was online in the
//! fictitious period 0 and has satisfied its minimum uptime.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::DomainError;

/// Tolerance on the sum of nodal demand factors.
pub const DEMAND_FACTOR_TOL: f64 = 1e-9;

/// A thermal generating unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Unit {
    pub id: String,
    pub p_min: f64,
    pub p_max: f64,
    pub ramp_up: f64,
    pub ramp_down: f64,
    pub startup_ramp: f64,
    pub shutdown_ramp: f64,
    pub min_up: usize,
    pub min_down: usize,
    /// Fixed cost per online period.
    pub cost_fixed_on: f64,
    /// Cost per MW and period.
    pub cost_variable: f64,
    /// Maximum variable start-up cost (complete cold start).
    pub startup_var_cost: f64,
    pub startup_fixed_cost: f64,
    /// Heat-loss coefficient per period, in (0, 1).
    pub heat_loss: f64,
    /// Offline periods before the first period.
    pub pre_offline: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node: Option<String>,
}

impl Unit {
    /// True when the unit was online in the period before the horizon.
    pub fn online_before_horizon(&self) -> bool {
        self.pre_offline == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub id: String,
    /// Share of the system load located at this node.
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Line {
    pub id: String,
    pub capacity: f64,
    /// Power transfer distribution factors, keyed by node id. Missing nodes
    /// have a factor of zero.
    pub alpha: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Network {
    pub nodes: Vec<Node>,
    pub lines: Vec<Line>,
}

impl Network {
    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }
}

/// A unit commitment instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Instance {
    pub horizon: usize,
    pub load: Vec<f64>,
    pub units: Vec<Unit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub network: Option<Network>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    horizon: usize,
    #[serde(default)]
    load: Option<Vec<f64>>,
    #[serde(default)]
    load_csv: Option<String>,
    units: Vec<Unit>,
    #[serde(default)]
    network: Option<Network>,
}

impl Instance {
    pub fn num_units(&self) -> usize {
        self.units.len()
    }

    /// Parses an instance document. A `load_csv` reference is resolved
    /// relative to `base_dir`, or the working directory when absent.
    pub fn from_json_str(text: &str, base_dir: Option<&Path>) -> Result<Self, DomainError> {
        let doc: InstanceDoc = serde_json::from_str(text).map_err(DomainError::from_json)?;
        let load = match (doc.load, doc.load_csv) {
            (Some(load), None) => load,
            (None, Some(csv)) => {
                let path = match base_dir {
                    Some(dir) => dir.join(&csv),
                    None => Path::new(&csv).to_path_buf(),
                };
                read_load_csv(&path)?
            }
            _ => return Err(DomainError::LoadSource),
        };
        Ok(Instance {
            horizon: doc.horizon,
            load,
            units: doc.units,
            network: doc.network,
        })
    }

    pub fn from_path(path: &Path) -> Result<Self, DomainError> {
        let text = std::fs::read_to_string(path).map_err(|source| DomainError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Instance::from_json_str(&text, path.parent())
    }

    /// Pretty JSON with a fixed field order; identical instances give
    /// identical bytes.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization cannot fail")
    }

    /// The first `horizon` periods of this instance.
    pub fn truncated(&self, horizon: usize) -> Instance {
        let horizon = horizon.min(self.horizon);
        Instance {
            horizon,
            load: self.load[..horizon.min(self.load.len())].to_vec(),
            units: self.units.clone(),
            network: self.network.clone(),
        }
    }
}

/// Reads one load value per line. Blank lines and `#` comments are skipped.
pub fn read_load_csv(path: &Path) -> Result<Vec<f64>, DomainError> {
    let text = std::fs::read_to_string(path).map_err(|source| DomainError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let value = line.parse::<f64>().map_err(|e| DomainError::LoadCsv {
            path: path.to_path_buf(),
            line: idx + 1,
            message: format!("`{line}`: {e}"),
        })?;
        out.push(value);
    }
    Ok(out)
}

/// Commitment decisions `v(i,t)`, one row per unit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Schedule {
    pub on_off: Vec<Vec<u8>>,
}

impl Schedule {
    pub fn new(on_off: Vec<Vec<u8>>) -> Result<Self, DomainError> {
        for (i, row) in on_off.iter().enumerate() {
            for (t, &value) in row.iter().enumerate() {
                if value > 1 {
                    return Err(DomainError::NonBinary {
                        unit: i,
                        period: t,
                        value,
                    });
                }
            }
        }
        Ok(Schedule { on_off })
    }

    pub fn all(units: usize, horizon: usize, value: u8) -> Self {
        Schedule {
            on_off: vec![vec![value.min(1); horizon]; units],
        }
    }

    pub fn num_units(&self) -> usize {
        self.on_off.len()
    }

    pub fn horizon(&self) -> usize {
        self.on_off.first().map_or(0, Vec::len)
    }

    pub fn is_on(&self, unit: usize, period: usize) -> bool {
        self.on_off[unit][period] == 1
    }

    pub fn check_shape(&self, instance: &Instance) -> Result<(), DomainError> {
        let cols_ok = self.on_off.iter().all(|r| r.len() == instance.horizon);
        if self.on_off.len() != instance.num_units() || !cols_ok {
            return Err(DomainError::ScheduleShape {
                rows: self.on_off.len(),
                cols: self.on_off.iter().map(Vec::len).max().unwrap_or(0),
                units: instance.num_units(),
                horizon: instance.horizon,
            });
        }
        Ok(())
    }
}

/// Cost of a schedule split by origin.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub production: f64,
    pub startup_variable: f64,
    pub startup_fixed: f64,
    pub total: f64,
}

impl CostBreakdown {
    pub fn new(production: f64, startup_variable: f64, startup_fixed: f64) -> Self {
        CostBreakdown {
            production,
            startup_variable,
            startup_fixed,
            total: production + startup_variable + startup_fixed,
        }
    }

    pub fn startup(&self) -> f64 {
        self.startup_variable + self.startup_fixed
    }
}

/// One broken invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub entity: String,
    pub invariant: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.entity, self.invariant)
    }
}

/// Checks every instance invariant. Violations are data; an empty report
/// means the instance is well formed.
pub fn validate_instance(instance: &Instance) -> Vec<Violation> {
    let mut report = Vec::new();
    let mut push = |entity: String, invariant: &str| {
        report.push(Violation {
            entity,
            invariant: invariant.to_string(),
        })
    };

    if instance.load.len() != instance.horizon {
        push(
            "instance".into(),
            &format!(
                "load length {} must equal horizon {}",
                instance.load.len(),
                instance.horizon
            ),
        );
    }
    for (t, &l) in instance.load.iter().enumerate() {
        if !(l >= 0.0 && l.is_finite()) {
            push(format!("load[{}]", t + 1), "load must be finite and >= 0");
        }
    }

    let mut seen = HashSet::new();
    for u in &instance.units {
        let entity = format!("unit {}", u.id);
        if !seen.insert(u.id.as_str()) {
            push(entity.clone(), "unit ids must be unique");
        }
        if !(0.0 <= u.p_min && u.p_min <= u.p_max) {
            push(entity.clone(), "0 <= p_min <= p_max");
        }
        if !(u.heat_loss > 0.0 && u.heat_loss < 1.0) {
            push(entity.clone(), "heat_loss in (0, 1)");
        }
        if !(u.startup_ramp >= u.p_min) {
            push(entity.clone(), "startup_ramp >= p_min");
        }
        if !(u.shutdown_ramp >= u.p_min) {
            push(entity.clone(), "shutdown_ramp >= p_min");
        }
        if u.min_up < 1 {
            push(entity.clone(), "min_up >= 1");
        }
        if u.min_down < 1 {
            push(entity.clone(), "min_down >= 1");
        }
        if !(u.startup_var_cost >= 0.0) {
            push(entity.clone(), "startup_var_cost >= 0");
        }
        if !(u.startup_fixed_cost >= 0.0) {
            push(entity.clone(), "startup_fixed_cost >= 0");
        }
        if let Some(net) = &instance.network {
            match &u.node {
                Some(n) if net.node_index(n).is_some() => {}
                Some(n) => push(entity.clone(), &format!("node `{n}` is not declared")),
                None => push(entity.clone(), "unit must be placed at a network node"),
            }
        }
    }

    if let Some(net) = &instance.network {
        let gamma: f64 = net.nodes.iter().map(|n| n.gamma).sum();
        if (gamma - 1.0).abs() > DEMAND_FACTOR_TOL {
            push(
                "network".into(),
                &format!("demand factors must sum to 1, got {gamma}"),
            );
        }
        for line in &net.lines {
            let entity = format!("line {}", line.id);
            if !(line.capacity > 0.0) {
                push(entity.clone(), "capacity must be > 0");
            }
            for node in line.alpha.keys() {
                if net.node_index(node).is_none() {
                    push(
                        entity.clone(),
                        &format!("shift factor references undeclared node `{node}`"),
                    );
                }
            }
        }
    }
    report
}

/// A start-up of a unit: the period it comes online and how long it was
/// offline immediately before.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StartRun {
    /// 1-based period of the start-up.
    pub period: usize,
    pub offline: usize,
}

/// Start-ups of one unit together with their preceding offline durations.
///
/// Periods are 1-based in the result. A unit with `pre_offline > 0` that is
/// online in period 1 starts there after `pre_offline` periods.
pub fn offline_runs(
    schedule: &Schedule,
    unit: usize,
    pre_offline: usize,
) -> Result<Vec<StartRun>, DomainError> {
    let row = schedule
        .on_off
        .get(unit)
        .ok_or(DomainError::UnitIndex {
            index: unit,
            count: schedule.num_units(),
        })?;
    Ok(row_offline_runs(row, pre_offline))
}

pub(crate) fn row_offline_runs(row: &[u8], pre_offline: usize) -> Vec<StartRun> {
    let mut out = Vec::new();
    // Offline periods accumulated so far; `None` while online.
    let mut offline = if pre_offline > 0 {
        Some(pre_offline)
    } else {
        None
    };
    for (t, &v) in row.iter().enumerate() {
        if v == 1 {
            if let Some(l) = offline.take() {
                out.push(StartRun {
                    period: t + 1,
                    offline: l,
                });
            }
        } else {
            offline = Some(offline.map_or(1, |l| l + 1));
        }
    }
    out
}
