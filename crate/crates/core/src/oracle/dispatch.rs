use serde::Serialize;

use crate::domain::{CostBreakdown, Instance, Schedule};
use crate::error::OracleError;
use crate::formulations::Base;
use crate::milp::{Model, Sense, VarKind};
use crate::solver::{solve_lp, SolveConfig, Status};
use crate::startup::row_startup_costs;

/// Cheapest production plan for a fixed commitment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dispatch {
    /// `production[i][t]`, 0-based.
    pub production: Vec<Vec<f64>>,
    /// Fixed plus variable production cost.
    pub cost: f64,
}

/// Dispatch under production limits and ramping, ignoring the network.
pub fn optimal_dispatch(instance: &Instance, schedule: &Schedule) -> Result<Dispatch, OracleError> {
    optimal_dispatch_for(instance, schedule, Base::Basic)
}

/// Dispatch as seen by `base`: the extended base adds line limits when the
/// instance has a network.
pub fn optimal_dispatch_for(
    instance: &Instance,
    schedule: &Schedule,
    base: Base,
) -> Result<Dispatch, OracleError> {
    schedule.check_shape(instance)?;
    let horizon = instance.horizon;
    let on = |i: usize, t: usize| f64::from(schedule.on_off[i][t]);
    let mut m = Model::new("dispatch");
    let mut p = Vec::with_capacity(instance.num_units());
    let mut fixed_cost = 0.0;
    for (i, u) in instance.units.iter().enumerate() {
        let mut row = Vec::with_capacity(horizon);
        for t in 0..horizon {
            let v = on(i, t);
            let id = m
                .add_variable(&format!("p_{}_{}", i + 1, t + 1), u.p_min * v, u.p_max * v, VarKind::Continuous)
                .map_err(|e| OracleError::Solver(e.to_string()))?;
            m.set_objective(id, u.cost_variable)
                .map_err(|e| OracleError::Solver(e.to_string()))?;
            fixed_cost += u.cost_fixed_on * v;
            row.push(id);
        }
        p.push(row);
    }

    let mut rows: Vec<(String, Vec<(usize, f64)>, Sense, f64)> = Vec::new();
    for t in 0..horizon {
        let terms = p.iter().map(|r| (r[t], 1.0)).collect();
        rows.push((format!("dem_{t}"), terms, Sense::Eq, instance.load[t]));
    }
    for (i, u) in instance.units.iter().enumerate() {
        for t in 1..horizon {
            let (now, before) = (on(i, t), on(i, t - 1));
            let up = u.ramp_up * before + u.startup_ramp * (now - before) + u.p_max * (1.0 - now);
            let down = u.ramp_down * now + u.shutdown_ramp * (before - now) + u.p_max * (1.0 - before);
            let diff = vec![(p[i][t], 1.0), (p[i][t - 1], -1.0)];
            rows.push((format!("up_{i}_{t}"), diff.clone(), Sense::Le, up));
            rows.push((format!("down_{i}_{t}"), diff, Sense::Ge, -down));
        }
        for t in 0..horizon.saturating_sub(1) {
            let (now, next) = (on(i, t), on(i, t + 1));
            let cap = u.p_max * next + u.shutdown_ramp * (now - next);
            rows.push((format!("off_{i}_{t}"), vec![(p[i][t], 1.0)], Sense::Le, cap));
        }
    }
    if let (Base::Extended, Some(net)) = (base, &instance.network) {
        for (k, line) in net.lines.iter().enumerate() {
            let shift = |node: &Option<String>| {
                node.as_ref()
                    .and_then(|n| line.alpha.get(n))
                    .copied()
                    .unwrap_or(0.0)
            };
            let injected: f64 = net
                .nodes
                .iter()
                .map(|n| line.alpha.get(&n.id).copied().unwrap_or(0.0) * n.gamma)
                .sum();
            for t in 0..horizon {
                let terms: Vec<_> = instance
                    .units
                    .iter()
                    .enumerate()
                    .map(|(i, u)| (p[i][t], shift(&u.node)))
                    .collect();
                let base_flow = injected * instance.load[t];
                rows.push((format!("fl_{k}_{t}"), terms.clone(), Sense::Le, line.capacity + base_flow));
                rows.push((format!("fh_{k}_{t}"), terms, Sense::Ge, base_flow - line.capacity));
            }
        }
    }
    for (name, terms, sense, rhs) in rows {
        m.add_constraint(&name, terms, sense, rhs)
            .map_err(|e| OracleError::Solver(e.to_string()))?;
    }

    let sol = solve_lp(&m, &SolveConfig::lp());
    match sol.status {
        Status::Optimal => Ok(Dispatch {
            production: p
                .iter()
                .map(|row| row.iter().map(|&id| sol.values[id]).collect())
                .collect(),
            cost: fixed_cost + sol.objective,
        }),
        Status::Infeasible => Err(OracleError::InfeasibleSchedule),
        other => Err(OracleError::Solver(format!(
            "{other}: {}",
            sol.message.unwrap_or_default()
        ))),
    }
}

/// Production cost plus exact exponential start-up costs, without network.
pub fn exact_total_cost(instance: &Instance, schedule: &Schedule) -> Result<CostBreakdown, OracleError> {
    exact_total_cost_for(instance, schedule, Base::Basic)
}

pub fn exact_total_cost_for(
    instance: &Instance,
    schedule: &Schedule,
    base: Base,
) -> Result<CostBreakdown, OracleError> {
    let dispatch = optimal_dispatch_for(instance, schedule, base)?;
    Ok(breakdown(instance, schedule, dispatch.cost))
}

pub(crate) fn breakdown(instance: &Instance, schedule: &Schedule, production: f64) -> CostBreakdown {
    let (var, fixed) = instance
        .units
        .iter()
        .zip(&schedule.on_off)
        .map(|(u, row)| row_startup_costs(u, row))
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    CostBreakdown::new(production, var, fixed)
}
