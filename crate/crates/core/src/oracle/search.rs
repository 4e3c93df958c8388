use serde::Serialize;

use super::dispatch::{breakdown, optimal_dispatch_for};
use super::{check_guard, RunState, DEFAULT_SIZE_GUARD};
use crate::domain::{CostBreakdown, Instance, Schedule};
use crate::error::OracleError;
use crate::formulations::{build, Base, FormulationChoice, StartupKind};
use crate::solver::{solve, SolveConfig, Status};
use crate::startup::startup_cost;

/// Cheapest admissible schedule with its dispatch and exact costs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub schedule: Schedule,
    pub dispatch: Vec<Vec<f64>>,
    pub breakdown: CostBreakdown,
    /// Dispatch LPs solved during the search.
    pub schedules_examined: usize,
}

pub fn brute_force_optimum(instance: &Instance, base: Base) -> Result<OracleResult, OracleError> {
    brute_force_with_guard(instance, base, DEFAULT_SIZE_GUARD)
}

/// Period-by-period depth-first search over on/off masks. A branch is cut
/// only when a lower bound on its cost (per-period cheapest dispatch without
/// ramping, plus the start-ups already decided) strictly exceeds the best
/// exact cost found, so every schedule that could tie is still costed. Ties
/// go to the lexicographically smallest schedule.
pub fn brute_force_with_guard(instance: &Instance, base: Base, guard: usize) -> Result<OracleResult, OracleError> {
    check_guard(instance, guard)?;
    let n = instance.num_units();
    let horizon = instance.horizon;
    let masks = 1usize << n;

    // merit[t][mask]: cheapest production cost of period t with those units on
    let merit: Vec<Vec<f64>> = (0..horizon)
        .map(|t| (0..masks).map(|m| period_cost(instance, m, instance.load[t])).collect())
        .collect();
    let mut tail = vec![0.0; horizon + 1];
    for t in (0..horizon).rev() {
        let best = merit[t].iter().copied().fold(f64::INFINITY, f64::min);
        tail[t] = tail[t + 1] + best;
    }
    if !tail[0].is_finite() {
        return Err(OracleError::Infeasible);
    }
    // children of each period, cheapest first
    let order: Vec<Vec<usize>> = merit
        .iter()
        .map(|row| {
            let mut ms: Vec<usize> = (0..masks).filter(|&m| row[m].is_finite()).collect();
            ms.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
            ms
        })
        .collect();

    let mut search = Search {
        instance,
        base,
        merit,
        tail,
        order,
        path: Vec::with_capacity(horizon),
        best: None,
        examined: 0,
    };
    let states: Vec<RunState> = instance.units.iter().map(RunState::start).collect();
    search.descend(&states, 0.0)?;
    let examined = search.examined;
    let (schedule, dispatch, _) = search.best.ok_or(OracleError::Infeasible)?;
    let bd = breakdown(instance, &schedule, dispatch.cost);
    Ok(OracleResult {
        schedule,
        dispatch: dispatch.production,
        breakdown: bd,
        schedules_examined: examined,
    })
}

/// Merit-order cost of one period, infinite if the committed units cannot
/// meet the load.
fn period_cost(instance: &Instance, mask: usize, load: f64) -> f64 {
    let on: Vec<_> = instance
        .units
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, u)| u)
        .collect();
    let lo: f64 = on.iter().map(|u| u.p_min).sum();
    let hi: f64 = on.iter().map(|u| u.p_max).sum();
    let slack = 1e-9 * load.abs().max(1.0);
    if lo > load + slack || hi < load - slack {
        return f64::INFINITY;
    }
    let mut cost: f64 = on.iter().map(|u| u.cost_fixed_on + u.cost_variable * u.p_min).sum();
    let mut rest = (load - lo).max(0.0);
    let mut by_price = on.clone();
    by_price.sort_by(|a, b| a.cost_variable.total_cmp(&b.cost_variable));
    for u in by_price {
        let take = rest.min(u.p_max - u.p_min);
        cost += take * u.cost_variable;
        rest -= take;
    }
    cost
}

fn within(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs().max(1.0)
}

struct Search<'a> {
    instance: &'a Instance,
    base: Base,
    merit: Vec<Vec<f64>>,
    tail: Vec<f64>,
    order: Vec<Vec<usize>>,
    path: Vec<usize>,
    best: Option<(Schedule, super::Dispatch, f64)>,
    examined: usize,
}

impl Search<'_> {
    fn pruned(&self, bound: f64) -> bool {
        match &self.best {
            Some((_, _, inc)) => bound > inc + 1e-9 * inc.abs().max(1.0),
            None => false,
        }
    }

    /// `cost` holds the merit cost of the decided periods plus the exact
    /// start-up costs they incur.
    fn descend(&mut self, states: &[RunState], cost: f64) -> Result<(), OracleError> {
        let t = self.path.len();
        if t == self.instance.horizon {
            return self.leaf();
        }
        for k in 0..self.order[t].len() {
            let mask = self.order[t][k];
            let mut next = Vec::with_capacity(states.len());
            let mut add = self.merit[t][mask];
            let mut ok = true;
            for (i, (u, s)) in self.instance.units.iter().zip(states).enumerate() {
                match s.advance(u, mask >> i & 1 == 1, self.base) {
                    Some((state, start)) => {
                        if let Some(l) = start {
                            add += startup_cost(u, l as i64)?;
                        }
                        next.push(state);
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok || self.pruned(cost + add + self.tail[t + 1]) {
                continue;
            }
            self.path.push(mask);
            self.descend(&next, cost + add)?;
            self.path.pop();
        }
        Ok(())
    }

    fn leaf(&mut self) -> Result<(), OracleError> {
        let on_off: Vec<Vec<u8>> = (0..self.instance.num_units())
            .map(|i| self.path.iter().map(|m| (m >> i & 1) as u8).collect())
            .collect();
        let schedule = Schedule { on_off };
        self.examined += 1;
        let dispatch = match optimal_dispatch_for(self.instance, &schedule, self.base) {
            Ok(d) => d,
            Err(OracleError::InfeasibleSchedule) => return Ok(()),
            Err(e) => return Err(e),
        };
        let total = breakdown(self.instance, &schedule, dispatch.cost).total;
        let better = match &self.best {
            None => true,
            Some((s, _, inc)) => {
                if within(total, *inc) {
                    schedule.on_off < s.on_off
                } else {
                    total < *inc
                }
            }
        };
        if better {
            self.best = Some((schedule, dispatch, total));
        }
        Ok(())
    }
}

/// Outcome of one formulation in a certification run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormulationOutcome {
    pub formulation: StartupKind,
    pub status: Status,
    pub objective: f64,
    /// Relative deviation from the oracle, `|z - z_oracle| / max(|z_oracle|, 1)`.
    pub deviation: f64,
}

/// Cross-check of all four formulations at exact costs against the oracle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub base: Base,
    /// `None` when no schedule is feasible.
    pub oracle_objective: Option<f64>,
    pub oracle_schedule: Option<Schedule>,
    pub outcomes: Vec<FormulationOutcome>,
    /// Largest relative deviation among all formulations and the oracle,
    /// pairwise.
    pub max_deviation: f64,
    /// Some solve failed, so the comparison is incomplete.
    pub inconclusive: bool,
}

impl EquivalenceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn agrees(&self, tol: f64) -> bool {
        !self.inconclusive && self.max_deviation <= tol
    }
}

fn rel_dev(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Solves every formulation at exact costs with the reference solver at gap
/// 0 and compares against [`brute_force_optimum`].
pub fn certify_equivalence(instance: &Instance, base: Base) -> Result<EquivalenceReport, OracleError> {
    certify_with_guard(instance, base, DEFAULT_SIZE_GUARD)
}

pub fn certify_with_guard(instance: &Instance, base: Base, guard: usize) -> Result<EquivalenceReport, OracleError> {
    let oracle = match brute_force_with_guard(instance, base, guard) {
        Ok(r) => Some(r),
        Err(OracleError::Infeasible) => None,
        Err(e) => return Err(e),
    };
    let z_oracle = oracle.as_ref().map(|r| r.breakdown.total);
    let config = SolveConfig::exact();
    let mut outcomes = Vec::new();
    let mut inconclusive = false;
    for kind in StartupKind::ALL {
        let choice = FormulationChoice::new(base, kind, 0.0);
        let built = build(instance, &choice).map_err(|e| OracleError::Solver(e.to_string()))?;
        let sol = solve(&built.model, &config);
        let deviation = match (z_oracle, sol.status) {
            (Some(z), Status::Optimal) => rel_dev(sol.objective, z),
            (None, Status::Infeasible) => 0.0,
            _ => {
                inconclusive = true;
                f64::INFINITY
            }
        };
        outcomes.push(FormulationOutcome {
            formulation: kind,
            status: sol.status,
            objective: sol.objective,
            deviation,
        });
    }
    let mut max_deviation = outcomes.iter().map(|o| o.deviation).fold(0.0, f64::max);
    for a in &outcomes {
        for b in &outcomes {
            if a.status == Status::Optimal && b.status == Status::Optimal {
                max_deviation = max_deviation.max(rel_dev(a.objective, b.objective));
            }
        }
    }
    Ok(EquivalenceReport {
        base,
        oracle_objective: z_oracle,
        oracle_schedule: oracle.map(|r| r.schedule),
        outcomes,
        max_deviation,
        inconclusive,
    })
}
