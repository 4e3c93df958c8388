//! Exponential start-up costs and their step-function approximation.
//!
//! The cost of starting a unit after `l` offline periods is
//! `V * (1 - exp(-lambda * l)) + F`, where `exp(-lambda * l)` is the residual
//! temperature of the unit.

use serde::{Deserialize, Serialize};

use crate::domain::{row_offline_runs, Unit};
use crate::error::DomainError;

/// Exact start-up cost after `offline` periods.
pub fn startup_cost(unit: &Unit, offline: i64) -> Result<f64, DomainError> {
    if offline < 0 {
        return Err(DomainError::NegativeOfftime(offline));
    }
    Ok(cost_at(unit, offline as usize))
}

/// Residual temperature after `offline` periods, normalized so that the
/// operating temperature is 1.
pub fn temperature(unit: &Unit, offline: i64) -> Result<f64, DomainError> {
    if offline < 0 {
        return Err(DomainError::NegativeOfftime(offline));
    }
    Ok(temp_at(unit, offline as usize))
}

#[inline]
pub(crate) fn temp_at(unit: &Unit, offline: usize) -> f64 {
    (-unit.heat_loss * offline as f64).exp()
}

#[inline]
pub(crate) fn cost_at(unit: &Unit, offline: usize) -> f64 {
    unit.startup_var_cost * (1.0 - temp_at(unit, offline)) + unit.startup_fixed_cost
}

/// Variable part of the start-up cost (the reheating term).
#[inline]
pub(crate) fn variable_cost_at(unit: &Unit, offline: usize) -> f64 {
    unit.startup_var_cost * (1.0 - temp_at(unit, offline))
}

/// Discretized temperature `temp^(t)` of one unit over the horizon, computed
/// by the period-to-period recursion.
pub fn discretized_temperature(
    unit: &Unit,
    row: &[u8],
    pre_offline: usize,
) -> Result<Vec<f64>, DomainError> {
    if let Some((t, &value)) = row.iter().enumerate().find(|(_, &v)| v > 1) {
        return Err(DomainError::NonBinary {
            unit: 0,
            period: t,
            value,
        });
    }
    let decay = (-unit.heat_loss).exp();
    let mut out = Vec::with_capacity(row.len());
    for (t, &v) in row.iter().enumerate() {
        let value = if v == 1 || (t > 0 && row[t - 1] == 1) {
            1.0
        } else if t == 0 {
            temp_at(unit, pre_offline)
        } else {
            decay * out[t - 1]
        };
        out.push(value);
    }
    Ok(out)
}

/// Offline periods before each period of a row, 0 while online or right
/// after being online. Closed-form counterpart of the recursion above.
pub(crate) fn offline_before(row: &[u8], pre_offline: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(row.len());
    // Offline periods strictly before the current one.
    let mut run = pre_offline;
    for &v in row {
        if v == 1 {
            out.push(0);
            run = 0;
        } else {
            out.push(run);
            run += 1;
        }
    }
    out
}

/// One constant piece of an approximated start-up cost curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub lo: usize,
    pub hi: usize,
    pub value: f64,
}

/// Piecewise-constant, strictly increasing approximation of `K(l)` over the
/// off-times `1..=domain_end`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StepFunction {
    steps: Vec<Step>,
}

impl StepFunction {
    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Largest covered off-time, 0 when empty.
    pub fn domain_end(&self) -> usize {
        self.steps.last().map_or(0, |s| s.hi)
    }

    /// Approximate cost after `offline` periods. Off-time 0 means no
    /// start-up took place and costs nothing.
    pub fn value(&self, offline: usize) -> f64 {
        if offline == 0 {
            return 0.0;
        }
        self.step_of(offline).map_or(0.0, |s| self.steps[s].value)
    }

    /// Index of the step covering `offline`.
    pub fn step_of(&self, offline: usize) -> Option<usize> {
        if offline == 0 || offline > self.domain_end() {
            return None;
        }
        Some(self.steps.partition_point(|s| s.hi < offline))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("step serialization cannot fail")
    }
}

/// True when a single constant approximates every `K(l)` on `[lo, hi]` to
/// relative tolerance `ktol`, for nondecreasing `K`.
#[inline]
fn interval_fits(k_lo: f64, k_hi: f64, ktol: f64) -> bool {
    (1.0 - ktol) * k_hi <= (1.0 + ktol) * k_lo
}

/// Minimal step approximation of a unit's start-up costs over off-times
/// `1..=horizon-1`.
pub fn approximate_steps(unit: &Unit, horizon: usize, ktol: f64) -> StepFunction {
    approximate_steps_to(unit, horizon.saturating_sub(1), ktol)
}

/// Same as [`approximate_steps`] with an explicit last off-time.
pub fn approximate_steps_to(unit: &Unit, domain_end: usize, ktol: f64) -> StepFunction {
    let table: Vec<f64> = (0..=domain_end).map(|l| cost_at(unit, l)).collect();
    approximate_table(&table, ktol)
}

/// Greedy left-to-right cover of a nondecreasing table `k[1..]` (index 0 is
/// ignored). Each piece is extended while one constant still fits.
pub fn approximate_table(k: &[f64], ktol: f64) -> StepFunction {
    let end = k.len().saturating_sub(1);
    let mut steps: Vec<Step> = Vec::new();
    let mut lo = 1;
    while lo <= end {
        let mut hi = lo;
        while hi < end && interval_fits(k[lo], k[hi + 1], ktol) {
            hi += 1;
        }
        let prev = steps.last().map_or(0.0, |s| s.value);
        let value = ((1.0 - ktol) * k[hi]).max(prev).max(0.0);
        let value = value.min((1.0 + ktol) * k[lo]);
        match steps.last_mut() {
            Some(last) if last.value == value => last.hi = hi,
            _ => steps.push(Step { lo, hi, value }),
        }
        lo = hi + 1;
    }
    StepFunction { steps }
}

/// Exact minimum number of pieces for a unit's cost curve, by dynamic
/// programming over interval endpoints.
pub fn minimal_steps_oracle(unit: &Unit, horizon: usize, ktol: f64) -> usize {
    let end = horizon.saturating_sub(1);
    let table: Vec<f64> = (0..=end).map(|l| cost_at(unit, l)).collect();
    minimal_steps_table(&table, ktol)
}

/// DP over a tabulated cost curve `k[1..]`. Feasibility of a piece is
/// checked from the running extrema, so the curve need not be monotone.
pub fn minimal_steps_table(k: &[f64], ktol: f64) -> usize {
    let end = k.len().saturating_sub(1);
    // best[j]: fewest pieces covering 1..=j.
    let mut best = vec![usize::MAX; end + 1];
    best[0] = 0;
    for j in 1..=end {
        let mut lower = f64::NEG_INFINITY;
        let mut upper = f64::INFINITY;
        for i in (1..=j).rev() {
            lower = lower.max((1.0 - ktol) * k[i]);
            upper = upper.min((1.0 + ktol) * k[i]);
            if lower > upper {
                break;
            }
            if best[i - 1] != usize::MAX {
                best[j] = best[j].min(best[i - 1] + 1);
            }
        }
    }
    best[end]
}

/// Tabulated discretized temperature via the closed form, for cross-checks.
pub fn closed_form_temperature(unit: &Unit, row: &[u8], pre_offline: usize) -> Vec<f64> {
    offline_before(row, pre_offline)
        .into_iter()
        .map(|l| temp_at(unit, l))
        .collect()
}

/// Exact start-up cost total of one unit's schedule row.
pub(crate) fn row_startup_costs(unit: &Unit, row: &[u8]) -> (f64, f64) {
    row_offline_runs(row, unit.pre_offline)
        .iter()
        .fold((0.0, 0.0), |(var, fixed), r| {
            (
                var + variable_cost_at(unit, r.offline),
                fixed + unit.startup_fixed_cost,
            )
        })
}
