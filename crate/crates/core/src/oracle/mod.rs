//! Ground truth for small instances: schedule enumeration, exact costing
//! and cross-formulation certification.
//!
//! Nothing here goes through the formulation builders. Dispatch LPs are
//! written directly from the production limits, the ramping rules and the
//! line limits with the commitment fixed, so agreement with the MILPs is a
//! real cross-check.

mod dispatch;
mod search;

use crate::domain::{Instance, Schedule, Unit};
use crate::error::OracleError;
use crate::formulations::Base;

pub use dispatch::{exact_total_cost, exact_total_cost_for, optimal_dispatch, optimal_dispatch_for, Dispatch};
pub use search::{brute_force_optimum, brute_force_with_guard, certify_equivalence, certify_with_guard, EquivalenceReport, FormulationOutcome, OracleResult};

/// Largest `units * horizon` the enumerating routines accept by default.
pub const DEFAULT_SIZE_GUARD: usize = 24;

fn check_guard(instance: &Instance, guard: usize) -> Result<usize, OracleError> {
    let cells = instance.num_units() * instance.horizon;
    if cells > guard || cells >= usize::BITS as usize {
        return Err(OracleError::SizeGuard { cells, limit: guard });
    }
    Ok(cells)
}

/// Commitment history of one unit while a schedule row is walked period by
/// period.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RunState {
    on: bool,
    /// Length of the current run inside the horizon.
    len: usize,
    /// The current run began before the horizon.
    initial: bool,
}

impl RunState {
    pub(crate) fn start(unit: &Unit) -> Self {
        RunState {
            on: unit.online_before_horizon(),
            len: 0,
            initial: true,
        }
    }

    /// Offline periods a start-up now would follow.
    fn offline(&self, unit: &Unit) -> usize {
        if self.initial {
            self.len + unit.pre_offline
        } else {
            self.len
        }
    }

    /// Advances by one period. Returns `None` if the extended base forbids
    /// the switch, else the new state and the off-time of a start-up in this
    /// period, if one happens.
    pub(crate) fn advance(self, unit: &Unit, on: bool, base: Base) -> Option<(RunState, Option<usize>)> {
        if on == self.on {
            let next = RunState {
                len: self.len + 1,
                ..self
            };
            return Some((next, None));
        }
        if base == Base::Extended {
            let done = if self.on {
                // an initial online run carries no uptime obligation
                self.initial || self.len >= unit.min_up
            } else {
                self.offline(unit) >= unit.min_down
            };
            if !done {
                return None;
            }
        }
        let startup = on.then(|| self.offline(unit));
        Some((
            RunState {
                on,
                len: 1,
                initial: false,
            },
            startup,
        ))
    }
}

/// Whether a schedule satisfies the commitment-only rules of `base`: none
/// for the basic base; minimum up and down times for the extended one, where
/// runs reaching the horizon end are never too short and an initial offline
/// run counts its periods before the horizon.
pub fn is_admissible(instance: &Instance, schedule: &Schedule, base: Base) -> bool {
    if schedule.check_shape(instance).is_err() {
        return false;
    }
    instance.units.iter().zip(&schedule.on_off).all(|(u, row)| {
        let mut state = RunState::start(u);
        row.iter().all(|&v| match state.advance(u, v == 1, base) {
            Some((next, _)) => {
                state = next;
                true
            }
            None => false,
        })
    })
}

/// Lazily yields every admissible schedule, in lexicographic order of the
/// unit-major flattened on/off matrix.
pub fn enumerate_schedules(
    instance: &Instance,
    base: Base,
) -> Result<impl Iterator<Item = Schedule> + '_, OracleError> {
    enumerate_with_guard(instance, base, DEFAULT_SIZE_GUARD)
}

pub fn enumerate_with_guard(
    instance: &Instance,
    base: Base,
    guard: usize,
) -> Result<impl Iterator<Item = Schedule> + '_, OracleError> {
    let cells = check_guard(instance, guard)?;
    let (n, horizon) = (instance.num_units(), instance.horizon);
    Ok((0u64..1u64 << cells).filter_map(move |code| {
        let on_off = (0..n)
            .map(|i| {
                (0..horizon)
                    .map(|t| ((code >> (cells - 1 - (i * horizon + t))) & 1) as u8)
                    .collect()
            })
            .collect();
        let s = Schedule { on_off };
        is_admissible(instance, &s, base).then_some(s)
    }))
}
