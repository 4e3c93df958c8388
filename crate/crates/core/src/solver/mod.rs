//! Bundled LP/MIP solver and the bridge to external solver executables.

mod bnb;
mod external;
pub(crate) mod simplex;

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::SolverError;
use crate::milp::{Model, VarId};

pub use bnb::{gap_reached, relative_gap, solve_mip};
pub use external::{parse_solution_file, solve_external, CommandTemplate, ParsedSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    GapReached,
    TimeLimit,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
            Status::GapReached => "gap_reached",
            Status::TimeLimit => "time_limit",
            Status::Error => "error",
        }
    }

    /// True when the objective is a usable primal value.
    pub fn has_solution(self) -> bool {
        matches!(self, Status::Optimal | Status::GapReached | Status::TimeLimit)
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    LpRelaxation,
    Mip,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Backend {
    Reference,
    External(CommandTemplate),
}

impl Backend {
    pub fn id(&self) -> &'static str {
        match self {
            Backend::Reference => "reference",
            Backend::External(_) => "external",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    mode: Mode,
    gap: f64,
    time_limit: f64,
    backend: Backend,
}

pub const DEFAULT_GAP: f64 = 1e-6;
pub const BENCHMARK_GAP: f64 = 0.01;
pub const DEFAULT_TIME_LIMIT: f64 = 60.0;

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            mode: Mode::Mip,
            gap: DEFAULT_GAP,
            time_limit: DEFAULT_TIME_LIMIT,
            backend: Backend::Reference,
        }
    }
}

impl SolveConfig {
    pub fn new(mode: Mode, gap: f64, time_limit: f64, backend: Backend) -> Result<Self, SolverError> {
        if !(gap >= 0.0) {
            return Err(SolverError::NegativeGap(gap));
        }
        if !(time_limit > 0.0) {
            return Err(SolverError::TimeLimit(time_limit));
        }
        Ok(SolveConfig {
            mode,
            gap,
            time_limit,
            backend,
        })
    }

    pub fn lp() -> Self {
        SolveConfig {
            mode: Mode::LpRelaxation,
            ..Default::default()
        }
    }

    /// MIP solved to proven optimality.
    pub fn exact() -> Self {
        SolveConfig {
            gap: 0.0,
            ..Default::default()
        }
    }

    pub fn benchmark() -> Self {
        SolveConfig {
            gap: BENCHMARK_GAP,
            ..Default::default()
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_gap(self, gap: f64) -> Result<Self, SolverError> {
        SolveConfig::new(self.mode, gap, self.time_limit, self.backend)
    }

    pub fn with_time_limit(self, seconds: f64) -> Result<Self, SolverError> {
        SolveConfig::new(self.mode, self.gap, seconds, self.backend)
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn time_limit(&self) -> f64 {
        self.time_limit
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub(crate) fn deadline(&self) -> Option<Instant> {
        Instant::now().checked_add(Duration::from_secs_f64(self.time_limit.min(1e9)))
    }
}

/// Result of one solve. `objective` is NaN when no primal point is known and
/// `values` is then empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution {
    pub status: Status,
    pub objective: f64,
    pub best_bound: f64,
    pub values: Vec<f64>,
    pub nodes: usize,
    pub iterations: usize,
    pub message: Option<String>,
}

impl Solution {
    pub(crate) fn failed(status: Status, message: impl Into<String>) -> Self {
        Solution {
            status,
            objective: f64::NAN,
            best_bound: f64::NAN,
            values: Vec::new(),
            nodes: 0,
            iterations: 0,
            message: Some(message.into()),
        }
    }

    pub fn value(&self, id: VarId) -> Option<f64> {
        self.values.get(id).copied()
    }

    pub fn value_of(&self, model: &Model, name: &str) -> Option<f64> {
        self.value(model.var_id(name)?)
    }

    /// Largest bound violation of the reported values.
    pub fn max_bound_violation(&self, model: &Model) -> f64 {
        model
            .variables()
            .iter()
            .zip(&self.values)
            .map(|(v, &x)| (v.lower - x).max(x - v.upper).max(0.0))
            .fold(0.0, f64::max)
    }
}

/// Solves the LP relaxation with the bundled simplex.
pub fn solve_lp(model: &Model, config: &SolveConfig) -> Solution {
    let deadline = config.deadline();
    let mut lp = simplex::Lp::new(model);
    let end = lp.solve(deadline);
    lp_solution(&mut lp, end, deadline)
}

pub(crate) fn lp_solution(lp: &mut simplex::Lp, end: simplex::LpEnd, deadline: Option<Instant>) -> Solution {
    use simplex::LpEnd;
    let mut end = end;
    if end == LpEnd::Optimal && lp.max_residual() > 1e-7 {
        // accumulated drift: rebuild the tableau and polish
        if lp.refresh() {
            end = lp.dual(deadline);
        }
        if end == LpEnd::Optimal && lp.max_residual() > 1e-7 {
            return Solution::failed(
                Status::Error,
                format!("numerical failure: row residual {:.3e} after refactorization", lp.max_residual()),
            );
        }
    }
    let iterations = lp.iterations;
    let mut sol = match end {
        LpEnd::Optimal => {
            let objective = lp.objective();
            Solution {
                status: Status::Optimal,
                objective,
                best_bound: objective,
                values: lp.values(),
                nodes: 0,
                iterations: 0,
                message: None,
            }
        }
        LpEnd::Infeasible => Solution::failed(Status::Infeasible, "LP relaxation is infeasible"),
        LpEnd::Unbounded => Solution::failed(Status::Unbounded, "LP relaxation is unbounded"),
        LpEnd::TimeLimit => Solution::failed(Status::TimeLimit, "time limit reached in the LP"),
        LpEnd::Failed => Solution::failed(Status::Error, "simplex iteration limit reached"),
    };
    sol.iterations = iterations;
    sol
}

/// Solves according to the configured mode and backend.
pub fn solve(model: &Model, config: &SolveConfig) -> Solution {
    match (config.backend(), config.mode()) {
        (Backend::External(_), _) => solve_external(model, config),
        (Backend::Reference, Mode::LpRelaxation) => solve_lp(model, config),
        (Backend::Reference, Mode::Mip) => solve_mip(model, config),
    }
}
