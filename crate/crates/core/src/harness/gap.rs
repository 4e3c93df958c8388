use std::time::Instant;

use serde::Serialize;

use crate::domain::Instance;
use crate::error::HarnessError;
use crate::formulations::{build, FormulationChoice, StartupKind};
use crate::solver::{solve, Mode, SolveConfig, Status};

pub const CSV_HEADER: &str = "instance,formulation,ktol,z_mip,z_lp,gap_abs,gap_rel,wall_ms,nodes,status,backend";

/// Integrality gap of one formulation on one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
    pub instance: String,
    pub formulation: StartupKind,
    pub ktol: f64,
    pub z_mip: f64,
    pub z_lp: f64,
    pub gap_abs: f64,
    /// `(z_mip - z_lp) / z_mip`, 0 when `z_mip` is 0.
    pub gap_rel: f64,
    /// Wall time of both solves; left out of deterministic reports.
    pub wall_ms: Option<f64>,
    pub nodes: usize,
    /// Status of the MIP solve; anything but `optimal` marks the row
    /// incomplete.
    pub status: Status,
    pub best_bound: f64,
    pub backend: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl GapRow {
    pub fn csv_line(&self) -> String {
        let wall = self.wall_ms.map(|w| format!("{w:.3}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.instance,
            self.formulation,
            self.ktol,
            self.z_mip,
            self.z_lp,
            self.gap_abs,
            self.gap_rel,
            wall,
            self.nodes,
            self.status,
            self.backend
        )
    }

    /// Solved to the configured gap within the budget.
    pub fn solved(&self) -> bool {
        matches!(self.status, Status::Optimal | Status::GapReached)
    }

    fn failed(instance: &str, choice: &FormulationChoice, backend: &str, message: String) -> Self {
        GapRow {
            instance: instance.to_string(),
            formulation: choice.startup,
            ktol: choice.ktol,
            z_mip: f64::NAN,
            z_lp: f64::NAN,
            gap_abs: f64::NAN,
            gap_rel: f64::NAN,
            wall_ms: None,
            nodes: 0,
            status: Status::Error,
            best_bound: f64::NAN,
            backend: backend.to_string(),
            message: Some(message),
        }
    }
}

/// Normalized gap; 0 for a zero optimum.
pub fn normalized_gap(z_mip: f64, z_lp: f64) -> f64 {
    if z_mip.abs() < 1e-9 {
        0.0
    } else {
        (z_mip - z_lp) / z_mip
    }
}

/// Builds the model, solves the root relaxation and the MIP with `config`
/// (its mode is ignored) and reports the gap.
pub fn measure_gap(
    id: &str,
    instance: &Instance,
    choice: &FormulationChoice,
    config: &SolveConfig,
) -> Result<GapRow, HarnessError> {
    let built = build(instance, choice)?;
    let backend = config.backend().id().to_string();
    let started = Instant::now();
    let lp = solve(&built.model, &config.clone().with_mode(Mode::LpRelaxation));
    let mip = solve(&built.model, &config.clone().with_mode(Mode::Mip));
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;
    if lp.status != Status::Optimal && mip.status.has_solution() {
        let mut row = GapRow::failed(id, choice, &backend, format!("LP relaxation: {}", lp.status));
        row.z_mip = mip.objective;
        return Ok(row);
    }
    let message = mip.message.clone().or(lp.message.clone());
    Ok(GapRow {
        instance: id.to_string(),
        formulation: choice.startup,
        ktol: choice.ktol,
        z_mip: mip.objective,
        z_lp: lp.objective,
        gap_abs: mip.objective - lp.objective,
        gap_rel: normalized_gap(mip.objective, lp.objective),
        wall_ms: Some(wall_ms),
        nodes: mip.nodes,
        status: mip.status,
        best_bound: mip.best_bound,
        backend,
        message,
    })
}

/// Like [`measure_gap`], turning errors into an `error` row.
pub(crate) fn measure_row(id: &str, instance: &Instance, choice: &FormulationChoice, config: &SolveConfig) -> GapRow {
    measure_gap(id, instance, choice, config)
        .unwrap_or_else(|e| GapRow::failed(id, choice, config.backend().id(), e.to_string()))
}
