use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while reading or interrogating instances and schedules.
#[derive(Debug, Error)]
pub enum DomainError {
    #[error("malformed instance JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("malformed load CSV {path:?} at line {line}: {message}")]
    LoadCsv {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("instance must provide exactly one of `load` and `load_csv`")]
    LoadSource,
    #[error("unit index {index} out of range (instance has {count} units)")]
    UnitIndex { index: usize, count: usize },
    #[error("schedule has {rows}x{cols} entries, expected {units}x{horizon}")]
    ScheduleShape {
        rows: usize,
        cols: usize,
        units: usize,
        horizon: usize,
    },
    #[error("schedule entry ({unit}, {period}) is {value}, expected 0 or 1")]
    NonBinary {
        unit: usize,
        period: usize,
        value: u8,
    },
    #[error("offline time must be non-negative, got {0}")]
    NegativeOfftime(i64),
    #[error("i/o error on {path:?}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl DomainError {
    pub(crate) fn from_json(err: serde_json::Error) -> Self {
        DomainError::Json {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}

/// Errors raised by the algebraic model layer.
#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("duplicate constraint name `{0}`")]
    DuplicateConstraint(String),
    #[error("invalid name `{0}`: must match [A-Za-z][A-Za-z0-9_]* and be at most 255 characters")]
    InvalidName(String),
    #[error("variable `{name}` has inverted bounds [{lower}, {upper}]")]
    InvertedBounds { name: String, lower: f64, upper: f64 },
    #[error("binary variable `{name}` must have bounds inside [0, 1], got [{lower}, {upper}]")]
    BinaryBounds { name: String, lower: f64, upper: f64 },
    #[error("unknown variable id {0}")]
    UnknownVariable(usize),
    #[error("value {value} for variable `{name}` lies outside [{lower}, {upper}]")]
    OutOfBounds {
        name: String,
        value: f64,
        lower: f64,
        upper: f64,
    },
    #[error("binary variable `{name}` can only be fixed to 0 or 1, got {value}")]
    FractionalBinary { name: String, value: f64 },
    #[error("coefficient {value} of `{name}` is not finite")]
    NonFinite { name: String, value: f64 },
}

/// Errors raised while reading free-format MPS text.
#[derive(Debug, Error, PartialEq)]
pub enum MpsError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unsupported section `{section}`")]
    UnsupportedSection { line: usize, section: String },
    #[error("line {line}: {source}")]
    Model {
        line: usize,
        #[source]
        source: ModelError,
    },
}

/// Errors raised by the formulation builders.
#[derive(Debug, Error)]
pub enum FormulationError {
    #[error("instance failed validation: {}", join_violations(.0))]
    InvalidInstance(Vec<crate::domain::Violation>),
    #[error("approximation tolerance must be finite and >= 0, got {0}")]
    InvalidTolerance(f64),
    #[error("no step function supplied for unit {0}")]
    MissingStepFunction(usize),
    #[error("step function for unit {unit} covers off-times up to {covered}, need {needed}")]
    ShortStepFunction {
        unit: usize,
        covered: usize,
        needed: usize,
    },
    #[error("start-up/shutdown indicators missing for unit {0}")]
    MissingIndicators(usize),
    #[error("start-up cost variables already present; one start-up formulation per model")]
    StartupAlreadyAdded,
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn join_violations(v: &[crate::domain::Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Errors raised by the brute-force oracle.
#[derive(Debug, Error)]
pub enum OracleError {
    #[error("enumeration of {cells} unit-periods exceeds the size guard of {limit}")]
    SizeGuard { cells: usize, limit: usize },
    #[error("schedule is infeasible for dispatch")]
    InfeasibleSchedule,
    #[error("no enumerated schedule admits a feasible dispatch")]
    Infeasible,
    #[error("dispatch LP failed: {0}")]
    Solver(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Errors raised by solver configuration.
#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("relative gap target must be non-negative, got {0}")]
    NegativeGap(f64),
    #[error("time limit must be positive, got {0}")]
    TimeLimit(f64),
    #[error("external command template must contain `{{input}}` and `{{output}}`: {0}")]
    Template(String),
}

/// Errors raised by the benchmark harness.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("benchmark configuration: {0}")]
    Config(String),
    #[error("unknown formulation `{0}`")]
    UnknownFormulation(String),
    #[error("i/o error on {path:?}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Formulation(#[from] FormulationError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}
