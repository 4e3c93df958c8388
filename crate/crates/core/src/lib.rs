//! Unit commitment MILP builder with interchangeable start-up cost formulations.

pub mod domain;
pub mod formulations;
pub mod harness;
pub mod error;
pub mod milp;
pub mod oracle;
pub mod solver;
pub mod startup;

pub use domain::{validate_instance, Instance, Schedule, Unit, Violation};
pub use error::{DomainError, FormulationError, HarnessError, ModelError, MpsError, OracleError, SolverError};
pub use formulations::{build, Base, Built, FormulationChoice, StartupKind};
pub use milp::{read_mps, write_lp, write_mps, Model};
pub use solver::{solve, Backend, CommandTemplate, Mode, SolveConfig, Solution, Status};
pub use startup::StepFunction;
