//! Instance generation and integrality gap benchmarking.

mod bench;
mod gap;
mod generate;

pub use bench::{load_instances, run_benchmark, BenchConfig, BenchReport, HorizonSummary, InstanceSource};
pub use gap::{measure_gap, normalized_gap, GapRow, CSV_HEADER};
pub use generate::generate_instance;
