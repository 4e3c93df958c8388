//! Fixtures shared by the criterion benchmarks.

use ucform::harness::generate_instance;
use ucform::{build, Base, FormulationChoice, Instance, Model, StartupKind};

/// Seed of every benchmark fleet.
pub const SEED: u64 = 2024;

pub fn fleet(units: usize, horizon: usize) -> Instance {
    generate_instance(SEED, units, horizon, 0.3, false)
}

pub fn model(instance: &Instance, kind: StartupKind, ktol: f64) -> Model {
    build(instance, &FormulationChoice::new(Base::Basic, kind, ktol))
        .expect("generated fleets are valid")
        .model
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        let inst = fleet(3, 6);
        for kind in StartupKind::ALL {
            assert!(model(&inst, kind, 0.0).num_variables() > 0);
        }
    }
}
