//! Every commitment matrix of small instances, fixed into each formulation.

use std::collections::BTreeMap;

use ucform::harness::generate_instance;
use ucform::oracle::{exact_total_cost_for, is_admissible};
use ucform::{build, solve, Base, FormulationChoice, Instance, Schedule, SolveConfig, StartupKind, Status};

const REL: f64 = 1e-6;

fn all_matrices(instance: &Instance) -> impl Iterator<Item = Schedule> + '_ {
    let (n, h) = (instance.num_units(), instance.horizon);
    (0u64..1 << (n * h)).map(move |code| {
        let rows = (0..n)
            .map(|i| (0..h).map(|t| ((code >> (i * h + t)) & 1) as u8).collect())
            .collect();
        Schedule::new(rows).unwrap()
    })
}

fn check(instance: &Instance, base: Base) -> usize {
    let mut feasible = 0;
    for kind in StartupKind::ALL {
        let built = build(instance, &FormulationChoice::new(base, kind, 0.0)).unwrap();
        for s in all_matrices(instance) {
            let mut fixes = BTreeMap::new();
            for (i, row) in s.on_off.iter().enumerate() {
                for (t, &on) in row.iter().enumerate() {
                    fixes.insert(built.index.v[i][t], on as f64);
                }
            }
            let sol = solve(&built.model.fix_variables(&fixes).unwrap(), &SolveConfig::exact());
            let exact = if is_admissible(instance, &s, base) {
                exact_total_cost_for(instance, &s, base).ok()
            } else {
                None
            };
            match exact {
                Some(cost) => {
                    feasible += 1;
                    assert_eq!(sol.status, Status::Optimal, "{kind} {:?}", s.on_off);
                    let err = (sol.objective - cost.total).abs() / cost.total.abs().max(1.0);
                    assert!(err <= REL, "{kind} {:?}: {} vs {}", s.on_off, sol.objective, cost.total);
                }
                None => assert_eq!(sol.status, Status::Infeasible, "{kind} {:?}", s.on_off),
            }
        }
    }
    feasible
}

#[test]
fn basic_base_prices_every_schedule_exactly() {
    for seed in [3, 11] {
        let inst = generate_instance(seed, 2, 5, 0.3, false);
        assert!(check(&inst, Base::Basic) > 0);
    }
}

#[test]
fn extended_base_admits_exactly_the_valid_schedules() {
    for (seed, network) in [(4, false), (8, true)] {
        let inst = generate_instance(seed, 2, 5, 0.3, network);
        assert!(check(&inst, Base::Extended) > 0);
    }
}

#[test]
fn first_period_start_is_not_ramp_limited() {
    // optimum starts a unit in period 1 above its start-up ramp and ramps it down
    let inst = generate_instance(1685, 2, 3, 0.0, false);
    assert!(check(&inst, Base::Extended) > 0);
}
