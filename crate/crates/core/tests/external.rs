//! External backend driven by shell fixtures standing in for a solver.

use std::path::Path;

use tempfile::TempDir;

use ucform::harness::generate_instance;
use ucform::{build, read_mps, solve, Backend, Base, CommandTemplate, FormulationChoice, Mode, Model, SolveConfig, StartupKind, Status};

fn model() -> Model {
    let inst = generate_instance(6, 2, 6, 0.3, false);
    build(&inst, &FormulationChoice::new(Base::Basic, StartupKind::ThreeBin, 0.0)).unwrap().model
}

/// Writes `fixture.sh`, which keeps a copy of the model it was handed and
/// answers with `answer`.
fn fixture(dir: &Path, answer: &str) -> SolveConfig {
    let reply = dir.join("reply.sol");
    std::fs::write(&reply, answer).unwrap();
    let script = dir.join("fixture.sh");
    std::fs::write(
        &script,
        format!("cp \"$1\" '{}'\ncp '{}' \"$2\"\n", dir.join("seen.mps").display(), reply.display()),
    )
    .unwrap();
    let template = CommandTemplate::parse(&format!("sh \"{}\" {{input}} {{output}}", script.display())).unwrap();
    SolveConfig::exact().with_backend(Backend::External(template))
}

fn columns(model: &Model, status: &str, values: &[f64]) -> String {
    let mut out = format!("# fixture\nstatus {status}\n");
    for (v, x) in model.variables().iter().zip(values) {
        out.push_str(&format!("{} {x:?}\n", v.name));
    }
    out
}

#[test]
fn replayed_reference_solution_round_trips() {
    let m = model();
    let reference = solve(&m, &SolveConfig::exact());
    assert_eq!(reference.status, Status::Optimal);
    let dir = TempDir::new().unwrap();
    let config = fixture(dir.path(), &columns(&m, "optimal", &reference.values));
    let ext = solve(&m, &config);
    assert_eq!(ext.status, Status::Optimal);
    assert_eq!(ext.values, reference.values);
    assert!((ext.objective - reference.objective).abs() <= 1e-9 * reference.objective.abs());

    let seen = std::fs::read_to_string(dir.path().join("seen.mps")).unwrap();
    assert_eq!(read_mps(&seen).unwrap(), m);
}

#[test]
fn lp_mode_hands_over_a_continuous_model() {
    let m = model();
    let dir = TempDir::new().unwrap();
    let config = fixture(dir.path(), "status optimal\nobjective 1\n").with_mode(Mode::LpRelaxation);
    let sol = solve(&m, &config);
    assert_eq!(sol.status, Status::Optimal);
    assert_eq!(sol.objective, 1.0);
    let seen = read_mps(&std::fs::read_to_string(dir.path().join("seen.mps")).unwrap()).unwrap();
    assert_eq!(seen.num_variables(), m.num_variables());
    assert!(!std::fs::read_to_string(dir.path().join("seen.mps")).unwrap().contains("MARKER"));
}

#[test]
fn xml_dialect_with_reported_status() {
    let m = model();
    let dir = TempDir::new().unwrap();
    let answer = r#"<?xml version="1.0"?>
<CPLEXSolution version="1.2">
 <header objectiveValue="42.5" solutionStatusString="integer optimal, tolerance"/>
 <variables>
  <variable name="v_1_1" index="0" value="1"/>
 </variables>
</CPLEXSolution>
"#;
    let sol = solve(&m, &fixture(dir.path(), answer));
    assert_eq!(sol.status, Status::GapReached);
    assert_eq!(sol.objective, 42.5);
    assert_eq!(sol.value_of(&m, "v_1_1"), Some(1.0));
}

#[test]
fn reported_infeasibility_carries_no_values() {
    let m = model();
    let dir = TempDir::new().unwrap();
    let sol = solve(&m, &fixture(dir.path(), "status infeasible\n"));
    assert_eq!(sol.status, Status::Infeasible);
    assert!(sol.values.is_empty());
}

#[test]
fn broken_backends_are_errors() {
    let m = model();
    let dir = TempDir::new().unwrap();
    let garbage = solve(&m, &fixture(dir.path(), "v_1_1 one\n"));
    assert_eq!(garbage.status, Status::Error);

    let silent = CommandTemplate::parse("true {input} {output}").unwrap();
    let sol = solve(&m, &SolveConfig::exact().with_backend(Backend::External(silent)));
    assert_eq!(sol.status, Status::Error);
    assert!(sol.message.unwrap().contains("no solution file"));

    let failing = CommandTemplate::parse("false {input} {output}").unwrap();
    assert_eq!(solve(&m, &SolveConfig::exact().with_backend(Backend::External(failing))).status, Status::Error);

    let missing = CommandTemplate::parse("/nonexistent/solver {input} {output}").unwrap();
    assert_eq!(solve(&m, &SolveConfig::exact().with_backend(Backend::External(missing))).status, Status::Error);
}
