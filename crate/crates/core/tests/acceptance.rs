//! Exit criteria. Each criterion prints one PASS/FAIL line; the test fails
//! if any criterion fails.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ucform::formulations::{build_base, step_functions};
use ucform::harness::{generate_instance, measure_gap};
use ucform::milp::{Sense, VarKind};
use ucform::oracle::{brute_force_with_guard, enumerate_schedules, OracleResult};
use ucform::startup::{approximate_steps, discretized_temperature, minimal_steps_oracle, startup_cost};
use ucform::{build, read_mps, solve, write_mps, Base, FormulationChoice, Instance, Model, SolveConfig, StartupKind, Status, Unit};

const EQUIV_REL: f64 = 1e-6;
const DOMINANCE_ABS: f64 = 1e-7;
const ROWWISE_GAP: f64 = 1e-9;
const APPROX_ABS: f64 = 1e-7;
const HEAT_EPS: f64 = 1e-9;
const TEMP_ABS: f64 = 1e-9;
const LP_REL: f64 = 1e-6;
const LP_MIP_REL: f64 = 1e-9;
/// Relative slack on the start-up cost read back from a solved model.
const COST_REL: f64 = 1e-9;

const APPROX_KTOLS: [f64; 2] = [0.05, 0.2];
const STEP_KINDS: [StartupKind; 3] = [StartupKind::OneBin, StartupKind::OneBinStar, StartupKind::ThreeBin];
const ORACLE_GUARD: usize = 30;
/// Extended-base members of the equivalence batch: draws 20..=31 without
/// the two that no schedule can serve.
const EXTENDED_DRAWS: [u64; 10] = [20, 21, 22, 23, 25, 26, 27, 28, 30, 31];
/// Batch member on which the tightened one-bin relaxation is strictly better.
const STRICT_MEMBER: &str = "basic-04";

struct Member {
    id: String,
    base: Base,
    instance: Instance,
}

fn equivalence_batch() -> Vec<Member> {
    let mut out = Vec::new();
    for k in 0..20u64 {
        let units = 2 + (k % 2) as usize;
        let horizon = [6, 8, 10][(k % 3) as usize];
        out.push(Member {
            id: format!("basic-{k:02}"),
            base: Base::Basic,
            instance: generate_instance(k + 1, units, horizon, 0.3, false),
        });
    }
    for k in EXTENDED_DRAWS {
        let units = 2 + (k % 2) as usize;
        let horizon = [6, 8, 10][(k % 3) as usize];
        out.push(Member {
            id: format!("extended-{k:02}"),
            base: Base::Extended,
            instance: generate_instance(k + 81, units, horizon, 0.3, k % 2 == 0),
        });
    }
    out
}

struct Solved {
    kind: StartupKind,
    ktol: f64,
    mip: ucform::Solution,
    lp: ucform::Solution,
}

struct MemberRun {
    id: String,
    oracle: OracleResult,
    runs: Vec<Solved>,
}

impl MemberRun {
    fn get(&self, kind: StartupKind, ktol: f64) -> &Solved {
        self.runs.iter().find(|r| r.kind == kind && r.ktol == ktol).expect("solved combination")
    }
}

struct Report {
    lines: Vec<(usize, bool, String)>,
}

impl Report {
    fn record(&mut self, id: usize, pass: bool, detail: String) {
        let line = format!("{} criterion {id}: {detail}\n", if pass { "PASS" } else { "FAIL" });
        // raw stderr is not captured by the harness
        let _ = std::io::stderr().write_all(line.as_bytes());
        self.lines.push((id, pass, detail));
    }
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn mip_config() -> SolveConfig {
    SolveConfig::exact()
}

#[test]
fn acceptance() {
    let mut report = Report { lines: Vec::new() };
    let mut models: Vec<Model> = Vec::new();

    let batch = equivalence_batch();
    let started = Instant::now();
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for m in &batch {
        let oracle = match brute_force_with_guard(&m.instance, m.base, ORACLE_GUARD) {
            Ok(o) => o,
            Err(e) => {
                failures.push(format!("{}: oracle {e}", m.id));
                continue;
            }
        };
        let mut solved = Vec::new();
        for kind in StartupKind::ALL {
            let built = build(&m.instance, &FormulationChoice::new(m.base, kind, 0.0)).expect("valid batch member");
            let mip = solve(&built.model, &mip_config());
            let lp = solve(&built.model, &SolveConfig::lp());
            if mip.status != Status::Optimal || rel_diff(mip.objective, oracle.breakdown.total) > EQUIV_REL {
                failures.push(format!("{} {kind}: {} {} vs {}", m.id, mip.status, mip.objective, oracle.breakdown.total));
            }
            models.push(built.model);
            solved.push(Solved { kind, ktol: 0.0, mip, lp });
        }
        runs.push(MemberRun { id: m.id.clone(), oracle, runs: solved });
    }
    let elapsed = started.elapsed();
    report.record(
        1,
        failures.is_empty() && elapsed < Duration::from_secs(300),
        format!(
            "{} instances x 4 formulations agree with enumeration within {EQUIV_REL:e} in {:.1}s{}",
            batch.len(),
            elapsed.as_secs_f64(),
            if failures.is_empty() { String::new() } else { format!("; mismatches {failures:?}") }
        ),
    );

    // tightened one-bin relaxation
    let mut weaker = Vec::new();
    let mut strict = None;
    for r in &runs {
        let (plain, tight) = (r.get(StartupKind::OneBin, 0.0).lp.objective, r.get(StartupKind::OneBinStar, 0.0).lp.objective);
        if !(tight >= plain - DOMINANCE_ABS) {
            weaker.push(format!("{}: {tight} < {plain}", r.id));
        }
        if r.id == STRICT_MEMBER {
            strict = Some(tight - plain);
        }
    }
    let strict_ok = strict.is_some_and(|d| d > DOMINANCE_ABS);
    report.record(
        2,
        weaker.is_empty() && strict_ok,
        format!(
            "z_LP(one_bin_star) >= z_LP(one_bin) - {DOMINANCE_ABS:e} on {} instances, improvement {:?} on {STRICT_MEMBER}{}",
            runs.len(),
            strict,
            if weaker.is_empty() { String::new() } else { format!("; violated {weaker:?}") }
        ),
    );

    criterion_tightness(&mut report, &mut models);
    criterion_sizes(&mut report, &mut models);
    criterion_steps(&mut report);
    criterion_heating(&mut report, &mut models);

    // approximation error at positive tolerances
    let mut worst = f64::NEG_INFINITY;
    let mut over = Vec::new();
    for (m, r) in batch.iter().zip(&runs) {
        debug_assert_eq!(m.id, r.id);
        let z = r.oracle.breakdown.total;
        let su = r.oracle.breakdown.startup();
        for ktol in APPROX_KTOLS {
            for kind in STEP_KINDS {
                let built = build(&m.instance, &FormulationChoice::new(m.base, kind, ktol)).expect("valid batch member");
                let mip = solve(&built.model, &mip_config());
                let excess = (mip.objective - z).abs() - ktol * su;
                worst = worst.max(excess);
                if mip.status != Status::Optimal || !(excess <= APPROX_ABS) {
                    over.push(format!("{} {kind}@{ktol}: {} excess {excess:e}", m.id, mip.status));
                }
                models.push(built.model);
            }
        }
    }
    report.record(
        7,
        over.is_empty(),
        format!(
            "|z_MIP - z*| <= Ktol * startup(z*) + {APPROX_ABS:e} at Ktol {APPROX_KTOLS:?}, worst excess {worst:e}{}",
            if over.is_empty() { String::new() } else { format!("; violated {over:?}") }
        ),
    );

    let lp_models = random_lps(200, 9);
    let (lp_ok, lp_detail) = criterion_simplex(&lp_models);
    models.extend(lp_models);
    let mut inverted = Vec::new();
    for r in &runs {
        for s in &r.runs {
            let (lp, mip) = (s.lp.objective, s.mip.objective);
            if s.lp.status != Status::Optimal || !(lp <= mip + LP_MIP_REL * mip.abs().max(1.0)) {
                inverted.push(format!("{} {}: lp {lp} mip {mip}", r.id, s.kind));
            }
        }
    }
    report.record(
        9,
        lp_ok && inverted.is_empty(),
        format!(
            "{lp_detail}; z_LP <= z_MIP on {} equivalence MIPs{}",
            runs.len() * 4,
            if inverted.is_empty() { String::new() } else { format!("; violated {inverted:?}") }
        ),
    );

    // round trip over everything built above
    let mut broken = Vec::new();
    for (k, model) in models.iter().enumerate() {
        let text = write_mps(model).expect("writable model");
        let again = write_mps(model).expect("writable model");
        match read_mps(&text) {
            Ok(back) if back == *model && text == again => {}
            Ok(_) => broken.push(format!("#{k} {}", model.name())),
            Err(e) => broken.push(format!("#{k} {}: {e}", model.name())),
        }
    }
    report.record(
        8,
        broken.is_empty(),
        format!(
            "read_mps(write_mps(m)) == m and byte-identical output on {} models{}",
            models.len(),
            if broken.is_empty() { String::new() } else { format!("; broken {broken:?}") }
        ),
    );

    report.lines.sort_by_key(|l| l.0);
    let failed: Vec<_> = report.lines.iter().filter(|l| !l.1).map(|l| format!("{}: {}", l.0, l.2)).collect();
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}

/// Mean normalized gaps on seeds 1..=20 with 3 units and 10 periods.
fn criterion_tightness(report: &mut Report, models: &mut Vec<Model>) {
    let mut sums: BTreeMap<StartupKind, f64> = BTreeMap::new();
    let mut rowwise = Vec::new();
    let mut incomplete = Vec::new();
    for seed in 1..=20u64 {
        let inst = generate_instance(seed, 3, 10, 0.3, false);
        let mut gaps = BTreeMap::new();
        for kind in StartupKind::ALL {
            let choice = FormulationChoice::new(Base::Basic, kind, 0.0);
            let row = measure_gap(&format!("s{seed}"), &inst, &choice, &mip_config()).expect("valid instance");
            if !row.solved() {
                incomplete.push(format!("s{seed} {kind}"));
            }
            *sums.entry(kind).or_default() += row.gap_rel / 20.0;
            gaps.insert(kind, row.gap_rel);
            models.push(build(&inst, &choice).expect("valid instance").model);
        }
        if !(gaps[&StartupKind::OneBinStar] <= gaps[&StartupKind::OneBin] + ROWWISE_GAP) {
            rowwise.push(format!("s{seed}"));
        }
    }
    let mean = |k: StartupKind| sums[&k];
    let ordered = mean(StartupKind::Temp) <= mean(StartupKind::ThreeBin)
        && mean(StartupKind::ThreeBin) <= mean(StartupKind::OneBinStar)
        && mean(StartupKind::OneBinStar) <= mean(StartupKind::OneBin);
    report.record(
        3,
        ordered && rowwise.is_empty() && incomplete.is_empty(),
        format!(
            "mean gaps temp {:.6} three_bin {:.6} one_bin_star {:.6} one_bin {:.6}, row-wise one_bin_star <= one_bin violated on {rowwise:?}{}",
            mean(StartupKind::Temp),
            mean(StartupKind::ThreeBin),
            mean(StartupKind::OneBinStar),
            mean(StartupKind::OneBin),
            if incomplete.is_empty() { String::new() } else { format!(", unsolved {incomplete:?}") }
        ),
    );
}

fn criterion_sizes(report: &mut Report, models: &mut Vec<Model>) {
    let started = Instant::now();
    let mut inst = generate_instance(2024, 223, 72, 0.3, false);
    for u in &mut inst.units {
        u.pre_offline = 0;
        // halves the heat-loss range so K(l) stays strictly increasing in f64 up to l = 71
        u.heat_loss = 0.02 + (u.heat_loss - 0.02) / 2.0;
    }
    let increasing = inst.units.iter().all(|u| {
        (1..71i64).all(|l| startup_cost(u, l + 1).unwrap() > startup_cost(u, l).unwrap())
    });
    let (base, _) = build_base(&inst, Base::Basic).expect("valid fleet");
    let one = build(&inst, &FormulationChoice::new(Base::Basic, StartupKind::OneBin, 0.0)).expect("valid fleet");
    let star = build(&inst, &FormulationChoice::new(Base::Basic, StartupKind::OneBinStar, 0.0)).expect("valid fleet");
    let temp = build(&inst, &FormulationChoice::new(Base::Basic, StartupKind::Temp, 0.0)).expect("valid fleet");
    let steps = step_functions(&inst, 0.0);
    let elapsed = started.elapsed();
    let counts = (base.num_variables(), one.model.num_variables(), star.model.num_variables(), temp.model.num_variables());
    let step_counts: Vec<usize> = steps.iter().map(|s| s.len()).collect();
    let pass = increasing
        && counts == (32112, 48168, 48168, 96336)
        && step_counts.iter().all(|&c| c == 71)
        && elapsed < Duration::from_secs(30);
    report.record(
        4,
        pass,
        format!(
            "223 units, T=72: variables none/1-Bin/1-Bin*/Temp = {counts:?}, steps per unit in [{}, {}] (strictly increasing costs: {increasing}), built in {:.2}s",
            step_counts.iter().min().unwrap(),
            step_counts.iter().max().unwrap(),
            elapsed.as_secs_f64()
        ),
    );
    models.extend([base, one.model, star.model, temp.model]);
}

fn bare_unit(var: f64, fixed: f64, heat_loss: f64, pre_offline: usize) -> Unit {
    Unit {
        id: "g".into(),
        p_min: 0.0,
        p_max: 100.0,
        ramp_up: 100.0,
        ramp_down: 100.0,
        startup_ramp: 100.0,
        shutdown_ramp: 100.0,
        min_up: 1,
        min_down: 1,
        cost_fixed_on: 3.0,
        cost_variable: 1.0,
        startup_var_cost: var,
        startup_fixed_cost: fixed,
        heat_loss,
        pre_offline,
        node: None,
    }
}

fn criterion_steps(report: &mut Report) {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut problems = Vec::new();
    for draw in 0..100 {
        let unit = bare_unit(
            rng.gen_range(0.0..2000.0),
            rng.gen_range(0.0..500.0),
            rng.gen_range(0.01..0.99),
            0,
        );
        let horizon = rng.gen_range(2..=60usize);
        let ktol = rng.gen_range(0.0..=0.3);
        let f = approximate_steps(&unit, horizon, ktol);
        let optimum = minimal_steps_oracle(&unit, horizon, ktol);
        if f.len() != optimum {
            problems.push(format!("draw {draw}: {} steps, minimum {optimum}", f.len()));
        }
        let mut next = 1;
        for step in f.steps() {
            if step.lo != next {
                problems.push(format!("draw {draw}: gap before {}", step.lo));
            }
            next = step.hi + 1;
            for l in step.lo..=step.hi {
                let k = startup_cost(&unit, l as i64).unwrap();
                if !((1.0 - ktol) * k <= step.value && step.value <= (1.0 + ktol) * k) {
                    problems.push(format!("draw {draw}: value {} outside band at l={l} (K={k})", step.value));
                }
            }
        }
        if next != horizon {
            problems.push(format!("draw {draw}: covers up to {} of {}", next - 1, horizon - 1));
        }
    }
    let elapsed = started.elapsed();
    report.record(
        5,
        problems.is_empty() && elapsed < Duration::from_secs(10),
        format!(
            "100 draws: greedy count equals DP count with every value in band, {:.2}s{}",
            elapsed.as_secs_f64(),
            if problems.is_empty() { String::new() } else { format!("; {problems:?}") }
        ),
    );
}

fn heating_instances() -> Vec<Instance> {
    let ln2 = std::f64::consts::LN_2;
    let inst = |units: Vec<Unit>, horizon: usize| Instance {
        horizon,
        load: vec![0.0; horizon],
        units,
        network: None,
    };
    let named = |mut u: Unit, id: &str| {
        u.id = id.into();
        u
    };
    vec![
        inst(vec![bare_unit(100.0, 10.0, ln2, 0)], 4),
        inst(vec![bare_unit(250.0, 40.0, 0.3, 2)], 5),
        inst(vec![named(bare_unit(80.0, 5.0, 0.5, 0), "a"), named(bare_unit(300.0, 20.0, 0.1, 3), "b")], 3),
        inst(vec![bare_unit(1000.0, 0.0, 0.05, 1)], 6),
        inst(vec![named(bare_unit(60.0, 15.0, 0.69, 5), "a"), named(bare_unit(500.0, 100.0, 0.2, 0), "b")], 4),
    ]
}

fn criterion_heating(report: &mut Report, models: &mut Vec<Model>) {
    let mut problems = Vec::new();
    let mut schedules = 0;
    for (n, inst) in heating_instances().iter().enumerate() {
        let built = build(inst, &FormulationChoice::new(Base::Basic, StartupKind::Temp, 0.0)).expect("valid tiny instance");
        let index = &built.index;
        let (h, tmp, cu) = (index.h.as_ref().unwrap(), index.temp.as_ref().unwrap(), index.cu.as_ref().unwrap());
        for sched in enumerate_schedules(inst, Base::Basic).expect("tiny instance") {
            schedules += 1;
            let mut fixes = BTreeMap::new();
            for (i, row) in sched.on_off.iter().enumerate() {
                for (t, &v) in row.iter().enumerate() {
                    fixes.insert(index.v[i][t], f64::from(v));
                }
            }
            let fixed = built.model.fix_variables(&fixes).expect("binary values");
            let sol = solve(&fixed, &mip_config());
            if sol.status != Status::Optimal {
                problems.push(format!("instance {n} {:?}: {}", sched.on_off, sol.status));
                continue;
            }
            for (i, (u, row)) in inst.units.iter().zip(&sched.on_off).enumerate() {
                let expected = discretized_temperature(u, row, u.pre_offline).unwrap();
                let mut offline = if u.online_before_horizon() { None } else { Some(u.pre_offline) };
                let mut was_on = u.online_before_horizon();
                for t in 0..inst.horizon {
                    let on = row[t] == 1;
                    let start = on && !was_on;
                    let heat = sol.values[h[i][t]];
                    if heat > HEAT_EPS && !start {
                        problems.push(format!("instance {n} {row:?}: heating {heat:e} at h index {t} without a start"));
                    }
                    let temp = sol.values[tmp[i][t]];
                    if (temp - expected[t]).abs() > TEMP_ABS {
                        problems.push(format!("instance {n} {row:?}: temp {temp} vs {} at {t}", expected[t]));
                    }
                    let want = if start {
                        startup_cost(u, offline.unwrap_or(0) as i64).unwrap()
                    } else {
                        0.0
                    };
                    let got = sol.values[cu[i][t]];
                    if (got - want).abs() > COST_REL * want.max(1.0) {
                        problems.push(format!("instance {n} {row:?}: cu {got} vs {want} at {t}"));
                    }
                    offline = if on { None } else { Some(offline.map_or(1, |l| l + 1)) };
                    was_on = on;
                }
            }
        }
        models.push(built.model);
    }
    report.record(
        6,
        problems.is_empty(),
        format!(
            "{schedules} fixed schedules on 5 instances: heating only before starts, temperatures within {TEMP_ABS:e}, start-up costs exact{}",
            if problems.is_empty() { String::new() } else { format!("; {problems:?}") }
        ),
    );
}

struct RandomLp {
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    rows: Vec<(Vec<f64>, Sense, f64)>,
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Candidate vertices the enumeration visits.
fn candidates(n: usize, m: usize) -> f64 {
    (0..=m.min(n)).map(|k| binom(m, k) * binom(n, k) * 2f64.powi((n - k) as i32)).sum()
}

fn draw_lp(rng: &mut ChaCha8Rng, n: usize) -> RandomLp {
    let mut m_max = 1;
    while m_max < 5 && candidates(n, m_max + 1) <= 3e6 {
        m_max += 1;
    }
    let m = rng.gen_range(1..=m_max);
    let lower: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(-5..=0))).collect();
    let upper: Vec<f64> = lower.iter().map(|l| l + f64::from(rng.gen_range(0..=10))).collect();
    let cost = (0..n).map(|_| f64::from(rng.gen_range(-5..=5))).collect();
    let rows = (0..m)
        .map(|_| {
            let a: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(-5..=5))).collect();
            let sense = match rng.gen_range(0..20) {
                0..=8 => Sense::Le,
                9..=17 => Sense::Ge,
                _ => Sense::Eq,
            };
            (a, sense, f64::from(rng.gen_range(-10..=10)))
        })
        .collect();
    RandomLp { lower, upper, cost, rows }
}

impl RandomLp {
    fn model(&self, name: &str) -> Model {
        let mut model = Model::new(name);
        let ids: Vec<_> = (0..self.cost.len())
            .map(|j| model.add_variable(&format!("x{j}"), self.lower[j], self.upper[j], VarKind::Continuous).unwrap())
            .collect();
        for (j, &c) in self.cost.iter().enumerate() {
            model.set_objective(ids[j], c).unwrap();
        }
        for (i, (a, sense, rhs)) in self.rows.iter().enumerate() {
            let terms = a.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(j, &v)| (ids[j], v));
            model.add_constraint(&format!("r{i}"), terms, *sense, *rhs).unwrap();
        }
        model
    }

    fn feasible(&self, x: &[f64]) -> bool {
        const TOL: f64 = 1e-9;
        let bounds = x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(&v, (&l, &u))| v >= l - TOL && v <= u + TOL);
        bounds
            && self.rows.iter().all(|(a, sense, rhs)| {
                let act: f64 = a.iter().zip(x).map(|(c, v)| c * v).sum();
                let tol = TOL * (1.0 + rhs.abs());
                match sense {
                    Sense::Le => act <= rhs + tol,
                    Sense::Ge => act >= rhs - tol,
                    Sense::Eq => (act - rhs).abs() <= tol,
                }
            })
    }

    /// Minimum over all vertices: `k` rows tight, `k` variables solved from
    /// them, every other variable at one of its bounds.
    fn vertex_optimum(&self) -> Option<f64> {
        let n = self.cost.len();
        let m = self.rows.len();
        let mut best: Option<f64> = None;
        let mut x = vec![0.0; n];
        for k in 0..=m.min(n) {
            for rows in subsets(m, k) {
                for basic in subsets(n, k) {
                    let nonbasic: Vec<usize> = (0..n).filter(|j| !basic.contains(j)).collect();
                    for mask in 0u64..1 << nonbasic.len() {
                        for (bit, &j) in nonbasic.iter().enumerate() {
                            x[j] = if mask >> bit & 1 == 1 { self.upper[j] } else { self.lower[j] };
                        }
                        if !self.solve_basic(&rows, &basic, &mut x) || !self.feasible(&x) {
                            continue;
                        }
                        let z: f64 = self.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
                        if best.map_or(true, |b| z < b) {
                            best = Some(z);
                        }
                    }
                }
            }
        }
        best
    }

    /// Gaussian elimination of the tight rows for the basic variables.
    fn solve_basic(&self, rows: &[usize], basic: &[usize], x: &mut [f64]) -> bool {
        let k = rows.len();
        if k == 0 {
            return true;
        }
        let mut a = vec![vec![0.0; k + 1]; k];
        for (r, &i) in rows.iter().enumerate() {
            let (coef, _, rhs) = &self.rows[i];
            let mut b = *rhs;
            for (j, c) in coef.iter().enumerate() {
                if !basic.contains(&j) {
                    b -= c * x[j];
                }
            }
            for (c, &j) in basic.iter().enumerate() {
                a[r][c] = coef[j];
            }
            a[r][k] = b;
        }
        for col in 0..k {
            let piv = (col..k).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs())).unwrap();
            if a[piv][col].abs() < 1e-12 {
                return false;
            }
            a.swap(col, piv);
            for r in 0..k {
                if r != col {
                    let f = a[r][col] / a[col][col];
                    for c in col..=k {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
        for (c, &j) in basic.iter().enumerate() {
            x[j] = a[c][k] / a[c][c];
        }
        true
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn random_lps(count: usize, seed: u64) -> Vec<Model> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|d| draw_lp(&mut rng, 1 + d % 20).model(&format!("lp{d}"))).collect()
}

/// Simplex against vertex enumeration; regenerates the same draws as
/// [`random_lps`].
fn criterion_simplex(models: &[Model]) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut wrong = Vec::new();
    let mut infeasible = 0;
    for (d, model) in models.iter().enumerate() {
        let lp = draw_lp(&mut rng, 1 + d % 20);
        let sol = solve(model, &SolveConfig::lp());
        match lp.vertex_optimum() {
            None => {
                infeasible += 1;
                if sol.status != Status::Infeasible {
                    wrong.push(format!("lp{d}: {} but no vertex", sol.status));
                }
            }
            Some(z) => {
                if sol.status != Status::Optimal || rel_diff(sol.objective, z) > LP_REL {
                    wrong.push(format!("lp{d}: {} {} vs {z}", sol.status, sol.objective));
                }
            }
        }
    }
    (
        wrong.is_empty(),
        format!(
            "{} random LPs ({infeasible} infeasible) match vertex enumeration within {LP_REL:e}{}",
            models.len(),
            if wrong.is_empty() { String::new() } else { format!(" except {wrong:?}") }
        ),
    )
}
