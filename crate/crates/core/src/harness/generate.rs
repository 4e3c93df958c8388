use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{Instance, Line, Network, Node, Unit};

/// Synthetic instance, fully determined by its arguments.
///
/// Unit parameters are drawn from fixed ranges: `p_max` in [50, 1000] MW,
/// `p_min` in [0.3, 0.6]·`p_max`, variable cost in [10, 60] per MWh, fixed
/// on-cost in [0.05, 0.3]·variable cost·`p_max`, heat loss in [0.02, 0.7],
/// `V` in [0.5, 3]·(fixed on-cost·24), `F` in [0.1, 0.5]·`V`, start-up and
/// shutdown ramps in [`p_min`, `p_max`], ramp rates in [0.2, 1]·(`p_max` −
/// `p_min`), minimum up/down times in [1, 8] and, for half of the units, an
/// initial offline run of 1 to 10 periods.
///
/// The load follows a daily sine around 62.5% of the installed capacity
/// with uniform noise of amplitude `0.25 * volatility`, clipped to
/// [0.3, 0.95] of the capacity. A load that no set of units can meet within
/// their production limits is raised to the nearest level some set can.
///
/// With `with_network`, every unit sits on its own leaf node connected to a
/// hub by one line; demand is spread evenly over all nodes and each line's
/// capacity is its share of the peak load plus 30–60% of the unit's `p_max`.
pub fn generate_instance(seed: u64, n_units: usize, horizon: usize, volatility: f64, with_network: bool) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let volatility = volatility.clamp(0.0, 1.0);
    let units: Vec<Unit> = (0..n_units.max(1)).map(|k| draw_unit(&mut rng, k)).collect();
    let capacity: f64 = units.iter().map(|u| u.p_max).sum();
    let phase = rng.gen_range(0.0..24.0);
    let levels = reachable_levels(&units);
    let load: Vec<f64> = (0..horizon.max(2))
        .map(|t| {
            let wave = 0.625 + 0.2 * (2.0 * PI * (t as f64 + phase) / 24.0).sin();
            let noise = 0.25 * volatility * rng.gen_range(-1.0..=1.0);
            let l = (wave + noise).clamp(0.3, 0.95) * capacity;
            round2(snap(l, &levels))
        })
        .collect();

    let network = with_network.then(|| star_network(&mut rng, &units, &load));
    let mut units = units;
    if network.is_some() {
        for (k, u) in units.iter_mut().enumerate() {
            u.node = Some(format!("n{}", k + 1));
        }
    }
    Instance {
        horizon: load.len(),
        load,
        units,
        network,
    }
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn draw_unit(rng: &mut ChaCha8Rng, k: usize) -> Unit {
    let p_max = round2(rng.gen_range(50.0..=1000.0));
    let p_min = round2(rng.gen_range(0.3..=0.6) * p_max);
    let cost_variable = round2(rng.gen_range(10.0..=60.0));
    let cost_fixed_on = round2(rng.gen_range(0.05..=0.3) * cost_variable * p_max);
    let heat_loss = rng.gen_range(0.02..=0.7);
    let startup_var_cost = round2(rng.gen_range(0.5..=3.0) * cost_fixed_on * 24.0);
    let startup_fixed_cost = round2(rng.gen_range(0.1..=0.5) * startup_var_cost);
    let span = p_max - p_min;
    let startup_ramp = round2(rng.gen_range(p_min..=p_max));
    let shutdown_ramp = round2(rng.gen_range(p_min..=p_max));
    let ramp_up = round2(rng.gen_range(0.2..=1.0) * span).max(0.01);
    let ramp_down = round2(rng.gen_range(0.2..=1.0) * span).max(0.01);
    let min_up = rng.gen_range(1..=8);
    let min_down = rng.gen_range(1..=8);
    let pre_offline = if rng.gen_bool(0.5) { 0 } else { rng.gen_range(1..=10) };
    Unit {
        id: format!("g{}", k + 1),
        p_min,
        p_max,
        ramp_up,
        ramp_down,
        startup_ramp,
        shutdown_ramp,
        min_up,
        min_down,
        cost_fixed_on,
        cost_variable,
        startup_var_cost,
        startup_fixed_cost,
        heat_loss,
        pre_offline,
        node: None,
    }
}

/// Production ranges `[sum p_min, sum p_max]` of every unit subset, merged.
/// Large fleets cover their range densely, so they are not enumerated.
fn reachable_levels(units: &[Unit]) -> Vec<(f64, f64)> {
    if units.len() > 16 {
        return Vec::new();
    }
    let mut spans: Vec<(f64, f64)> = (1usize..1 << units.len())
        .map(|mask| {
            units
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .fold((0.0, 0.0), |(lo, hi), (_, u)| (lo + u.p_min, hi + u.p_max))
        })
        .collect();
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in spans {
        match merged.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => merged.push((lo, hi)),
        }
    }
    merged
}

fn snap(load: f64, levels: &[(f64, f64)]) -> f64 {
    if levels.is_empty() || levels.iter().any(|&(lo, hi)| lo <= load && load <= hi) {
        return load;
    }
    levels
        .iter()
        .map(|&(lo, _)| lo)
        .find(|&lo| lo > load)
        .unwrap_or(load)
}

fn star_network(rng: &mut ChaCha8Rng, units: &[Unit], load: &[f64]) -> Network {
    let n = units.len();
    let gamma = 1.0 / (n as f64 + 1.0);
    let mut nodes = vec![Node {
        id: "hub".into(),
        gamma,
    }];
    nodes.extend((1..=n).map(|k| Node {
        id: format!("n{k}"),
        gamma,
    }));
    let peak = load.iter().copied().fold(0.0, f64::max);
    let lines = units
        .iter()
        .enumerate()
        .map(|(k, u)| {
            let share = rng.gen_range(0.5..=1.0);
            Line {
                id: format!("l{}", k + 1),
                capacity: round2(gamma * peak + share * 0.6 * u.p_max),
                alpha: BTreeMap::from([(format!("n{}", k + 1), 1.0)]),
            }
        })
        .collect();
    Network { nodes, lines }
}
