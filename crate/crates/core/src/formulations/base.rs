use crate::domain::{Instance, Unit};
use crate::error::FormulationError;
use crate::milp::{Model, Sense, VarId, VarIndex, VarKind};

use super::{add_indicators, add_table, check_instance, Base};

/// Builds the base model: demand, production limits, ramping and, for the
/// extended base, indicators, tight ramping, minimum up/down times and line
/// limits. Production costs go straight into the objective.
pub fn build_base(instance: &Instance, base: Base) -> Result<(Model, VarIndex), FormulationError> {
    check_instance(instance)?;
    let mut model = Model::new(&format!("uc_{base}"));
    let v = add_table(&mut model, instance, "v", |_| 1.0, VarKind::Binary)?;
    let p = add_table(&mut model, instance, "p", |u| u.p_max, VarKind::Continuous)?;
    for (i, u) in instance.units.iter().enumerate() {
        for t in 0..instance.horizon {
            model.set_objective(v[i][t], u.cost_fixed_on)?;
            model.set_objective(p[i][t], u.cost_variable)?;
        }
    }
    let mut index = VarIndex {
        v,
        p,
        ..Default::default()
    };

    for t in 0..instance.horizon {
        let terms: Vec<_> = index.p.iter().map(|row| (row[t], 1.0)).collect();
        model.add_constraint(&format!("dem_{}", t + 1), terms, Sense::Eq, instance.load[t])?;
    }
    for (i, u) in instance.units.iter().enumerate() {
        for t in 0..instance.horizon {
            let (v, p) = (index.v[i][t], index.p[i][t]);
            let tag = format!("{}_{}", i + 1, t + 1);
            model.add_constraint(&format!("pmin_{tag}"), [(p, 1.0), (v, -u.p_min)], Sense::Ge, 0.0)?;
            model.add_constraint(&format!("pmax_{tag}"), [(p, 1.0), (v, -u.p_max)], Sense::Le, 0.0)?;
        }
    }

    match base {
        Base::Basic => {
            for (i, u) in instance.units.iter().enumerate() {
                add_ramping(&mut model, u, i, &index.v[i], &index.p[i])?;
            }
        }
        Base::Extended => {
            add_indicators(&mut model, &mut index, instance)?;
            let (y, z) = (index.y.clone().unwrap(), index.z.clone().unwrap());
            for (i, u) in instance.units.iter().enumerate() {
                let vars = UnitVars {
                    v: &index.v[i],
                    p: &index.p[i],
                    y: &y[i],
                    z: &z[i],
                };
                add_tight_ramping(&mut model, u, i, &vars)?;
                add_min_up_down(&mut model, u, i, &vars)?;
            }
            add_lines(&mut model, instance, &index)?;
        }
    }
    Ok((model, index))
}

/// Ramping without indicators: ramp-up, ramp-down and shutdown capability.
fn add_ramping(model: &mut Model, u: &Unit, i: usize, v: &[VarId], p: &[VarId]) -> Result<(), FormulationError> {
    let horizon = v.len();
    for t in 1..horizon {
        let tag = format!("{}_{}", i + 1, t + 1);
        model.add_constraint(
            &format!("rup_{tag}"),
            [
                (p[t], 1.0),
                (p[t - 1], -1.0),
                (v[t - 1], u.startup_ramp - u.ramp_up),
                (v[t], u.p_max - u.startup_ramp),
            ],
            Sense::Le,
            u.p_max,
        )?;
        model.add_constraint(
            &format!("rdn_{tag}"),
            [
                (p[t], 1.0),
                (p[t - 1], -1.0),
                (v[t], u.ramp_down - u.shutdown_ramp),
                (v[t - 1], u.shutdown_ramp - u.p_max),
            ],
            Sense::Ge,
            -u.p_max,
        )?;
    }
    for t in 0..horizon.saturating_sub(1) {
        model.add_constraint(
            &format!("sdr_{}_{}", i + 1, t + 1),
            [
                (p[t], 1.0),
                (v[t], -u.shutdown_ramp),
                (v[t + 1], u.shutdown_ramp - u.p_max),
            ],
            Sense::Le,
            0.0,
        )?;
    }
    Ok(())
}

struct UnitVars<'a> {
    v: &'a [VarId],
    p: &'a [VarId],
    y: &'a [VarId],
    z: &'a [VarId],
}

/// Indicator-based ramping. The conditional families are emitted only when
/// the unit's parameters allow them; two of them carry an extra uptime
/// condition (and one a reduced coefficient) without which they would cut
/// off feasible dispatches of short runs.
fn add_tight_ramping(model: &mut Model, u: &Unit, i: usize, x: &UnitVars<'_>) -> Result<(), FormulationError> {
    let horizon = x.v.len();
    let (ru, rd, su, sd, pmin) = (u.ramp_up, u.ramp_down, u.startup_ramp, u.shutdown_ramp, u.p_min);
    let (v, p, y, z) = (x.v, x.p, x.y, x.z);
    let down_gate = rd > su - pmin;
    let up_gate = ru > sd - pmin;
    let name = |family: &str, t: usize| format!("{family}_{}_{}", i + 1, t + 1);
    // these coefficients presume the start-up output is ramp-limited, which
    // nothing enforces for a start in the first period
    let after_start = |k: usize, c: f64| if k == 0 { 0.0 } else { c };

    for t in 1..horizon {
        model.add_constraint(
            &name("rup", t),
            [(p[t], 1.0), (p[t - 1], -1.0), (v[t - 1], -ru), (y[t], -su)],
            Sense::Le,
            0.0,
        )?;
        model.add_constraint(
            &name("rdn", t),
            [(p[t - 1], 1.0), (p[t], -1.0), (v[t], -rd), (z[t], -sd)],
            Sense::Le,
            0.0,
        )?;
        if down_gate && u.min_up >= 2 {
            model.add_constraint(
                &name("rdns", t),
                [
                    (p[t - 1], 1.0),
                    (p[t], -1.0),
                    (v[t], -rd),
                    (z[t], -sd),
                    (y[t - 1], after_start(t - 1, rd - su + pmin)),
                    (y[t], rd + pmin),
                ],
                Sense::Le,
                0.0,
            )?;
        }
        if t + 1 < horizon {
            if down_gate && u.min_up >= 3 && u.min_down >= 2 {
                model.add_constraint(
                    &name("rdnl", t),
                    [
                        (p[t - 1], 1.0),
                        (p[t], -1.0),
                        (v[t + 1], -rd),
                        (y[t - 1], after_start(t - 1, rd - su + pmin)),
                        (y[t], rd + pmin),
                        (y[t + 1], rd),
                        (z[t], -sd),
                        (z[t + 1], -rd),
                    ],
                    Sense::Le,
                    0.0,
                )?;
            }
            if up_gate && u.min_up >= 2 {
                model.add_constraint(
                    &name("rups", t),
                    [
                        (p[t], 1.0),
                        (p[t - 1], -1.0),
                        (v[t], -ru),
                        (y[t], -(su - ru)),
                        (z[t], pmin),
                        (z[t + 1], ru - sd + pmin),
                    ],
                    Sense::Le,
                    0.0,
                )?;
            }
        }
    }
    for t in 2..horizon {
        if u.min_up >= 3 {
            // A start two periods back may still be ramping down from its
            // start-up level, so that indicator only gets the slack left
            // over after that descent.
            model.add_constraint(
                &name("rdn2", t),
                [
                    (p[t - 2], 1.0),
                    (p[t], -1.0),
                    (v[t], -2.0 * rd),
                    (z[t - 1], -sd),
                    (z[t], -(sd + rd)),
                    (y[t - 2], after_start(t - 2, (2.0 * rd - su + pmin).max(0.0))),
                    (y[t - 1], 2.0 * rd + pmin),
                    (y[t], 2.0 * rd + pmin),
                ],
                Sense::Le,
                0.0,
            )?;
        }
        if t + 1 < horizon && up_gate && u.min_down >= 2 && u.min_up >= 2 {
            model.add_constraint(
                &name("rup2", t),
                [
                    (p[t], 1.0),
                    (p[t - 2], -1.0),
                    (v[t], -2.0 * ru),
                    (z[t - 1], pmin),
                    (z[t], pmin),
                    (y[t - 1], -(su - ru)),
                    (y[t], -(su - 2.0 * ru)),
                ],
                Sense::Le,
                0.0,
            )?;
        }
    }
    Ok(())
}

/// Turn on/off inequalities over windows truncated at the horizon start.
/// A unit offline before the horizon carries a shutdown at period
/// `1 - pre_offline`, which keeps it offline until its downtime has passed.
fn add_min_up_down(model: &mut Model, u: &Unit, i: usize, x: &UnitVars<'_>) -> Result<(), FormulationError> {
    let horizon = x.v.len();
    for t in 0..horizon {
        let first = (t + 1).saturating_sub(u.min_up);
        let mut terms: Vec<_> = (first..=t).map(|k| (x.y[k], 1.0)).collect();
        terms.push((x.v[t], -1.0));
        model.add_constraint(&format!("minup_{}_{}", i + 1, t + 1), terms, Sense::Le, 0.0)?;

        let first = (t + 1).saturating_sub(u.min_down);
        let mut terms: Vec<_> = (first..=t).map(|k| (x.z[k], 1.0)).collect();
        terms.push((x.v[t], 1.0));
        // the fictitious shutdown sits inside the window while t+1 <= DT - PD
        let pre_shutdown = u.pre_offline > 0 && t + 1 + u.pre_offline <= u.min_down;
        let rhs = if pre_shutdown { 0.0 } else { 1.0 };
        model.add_constraint(&format!("mindn_{}_{}", i + 1, t + 1), terms, Sense::Le, rhs)?;
    }
    Ok(())
}

/// Line limits through shift factors, nodal demand moved to the right side.
fn add_lines(model: &mut Model, instance: &Instance, index: &VarIndex) -> Result<(), FormulationError> {
    let Some(net) = &instance.network else {
        log::warn!("extended base without a network: no line limits emitted");
        return Ok(());
    };
    for (m, line) in net.lines.iter().enumerate() {
        let alpha = |node: &str| line.alpha.get(node).copied().unwrap_or(0.0);
        let unit_alpha: Vec<f64> = instance
            .units
            .iter()
            .map(|u| u.node.as_deref().map_or(0.0, alpha))
            .collect();
        let load_share: f64 = net.nodes.iter().map(|n| alpha(&n.id) * n.gamma).sum();
        for t in 0..instance.horizon {
            let terms: Vec<_> = unit_alpha
                .iter()
                .enumerate()
                .map(|(i, &a)| (index.p[i][t], a))
                .collect();
            let flow = load_share * instance.load[t];
            let tag = format!("{}_{}", m + 1, t + 1);
            model.add_constraint(&format!("lmax_{tag}"), terms.clone(), Sense::Le, line.capacity + flow)?;
            model.add_constraint(&format!("lmin_{tag}"), terms, Sense::Ge, flow - line.capacity)?;
        }
    }
    Ok(())
}
