use crate::domain::Instance;
use crate::error::FormulationError;
use crate::milp::{ConId, Model, Sense, VarIndex, VarKind};

use super::{add_cu, add_table};

/// Temperature model: `tmp_i_t` decays while the unit is offline, is held
/// at 1 or above while online, and rises by the heating `h_i_{t-1}` bought
/// at the variable start-up price. A unit online before the horizon starts
/// at temperature 1 with `h_i_0` fixed to 0.
///
/// On the basic base only `y` is created, with the shutdown indicator
/// substituted out of the logic equality: `0 <= y_t - v_t + v_{t-1} <= 1`.
pub fn add_startup_temp(
    model: &mut Model,
    index: &mut VarIndex,
    instance: &Instance,
) -> Result<Vec<ConId>, FormulationError> {
    add_cu(model, index, instance, 1.0)?;
    let mut rows = Vec::new();
    if index.y.is_none() {
        let y = add_table(model, instance, "y", |_| 1.0, VarKind::Binary)?;
        for (i, u) in instance.units.iter().enumerate() {
            let v = &index.v[i];
            for t in 0..instance.horizon {
                let mut terms = vec![(y[i][t], 1.0), (v[t], -1.0)];
                // z = y - v_t + v_{t-1}, with v_0 = 1 for units online before
                let prev = if t > 0 {
                    terms.push((v[t - 1], 1.0));
                    0.0
                } else if u.online_before_horizon() {
                    1.0
                } else {
                    0.0
                };
                let tag = format!("{}_{}", i + 1, t + 1);
                rows.push(model.add_constraint(&format!("yon_{tag}"), terms.clone(), Sense::Ge, -prev)?);
                rows.push(model.add_constraint(&format!("yoff_{tag}"), terms, Sense::Le, 1.0 - prev)?);
            }
        }
        index.y = Some(y);
    }

    let temp = add_table(model, instance, "tmp", |_| f64::INFINITY, VarKind::Continuous)?;
    let mut heat = Vec::with_capacity(instance.num_units());
    for (i, u) in instance.units.iter().enumerate() {
        let mut row = Vec::with_capacity(instance.horizon);
        for k in 0..instance.horizon {
            let upper = if k == 0 && u.online_before_horizon() {
                0.0
            } else {
                f64::INFINITY
            };
            row.push(model.add_variable(&format!("h_{}_{k}", i + 1), 0.0, upper, VarKind::Continuous)?);
        }
        heat.push(row);
    }

    let (y, cu) = (index.y.as_ref().unwrap(), index.cu.as_ref().unwrap());
    for (i, u) in instance.units.iter().enumerate() {
        let decay = (-u.heat_loss).exp();
        let (v, tmp, h) = (&index.v[i], &temp[i], &heat[i]);
        for t in 0..instance.horizon {
            let tag = format!("{}_{}", i + 1, t + 1);
            rows.push(model.add_constraint(&format!("tnorm_{tag}"), [(v[t], 1.0), (tmp[t], -1.0)], Sense::Le, 0.0)?);
            let dev = if t == 0 {
                let start = (-u.heat_loss * u.pre_offline as f64).exp();
                model.add_constraint(&format!("tdev_{tag}"), [(tmp[0], 1.0), (h[0], -1.0)], Sense::Eq, start)?
            } else {
                model.add_constraint(
                    &format!("tdev_{tag}"),
                    [
                        (tmp[t], 1.0),
                        (tmp[t - 1], -decay),
                        (v[t - 1], -(1.0 - decay)),
                        (h[t], -1.0),
                    ],
                    Sense::Eq,
                    0.0,
                )?
            };
            rows.push(dev);
            rows.push(model.add_constraint(
                &format!("cudef_{tag}"),
                [
                    (cu[i][t], 1.0),
                    (h[t], -u.startup_var_cost),
                    (y[i][t], -u.startup_fixed_cost),
                ],
                Sense::Eq,
                0.0,
            )?);
        }
    }
    index.temp = Some(temp);
    index.h = Some(heat);
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::tests::unit;
    use crate::formulations::tests::single;
    use crate::formulations::{build_base, Base};
    use crate::solver::{solve, SolveConfig, Status};
    use std::collections::BTreeMap;
    use std::f64::consts::LN_2;

    fn solve_fixed(pre_offline: usize, schedule: &[f64], load: Vec<f64>) -> (Model, Vec<f64>) {
        let mut u = unit("a");
        u.heat_loss = LN_2;
        u.startup_var_cost = 100.0;
        u.startup_fixed_cost = 10.0;
        u.pre_offline = pre_offline;
        let inst = single(load, u);
        let (mut m, mut idx) = build_base(&inst, Base::Basic).unwrap();
        add_startup_temp(&mut m, &mut idx, &inst).unwrap();
        let fixed: BTreeMap<_, _> = schedule.iter().enumerate().map(|(t, &v)| (idx.v[0][t], v)).collect();
        let m = m.fix_variables(&fixed).unwrap();
        let s = solve(&m, &SolveConfig::exact());
        assert_eq!(s.status, Status::Optimal);
        (m, s.values)
    }

    fn val(m: &Model, x: &[f64], name: &str) -> f64 {
        x[m.var_id(name).unwrap()]
    }

    #[test]
    fn reheating_after_two_offline_periods() {
        let (m, x) = solve_fixed(0, &[1.0, 0.0, 0.0, 1.0], vec![20.0, 0.0, 0.0, 20.0]);
        assert!((val(&m, &x, "h_1_3") - 0.75).abs() < 1e-9);
        assert!((val(&m, &x, "cu_1_4") - 85.0).abs() < 1e-9);
        for k in 0..3 {
            assert!(val(&m, &x, &format!("h_1_{k}")) < 1e-9);
        }
    }

    #[test]
    fn always_on_needs_no_heat() {
        let (m, x) = solve_fixed(0, &[1.0; 3], vec![20.0; 3]);
        for t in 1..=3 {
            assert!((val(&m, &x, &format!("tmp_1_{t}")) - 1.0).abs() < 1e-9);
            assert!(val(&m, &x, &format!("cu_1_{t}")).abs() < 1e-9);
        }
    }

    #[test]
    fn start_from_initial_offline_run() {
        let (m, x) = solve_fixed(3, &[1.0, 1.0], vec![20.0, 20.0]);
        assert!((val(&m, &x, "h_1_0") - 0.875).abs() < 1e-9);
        assert!((val(&m, &x, "cu_1_1") - 97.5).abs() < 1e-9);
    }
}
