use crate::domain::Instance;
use crate::error::FormulationError;
use crate::milp::{ConId, Model, Sense, VarIndex, VarKind};
use crate::startup::StepFunction;

use super::{add_cu, add_indicators, check_steps};

/// Start-up types: each start `y_t` is split over the steps of the cost
/// curve by continuous `d_i_t_s`, and a type other than the last is only
/// available if the unit shut down the matching number of periods earlier.
///
/// The cap on type `s` is written for `t > max L^s` as usual. A unit that
/// is offline before the horizon shut down at period `1 - pre_offline`; for
/// earlier periods its cap counts that shutdown as well, so the row is
/// dropped when it lies in `L^s` and otherwise lists the in-horizon
/// shutdowns only. `cu` equals the chosen type's cost.
pub fn add_startup_3bin(
    model: &mut Model,
    index: &mut VarIndex,
    instance: &Instance,
    steps: &[StepFunction],
) -> Result<Vec<ConId>, FormulationError> {
    check_steps(instance, steps)?;
    add_cu(model, index, instance, 0.0)?;
    let mut rows = Vec::new();
    match (&index.y, &index.z) {
        (None, None) => rows.extend(add_indicators(model, index, instance)?),
        (Some(_), Some(_)) => {}
        _ => return Err(FormulationError::MissingIndicators(0)),
    }
    let (y, z) = (index.y.as_ref().unwrap(), index.z.as_ref().unwrap());
    let cu = index.cu.as_ref().unwrap();
    let mut delta = Vec::with_capacity(instance.num_units());
    for (i, u) in instance.units.iter().enumerate() {
        let f = steps[i].steps();
        let mut unit_delta = Vec::with_capacity(instance.horizon);
        for t in 1..=instance.horizon {
            let mut ds = Vec::with_capacity(f.len());
            for (s, step) in f.iter().enumerate() {
                let d = model.add_variable(&format!("d_{}_{t}_{}", i + 1, s + 1), 0.0, 1.0, VarKind::Continuous)?;
                model.set_objective(d, step.value)?;
                ds.push(d);
            }
            let tag = format!("{}_{t}", i + 1);
            let mut terms: Vec<_> = ds.iter().map(|&d| (d, 1.0)).collect();
            terms.push((y[i][t - 1], -1.0));
            rows.push(model.add_constraint(&format!("styp_{tag}"), terms, Sense::Eq, 0.0)?);

            for (s, step) in f.iter().enumerate().take(f.len().saturating_sub(1)) {
                if t <= step.hi {
                    if u.pre_offline == 0 {
                        continue;
                    }
                    let fictitious = t - 1 + u.pre_offline;
                    if (step.lo..=step.hi).contains(&fictitious) {
                        continue;
                    }
                }
                let mut terms = vec![(ds[s], 1.0)];
                for l in step.lo..=step.hi.min(t - 1) {
                    terms.push((z[i][t - 1 - l], -1.0));
                }
                rows.push(model.add_constraint(&format!("scap_{tag}_{}", s + 1), terms, Sense::Le, 0.0)?);
            }

            let mut terms = vec![(cu[i][t - 1], 1.0)];
            terms.extend(ds.iter().zip(f).map(|(&d, step)| (d, -step.value)));
            rows.push(model.add_constraint(&format!("cudef_{tag}"), terms, Sense::Eq, 0.0)?);
            unit_delta.push(ds);
        }
        delta.push(unit_delta);
    }
    index.delta = Some(delta);
    Ok(rows)
}
