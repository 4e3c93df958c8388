use crate::domain::Instance;
use crate::error::FormulationError;
use crate::milp::{ConId, Model, Sense, VarIndex};
use crate::startup::StepFunction;

use super::{add_cu, check_steps};

/// Start-up costs from `v` alone: for every period `t` and off-time `l` at
/// which the step function increases, `cu_t` is bounded below by the cost of
/// a start after `l` offline periods.
///
/// With `tightened`, the coefficient of `v_{t-n}` is lowered from `K(l)` to
/// `K(l) - K(n-1)`. Look-back periods before the horizon are offline
/// constants when they fall inside the unit's initial offline run, so they
/// contribute nothing; the look-back stops at the start of that run.
pub fn add_startup_1bin(
    model: &mut Model,
    index: &mut VarIndex,
    instance: &Instance,
    steps: &[StepFunction],
    tightened: bool,
) -> Result<Vec<ConId>, FormulationError> {
    check_steps(instance, steps)?;
    add_cu(model, index, instance, 1.0)?;
    let cu = index.cu.as_ref().expect("just added");
    let mut rows = Vec::new();
    for (i, u) in instance.units.iter().enumerate() {
        let f = &steps[i];
        let v = &index.v[i];
        for t in 1..=instance.horizon {
            let lookback = t - 1 + u.pre_offline;
            for l in 1..=lookback {
                let k = f.value(l);
                if k <= f.value(l - 1) {
                    continue;
                }
                let mut terms = vec![(cu[i][t - 1], 1.0), (v[t - 1], -k)];
                for n in 1..=l.min(t - 1) {
                    let coef = if tightened { k - f.value(n - 1) } else { k };
                    terms.push((v[t - 1 - n], coef));
                }
                let name = format!("su_{}_{t}_{l}", i + 1);
                rows.push(model.add_constraint(&name, terms, Sense::Ge, 0.0)?);
            }
        }
    }
    Ok(rows)
}
