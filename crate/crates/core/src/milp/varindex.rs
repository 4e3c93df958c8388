use super::model::VarId;

/// Variable roles of the unit commitment models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    V,
    P,
    Cu,
    Y,
    Z,
    Temp,
    H,
    /// start-up type, 0-based
    Delta(usize),
}

/// Maps (unit, period, role) to variable ids. Units and periods are 0-based
/// here: period index `t` is period `t + 1` of the horizon, while heating
/// index `k` is `h(i, k)` for `k = 0..T-1`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VarIndex {
    pub v: Vec<Vec<VarId>>,
    pub p: Vec<Vec<VarId>>,
    pub cu: Option<Vec<Vec<VarId>>>,
    pub y: Option<Vec<Vec<VarId>>>,
    pub z: Option<Vec<Vec<VarId>>>,
    pub temp: Option<Vec<Vec<VarId>>>,
    pub h: Option<Vec<Vec<VarId>>>,
    /// `delta[i][t][s]`
    pub delta: Option<Vec<Vec<Vec<VarId>>>>,
}

fn pick(table: &Option<Vec<Vec<VarId>>>, i: usize, t: usize) -> Option<VarId> {
    table.as_ref()?.get(i)?.get(t).copied()
}

impl VarIndex {
    pub fn get(&self, role: Role, unit: usize, period: usize) -> Option<VarId> {
        match role {
            Role::V => self.v.get(unit)?.get(period).copied(),
            Role::P => self.p.get(unit)?.get(period).copied(),
            Role::Cu => pick(&self.cu, unit, period),
            Role::Y => pick(&self.y, unit, period),
            Role::Z => pick(&self.z, unit, period),
            Role::Temp => pick(&self.temp, unit, period),
            Role::H => pick(&self.h, unit, period),
            Role::Delta(s) => self.delta.as_ref()?.get(unit)?.get(period)?.get(s).copied(),
        }
    }

    pub fn num_units(&self) -> usize {
        self.v.len()
    }

    pub fn horizon(&self) -> usize {
        self.v.first().map_or(0, Vec::len)
    }

    /// Every id held by the index, in no particular order.
    pub fn all_ids(&self) -> Vec<VarId> {
        let mut out: Vec<VarId> = Vec::new();
        for table in [&self.v, &self.p] {
            out.extend(table.iter().flatten());
        }
        for table in [&self.cu, &self.y, &self.z, &self.temp, &self.h].into_iter().flatten() {
            out.extend(table.iter().flatten());
        }
        if let Some(d) = &self.delta {
            out.extend(d.iter().flatten().flatten());
        }
        out
    }
}
