//! Dense bounded-variable simplex on an explicit tableau.
//!
//! Every row gets a slack `a x + s = b` whose bounds encode the row sense.
//! Phase 1 adds artificial columns for rows whose slack starts out of
//! bounds. The tableau keeps `B^-1 [A I E]` in row-major order; the slack
//! block therefore holds `B^-1`, which is used to recompute basic values.

use std::time::Instant;

use crate::milp::{Model, Sense};

pub(crate) const FEAS_TOL: f64 = 1e-9;
pub(crate) const OPT_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-7;
const DROP_TOL: f64 = 1e-14;
const RECOMPUTE_EVERY: usize = 64;
/// Pivots between rebuilds of the tableau from the original matrix.
const REFACTOR_EVERY: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum VarState {
    Basic,
    Lower,
    Upper,
    /// nonbasic free variable held at zero
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LpEnd {
    Optimal,
    Infeasible,
    Unbounded,
    TimeLimit,
    /// iteration limit or numerical breakdown
    Failed,
}

/// Basis snapshot used to rebuild a tableau without the parent copy.
#[derive(Debug, Clone)]
pub(crate) struct Basis {
    basis: Vec<usize>,
    state: Vec<VarState>,
}

#[derive(Clone)]
pub(crate) struct Lp {
    m: usize,
    n: usize,
    ncols: usize,
    /// structural columns of the scaled constraint matrix
    cols: Vec<Vec<(usize, f64)>>,
    /// structural `j` is stored as `x[j] = x_j / col_scale[j]`
    col_scale: Vec<f64>,
    b: Vec<f64>,
    /// artificial column k lives at `n + m + k` with entry `sign` in `row`
    art: Vec<(usize, f64)>,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    tab: Vec<f64>,
    d: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<VarState>,
    bland: bool,
    pub(crate) iterations: usize,
    cost_scale: f64,
}

/// Power of two bringing the largest of `coefs` into [0.5, 1).
fn row_scale(coefs: impl Iterator<Item = f64>) -> f64 {
    let big = coefs.fold(0.0f64, |acc, a| acc.max(a.abs()));
    if big == 0.0 || !big.is_finite() {
        return 1.0;
    }
    2f64.powi(-(big.log2().floor() as i32) - 1)
}

fn feas_tol(bound: f64) -> f64 {
    FEAS_TOL * (1.0 + bound.abs())
}

impl Lp {
    /// Builds the phase-1 starting tableau of the LP relaxation.
    pub(crate) fn new(model: &Model) -> Lp {
        let m = model.num_constraints();
        let n = model.num_variables();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut b = Vec::with_capacity(m);
        for (i, c) in model.constraints().iter().enumerate() {
            // power-of-two scaling of rows, then columns, is exact
            let scale = row_scale(c.terms.iter().map(|t| t.1));
            for &(j, a) in &c.terms {
                cols[j].push((i, a * scale));
            }
            b.push(c.rhs * scale);
        }
        let col_scale: Vec<f64> = cols.iter().map(|col| row_scale(col.iter().map(|t| t.1))).collect();
        for (col, &sc) in cols.iter_mut().zip(&col_scale) {
            for entry in col.iter_mut() {
                entry.1 *= sc;
            }
        }
        let mut lower = Vec::with_capacity(n + m);
        let mut upper = Vec::with_capacity(n + m);
        let mut x = Vec::with_capacity(n + m);
        let mut state = Vec::with_capacity(n + m);
        for (v, &sc) in model.variables().iter().zip(&col_scale) {
            let (lo, up) = (v.lower / sc, v.upper / sc);
            lower.push(lo);
            upper.push(up);
            let (val, st) = if lo.is_finite() {
                (lo, VarState::Lower)
            } else if up.is_finite() {
                (up, VarState::Upper)
            } else {
                (0.0, VarState::Zero)
            };
            x.push(val);
            state.push(st);
        }
        // row residuals with structurals at their starting values
        let mut r = b.clone();
        for (j, col) in cols.iter().enumerate() {
            if x[j] != 0.0 {
                for &(i, a) in col {
                    r[i] -= a * x[j];
                }
            }
        }
        let mut art = Vec::new();
        let mut row_basic = vec![0usize; m];
        let mut row_sign = vec![1.0; m];
        for (i, c) in model.constraints().iter().enumerate() {
            let (sl, su) = match c.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            lower.push(sl);
            upper.push(su);
            if r[i] >= sl - feas_tol(b[i]) && r[i] <= su + feas_tol(b[i]) {
                x.push(r[i]);
                state.push(VarState::Basic);
                row_basic[i] = n + i;
            } else {
                // slack rests at the violated bound, an artificial absorbs the rest
                let (val, st) = if r[i] < sl { (sl, VarState::Lower) } else { (su, VarState::Upper) };
                x.push(val);
                state.push(st);
                let sign = if r[i] - val > 0.0 { 1.0 } else { -1.0 };
                row_sign[i] = sign;
                row_basic[i] = usize::MAX - art.len();
                art.push((i, sign));
            }
        }
        let ncols = n + m + art.len();
        for (k, &(i, _)) in art.iter().enumerate() {
            lower.push(0.0);
            upper.push(f64::INFINITY);
            x.push((r[i] - x[n + i]).abs());
            state.push(VarState::Basic);
            row_basic[i] = n + m + k;
        }
        let mut tab = vec![0.0; m * ncols];
        for (j, col) in cols.iter().enumerate() {
            for &(i, a) in col {
                tab[i * ncols + j] = a / row_sign[i];
            }
        }
        for i in 0..m {
            tab[i * ncols + n + i] = 1.0 / row_sign[i];
        }
        for (k, &(i, sign)) in art.iter().enumerate() {
            tab[i * ncols + n + m + k] = sign / row_sign[i];
        }
        let mut cost = vec![0.0; ncols];
        for (j, (&c, &sc)) in model.objective().iter().zip(&col_scale).enumerate() {
            cost[j] = c * sc;
        }
        let cost_scale = cost.iter().fold(1.0f64, |acc, c| acc.max(c.abs()));
        Lp {
            m,
            n,
            ncols,
            cols,
            col_scale,
            b,
            art,
            cost,
            lower,
            upper,
            tab,
            d: vec![0.0; ncols],
            x,
            basis: row_basic,
            state,
            bland: false,
            iterations: 0,
            cost_scale,
        }
    }

    pub(crate) fn tableau_bytes(&self) -> usize {
        self.tab.len() * std::mem::size_of::<f64>()
    }

    pub(crate) fn values(&self) -> Vec<f64> {
        (0..self.n)
            .map(|j| self.x[j].clamp(self.lower[j], self.upper[j]) * self.col_scale[j])
            .collect()
    }

    pub(crate) fn objective(&self) -> f64 {
        (0..self.n).map(|j| self.cost[j] * self.x[j]).sum()
    }

    pub(crate) fn snapshot(&self) -> Basis {
        Basis {
            basis: self.basis.clone(),
            state: self.state.clone(),
        }
    }

    fn is_art(&self, j: usize) -> bool {
        j >= self.n + self.m
    }

    /// Solves from scratch: phase 1 then phase 2 primal simplex.
    pub(crate) fn solve(&mut self, deadline: Option<Instant>) -> LpEnd {
        if !self.art.is_empty() {
            let phase1: Vec<f64> = (0..self.ncols)
                .map(|j| if self.is_art(j) { 1.0 } else { 0.0 })
                .collect();
            let saved_scale = self.cost_scale;
            self.cost_scale = 1.0;
            let end = self.primal(&phase1, deadline);
            self.cost_scale = saved_scale;
            match end {
                LpEnd::Optimal => {}
                LpEnd::Unbounded => return LpEnd::Failed,
                other => return other,
            }
            let infeas: f64 = (self.n + self.m..self.ncols).map(|j| self.x[j]).sum();
            let scale = self.b.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
            if infeas > FEAS_TOL * scale.max(1.0) * 10.0 {
                return LpEnd::Infeasible;
            }
            self.retire_artificials();
        }
        let cost = self.cost.clone();
        self.primal(&cost, deadline)
    }

    /// Pins artificials to zero and pivots basic ones out where possible.
    fn retire_artificials(&mut self) {
        for j in self.n + self.m..self.ncols {
            self.lower[j] = 0.0;
            self.upper[j] = 0.0;
            if self.state[j] != VarState::Basic {
                self.x[j] = 0.0;
                self.state[j] = VarState::Lower;
            }
        }
        for r in 0..self.m {
            let j = self.basis[r];
            if !self.is_art(j) {
                continue;
            }
            let row = &self.tab[r * self.ncols..(r + 1) * self.ncols];
            let mut best = None;
            let mut best_abs = 1e-7;
            for (q, &a) in row.iter().enumerate().take(self.n + self.m) {
                if self.state[q] != VarState::Basic && a.abs() > best_abs {
                    best_abs = a.abs();
                    best = Some(q);
                }
            }
            if let Some(q) = best {
                // degenerate exchange: the artificial leaves at zero
                let delta = self.x[j] / self.tab[r * self.ncols + q];
                self.shift_basics(q, delta);
                self.x[q] += delta;
                self.x[j] = 0.0;
                self.state[j] = VarState::Lower;
                self.pivot(r, q);
            }
        }
        self.recompute_basics();
    }

    fn compute_duals(&mut self, cost: &[f64]) {
        self.d.copy_from_slice(cost);
        for r in 0..self.m {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                let row = &self.tab[r * self.ncols..(r + 1) * self.ncols];
                for (dj, a) in self.d.iter_mut().zip(row) {
                    *dj -= cb * a;
                }
            }
        }
        for r in 0..self.m {
            self.d[self.basis[r]] = 0.0;
        }
    }

    /// Recomputes basic values from the nonbasic ones through `B^-1`.
    pub(crate) fn recompute_basics(&mut self) {
        let nc = self.ncols;
        let mut xb = vec![0.0; self.m];
        for (r, out) in xb.iter_mut().enumerate() {
            let row = &self.tab[r * nc..(r + 1) * nc];
            let mut acc = 0.0;
            for i in 0..self.m {
                acc += row[self.n + i] * self.b[i];
            }
            for (j, a) in row.iter().enumerate() {
                if *a != 0.0 && self.state[j] != VarState::Basic && self.x[j] != 0.0 {
                    acc -= a * self.x[j];
                }
            }
            *out = acc;
        }
        for r in 0..self.m {
            self.x[self.basis[r]] = xb[r];
        }
    }

    /// Moves nonbasic `q` by `delta` and updates every basic value.
    fn shift_basics(&mut self, q: usize, delta: f64) {
        if delta == 0.0 {
            return;
        }
        let nc = self.ncols;
        for r in 0..self.m {
            let a = self.tab[r * nc + q];
            if a != 0.0 {
                self.x[self.basis[r]] -= a * delta;
            }
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let nc = self.ncols;
        let piv = self.tab[r * nc + q];
        let inv = 1.0 / piv;
        let mut prow: Vec<(usize, f64)> = Vec::new();
        {
            let row = &mut self.tab[r * nc..(r + 1) * nc];
            for (k, v) in row.iter_mut().enumerate() {
                if *v != 0.0 {
                    *v *= inv;
                    if v.abs() < DROP_TOL {
                        *v = 0.0;
                    } else {
                        prow.push((k, *v));
                    }
                }
            }
            row[q] = 1.0;
        }
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.tab[i * nc + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.tab[i * nc..(i + 1) * nc];
            for &(k, v) in &prow {
                let nv = row[k] - f * v;
                row[k] = if nv.abs() < DROP_TOL { 0.0 } else { nv };
            }
            row[q] = 0.0;
        }
        let dq = self.d[q];
        if dq != 0.0 {
            for &(k, v) in &prow {
                self.d[k] -= dq * v;
            }
            self.d[q] = 0.0;
        }
        let leaving = self.basis[r];
        self.basis[r] = q;
        self.state[q] = VarState::Basic;
        if self.state[leaving] == VarState::Basic {
            // callers set the proper bound state before pivoting
            self.state[leaving] = VarState::Lower;
        }
    }

    fn entering_candidate(&self, dtol: f64) -> Option<usize> {
        self.entering_except(dtol, &[])
    }

    /// Like [`Lp::entering_candidate`], skipping columns flagged in `rejected`.
    fn entering_except(&self, dtol: f64, rejected: &[bool]) -> Option<usize> {
        let mut best: Option<usize> = None;
        let mut best_score = 0.0;
        for j in 0..self.ncols {
            let st = self.state[j];
            if st == VarState::Basic || self.lower[j] == self.upper[j] || rejected.get(j) == Some(&true) {
                continue;
            }
            let dj = self.d[j];
            let ok = match st {
                VarState::Lower => dj < -dtol,
                VarState::Upper => dj > dtol,
                VarState::Zero => dj.abs() > dtol,
                VarState::Basic => false,
            };
            if !ok {
                continue;
            }
            if self.bland {
                return Some(j);
            }
            if dj.abs() > best_score {
                best_score = dj.abs();
                best = Some(j);
            }
        }
        best
    }

    /// Primal simplex on the given cost vector from a primal feasible basis.
    fn primal(&mut self, cost: &[f64], deadline: Option<Instant>) -> LpEnd {
        self.compute_duals(cost);
        let nc = self.ncols;
        let limit = 50 * (self.m + nc) + 10_000;
        let stall_limit = 10 * (self.m + nc);
        let mut stalled = 0usize;
        let mut local = 0usize;
        let dtol = OPT_TOL * self.cost_scale;
        // columns whose only blocking entries are below the pivot tolerance;
        // cleared whenever the basis changes
        let mut rejected = vec![false; nc];
        let mut any_rejected = false;
        // reduced costs were recomputed since the last basis change
        let mut fresh = true;
        loop {
            if local >= limit {
                return LpEnd::Failed;
            }
            if local % REFACTOR_EVERY == REFACTOR_EVERY - 1 {
                self.refresh();
            }
            if local % RECOMPUTE_EVERY == RECOMPUTE_EVERY - 1 {
                self.recompute_basics();
                self.compute_duals(cost);
                fresh = true;
                if deadline.is_some_and(|d| Instant::now() >= d) {
                    return LpEnd::TimeLimit;
                }
            }
            let Some(q) = self.entering_except(dtol, &rejected) else {
                if any_rejected {
                    return LpEnd::Failed;
                }
                // confirm with fresh reduced costs before declaring optimality
                self.compute_duals(cost);
                fresh = true;
                if self.entering_candidate(dtol).is_some() {
                    continue;
                }
                self.recompute_basics();
                return LpEnd::Optimal;
            };
            local += 1;
            self.iterations += 1;
            let dir = match self.state[q] {
                VarState::Lower => 1.0,
                VarState::Upper => -1.0,
                _ => {
                    if self.d[q] < 0.0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
            };
            // ratio test: basic i moves by -dir * alpha_i * theta
            let mut theta_max = f64::INFINITY;
            let mut tiny_block = false;
            for r in 0..self.m {
                let a = self.tab[r * nc + q];
                if a.abs() <= PIVOT_TOL {
                    if a != 0.0 {
                        let bi = self.basis[r];
                        let bound = if -dir * a < 0.0 { self.lower[bi] } else { self.upper[bi] };
                        tiny_block |= bound.is_finite();
                    }
                    continue;
                }
                let bi = self.basis[r];
                let rate = -dir * a;
                let room = if rate < 0.0 {
                    self.x[bi] - self.lower[bi]
                } else {
                    self.upper[bi] - self.x[bi]
                };
                if room.is_finite() {
                    let bound = if rate < 0.0 { self.lower[bi] } else { self.upper[bi] };
                    let t = (room.max(0.0) + feas_tol(bound)) / rate.abs();
                    if t < theta_max {
                        theta_max = t;
                    }
                }
            }
            let flip = self.upper[q] - self.lower[q];
            let mut leave: Option<usize> = None;
            let mut theta = f64::INFINITY;
            if theta_max.is_finite() {
                let mut best_abs = 0.0;
                for r in 0..self.m {
                    let a = self.tab[r * nc + q];
                    if a.abs() <= PIVOT_TOL {
                        continue;
                    }
                    let bi = self.basis[r];
                    let rate = -dir * a;
                    let room = if rate < 0.0 {
                        self.x[bi] - self.lower[bi]
                    } else {
                        self.upper[bi] - self.x[bi]
                    };
                    if !room.is_finite() {
                        continue;
                    }
                    let t = room.max(0.0) / rate.abs();
                    if t > theta_max {
                        continue;
                    }
                    let better = if self.bland {
                        match leave {
                            None => true,
                            Some(l) => {
                                t < theta - 1e-12
                                    || (t <= theta + 1e-12 && bi < self.basis[l])
                            }
                        }
                    } else {
                        a.abs() > best_abs
                    };
                    if better {
                        best_abs = a.abs();
                        leave = Some(r);
                        theta = t;
                    }
                }
            }
            if flip <= theta {
                if !flip.is_finite() {
                    if !fresh {
                        // an unbounded ray may be an artefact of drifted reduced costs
                        self.compute_duals(cost);
                        fresh = true;
                        local -= 1;
                        self.iterations -= 1;
                        continue;
                    }
                    if tiny_block {
                        rejected[q] = true;
                        any_rejected = true;
                        continue;
                    }
                    return LpEnd::Unbounded;
                }
                // bound flip, no basis change
                self.shift_basics(q, dir * flip);
                if dir > 0.0 {
                    self.x[q] = self.upper[q];
                    self.state[q] = VarState::Upper;
                } else {
                    self.x[q] = self.lower[q];
                    self.state[q] = VarState::Lower;
                }
                stalled = 0;
                continue;
            }
            let r = leave.expect("finite ratio implies a leaving row");
            let gain = theta * self.d[q].abs();
            if gain <= 1e-12 * (1.0 + self.cost_scale) {
                stalled += 1;
                if stalled > stall_limit {
                    self.bland = true;
                }
            } else {
                stalled = 0;
            }
            let bi = self.basis[r];
            let rate = -dir * self.tab[r * nc + q];
            self.shift_basics(q, dir * theta);
            self.x[q] += dir * theta;
            if rate < 0.0 {
                self.x[bi] = self.lower[bi];
                self.state[bi] = VarState::Lower;
            } else {
                self.x[bi] = self.upper[bi];
                self.state[bi] = VarState::Upper;
            }
            self.pivot(r, q);
            fresh = false;
            if any_rejected {
                rejected.iter_mut().for_each(|f| *f = false);
                any_rejected = false;
            }
        }
    }

    /// Changes the bounds of structural `j`, given in model units.
    pub(crate) fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        let (lower, upper) = (lower / self.col_scale[j], upper / self.col_scale[j]);
        self.lower[j] = lower;
        self.upper[j] = upper;
        let st = self.state[j];
        if st == VarState::Basic {
            return;
        }
        let target = match st {
            VarState::Upper if upper.is_finite() => upper,
            _ if lower.is_finite() => lower,
            _ if upper.is_finite() => upper,
            _ => 0.0,
        };
        self.state[j] = if target == lower && lower.is_finite() {
            VarState::Lower
        } else if upper.is_finite() && target == upper {
            VarState::Upper
        } else {
            VarState::Zero
        };
        let delta = target - self.x[j];
        self.shift_basics(j, delta);
        self.x[j] = target;
    }

    /// Dual simplex from a dual feasible basis, used after bound changes.
    pub(crate) fn dual(&mut self, deadline: Option<Instant>) -> LpEnd {
        let cost = self.cost.clone();
        self.compute_duals(&cost);
        let dtol = OPT_TOL * self.cost_scale;
        // a basis that lost dual feasibility is handed to the primal
        if self.entering_candidate(dtol * 10.0).is_some() {
            return self.reoptimize_primal(deadline);
        }
        let nc = self.ncols;
        let limit = 50 * (self.m + nc) + 10_000;
        let stall_limit = 10 * (self.m + nc);
        let mut stalled = 0usize;
        let mut local = 0usize;
        // rows whose eligible entries are all below the pivot tolerance
        let mut skipped = vec![false; self.m];
        let mut any_skipped = false;
        loop {
            if local >= limit {
                return LpEnd::Failed;
            }
            if local % REFACTOR_EVERY == REFACTOR_EVERY - 1 && self.refresh() {
                self.compute_duals(&cost);
            }
            if local % RECOMPUTE_EVERY == RECOMPUTE_EVERY - 1 {
                self.recompute_basics();
                if deadline.is_some_and(|d| Instant::now() >= d) {
                    return LpEnd::TimeLimit;
                }
            }
            // leaving row: largest bound violation
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.m {
                if skipped[r] {
                    continue;
                }
                let bi = self.basis[r];
                let v = self.x[bi];
                let viol = if v < self.lower[bi] - feas_tol(self.lower[bi]) {
                    self.lower[bi] - v
                } else if v > self.upper[bi] + feas_tol(self.upper[bi]) {
                    v - self.upper[bi]
                } else {
                    continue;
                };
                let better = match leave {
                    None => true,
                    Some((l, best)) => {
                        if self.bland {
                            bi < self.basis[l]
                        } else {
                            viol > best
                        }
                    }
                };
                if better {
                    leave = Some((r, viol));
                }
            }
            let Some((r, viol)) = leave else {
                if any_skipped {
                    return LpEnd::Failed;
                }
                self.recompute_basics();
                if self.primal_feasible() {
                    // fresh reduced costs may reveal drift; let the primal finish
                    self.compute_duals(&cost);
                    if self.entering_candidate(dtol).is_some() {
                        return self.reoptimize_primal(deadline);
                    }
                    return LpEnd::Optimal;
                }
                continue;
            };
            local += 1;
            self.iterations += 1;
            let bi = self.basis[r];
            let below = self.x[bi] < self.lower[bi];
            let s = if below { 1.0 } else { -1.0 };
            // Harris pass on the dual ratios |d_j / alpha_rj|
            let row_start = r * nc;
            let eligible = |lp: &Lp, j: usize| -> Option<f64> {
                let st = lp.state[j];
                if st == VarState::Basic || lp.lower[j] == lp.upper[j] {
                    return None;
                }
                let a = lp.tab[row_start + j];
                if a == 0.0 {
                    return None;
                }
                let ok = match st {
                    VarState::Lower => s * a < 0.0,
                    VarState::Upper => s * a > 0.0,
                    VarState::Zero => true,
                    VarState::Basic => false,
                };
                ok.then_some(a)
            };
            let mut bound = f64::INFINITY;
            let mut tiny = false;
            for j in 0..nc {
                if let Some(a) = eligible(self, j) {
                    if a.abs() <= PIVOT_TOL {
                        tiny = true;
                        continue;
                    }
                    let t = (self.d[j].abs() + dtol) / a.abs();
                    if t < bound {
                        bound = t;
                    }
                }
            }
            if !bound.is_finite() {
                if tiny {
                    skipped[r] = true;
                    any_skipped = true;
                    local -= 1;
                    self.iterations -= 1;
                    continue;
                }
                return LpEnd::Infeasible;
            }
            let mut enter: Option<usize> = None;
            let mut best_abs = 0.0;
            let mut best_ratio = f64::INFINITY;
            for j in 0..nc {
                if let Some(a) = eligible(self, j).filter(|a| a.abs() > PIVOT_TOL) {
                    let t = self.d[j].abs() / a.abs();
                    if t > bound {
                        continue;
                    }
                    let better = if self.bland {
                        t < best_ratio - 1e-12 || (t <= best_ratio + 1e-12 && enter.is_none())
                    } else {
                        a.abs() > best_abs
                    };
                    if better {
                        best_abs = a.abs();
                        best_ratio = t;
                        enter = Some(j);
                    }
                }
            }
            let q = enter.expect("bounded ratio implies an entering column");
            let gain = best_ratio * viol;
            if gain <= 1e-12 * (1.0 + self.cost_scale) {
                stalled += 1;
                if stalled > stall_limit {
                    self.bland = true;
                }
            } else {
                stalled = 0;
            }
            let target = if below { self.lower[bi] } else { self.upper[bi] };
            let a = self.tab[row_start + q];
            let delta = (self.x[bi] - target) / a;
            self.shift_basics(q, delta);
            self.x[q] += delta;
            self.x[bi] = target;
            self.state[bi] = if below { VarState::Lower } else { VarState::Upper };
            self.pivot(r, q);
            if any_skipped {
                skipped.iter_mut().for_each(|f| *f = false);
                any_skipped = false;
            }
        }
    }

    fn reoptimize_primal(&mut self, deadline: Option<Instant>) -> LpEnd {
        if !self.primal_feasible() {
            // rebuild from scratch with the current bounds
            let mut fresh = self.rebuilt_cold();
            let end = fresh.solve(deadline);
            *self = fresh;
            return end;
        }
        let cost = self.cost.clone();
        self.primal(&cost, deadline)
    }

    fn primal_feasible(&self) -> bool {
        (0..self.ncols).all(|j| {
            self.x[j] >= self.lower[j] - feas_tol(self.lower[j]) * 10.0
                && self.x[j] <= self.upper[j] + feas_tol(self.upper[j]) * 10.0
        })
    }

    /// A cold phase-1 tableau with this LP's current structural bounds.
    fn rebuilt_cold(&self) -> Lp {
        let mut model = Model::new("cold");
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.m];
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, a) in col {
                rows[i].push((j, a / self.col_scale[j]));
            }
        }
        for j in 0..self.n {
            let sc = self.col_scale[j];
            model
                .add_variable(&format!("x{j}"), self.lower[j] * sc, self.upper[j] * sc, crate::milp::VarKind::Continuous)
                .expect("valid generated name");
            model.set_objective(j, self.cost[j] / sc).expect("finite cost");
        }
        for (i, terms) in rows.into_iter().enumerate() {
            let (sl, su) = (self.lower[self.n + i], self.upper[self.n + i]);
            let sense = if sl == su {
                Sense::Eq
            } else if sl == 0.0 {
                Sense::Le
            } else {
                Sense::Ge
            };
            model
                .add_constraint(&format!("r{i}"), terms, sense, self.b[i])
                .expect("valid generated row");
        }
        Lp::new(&model)
    }

    /// Rebuilds the tableau for a stored basis by Gauss-Jordan elimination
    /// on the original matrix. Returns false if the basis is singular.
    pub(crate) fn refactor(&mut self, snap: &Basis) -> bool {
        if snap.state.len() != self.ncols {
            return false;
        }
        let nc = self.ncols;
        let m = self.m;
        let mut tab = vec![0.0; m * nc];
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, a) in col {
                tab[i * nc + j] = a;
            }
        }
        for i in 0..m {
            tab[i * nc + self.n + i] = 1.0;
        }
        for (k, &(i, sign)) in self.art.iter().enumerate() {
            tab[i * nc + self.n + self.m + k] = sign;
        }
        let mut assigned = vec![false; m];
        let mut new_basis = vec![usize::MAX; m];
        for &q in &snap.basis {
            let mut best = None;
            let mut best_abs = 1e-10;
            for r in 0..m {
                if !assigned[r] && tab[r * nc + q].abs() > best_abs {
                    best_abs = tab[r * nc + q].abs();
                    best = Some(r);
                }
            }
            let Some(r) = best else { return false };
            assigned[r] = true;
            new_basis[r] = q;
            let inv = 1.0 / tab[r * nc + q];
            for k in 0..nc {
                tab[r * nc + k] *= inv;
            }
            let prow: Vec<(usize, f64)> = (0..nc)
                .filter(|&k| tab[r * nc + k] != 0.0)
                .map(|k| (k, tab[r * nc + k]))
                .collect();
            for i in 0..m {
                if i == r {
                    continue;
                }
                let f = tab[i * nc + q];
                if f != 0.0 {
                    for &(k, v) in &prow {
                        tab[i * nc + k] -= f * v;
                    }
                    tab[i * nc + q] = 0.0;
                }
            }
        }
        self.tab = tab;
        self.basis = new_basis;
        self.state = snap.state.clone();
        for j in 0..nc {
            if self.state[j] != VarState::Basic {
                self.x[j] = match self.state[j] {
                    VarState::Lower => self.lower[j],
                    VarState::Upper => self.upper[j],
                    _ => 0.0,
                };
            }
        }
        self.recompute_basics();
        true
    }

    /// Largest violation of the original rows at the current point.
    pub(crate) fn max_residual(&self) -> f64 {
        let mut act = vec![0.0; self.m];
        // residuals are measured against the largest term of each row
        let mut mag = vec![0.0f64; self.m];
        for (j, col) in self.cols.iter().enumerate() {
            let v = self.x[j].clamp(self.lower[j], self.upper[j]);
            for &(i, a) in col {
                act[i] += a * v;
                mag[i] = mag[i].max((a * v).abs());
            }
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.m {
            let (sl, su) = (self.lower[self.n + i], self.upper[self.n + i]);
            // a x + s = b with s in [sl, su]  <=>  b - su <= a x <= b - sl
            let lo = self.b[i] - su;
            let hi = self.b[i] - sl;
            let scale = 1.0 + self.b[i].abs().max(mag[i]);
            let v = if act[i] < lo { lo - act[i] } else if act[i] > hi { act[i] - hi } else { 0.0 };
            worst = worst.max(v / scale);
        }
        worst
    }

    /// Restores a clean tableau from the current basis.
    pub(crate) fn refresh(&mut self) -> bool {
        let snap = self.snapshot();
        self.refactor(&snap)
    }
}
