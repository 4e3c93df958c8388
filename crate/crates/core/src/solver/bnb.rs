//! Best-first branch-and-bound over binary variables.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::rc::Rc;
use std::time::Instant;

use super::simplex::{Basis, Lp, LpEnd};
use super::{lp_solution, SolveConfig, Solution, Status};
use crate::milp::Model;

const INT_TOL: f64 = 1e-6;
/// Gap below which a stopped search counts as proven optimal.
const EXACT_GAP: f64 = 1e-9;
/// Largest scaled row violation accepted from a warm-started node LP.
const NODE_RESIDUAL: f64 = 1e-7;
const CACHE_BYTES: usize = 256 << 20;

/// Relative gap `(incumbent - bound) / max(|incumbent|, 1e-9)`.
pub fn relative_gap(incumbent: f64, bound: f64) -> f64 {
    (incumbent - bound) / incumbent.abs().max(1e-9)
}

/// True when the incumbent is within `target` of the bound.
pub fn gap_reached(incumbent: f64, bound: f64, target: f64) -> bool {
    relative_gap(incumbent, bound) <= target
}

struct Node {
    id: usize,
    bound: f64,
    parent: Option<usize>,
    /// (variable, lower, upper) from the root, in branching order
    fixes: Vec<(usize, f64, f64)>,
    basis: Option<Rc<Basis>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap: smallest bound, then smallest id, on top
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

struct TableauCache {
    slots: VecDeque<(usize, Lp)>,
    capacity: usize,
}

impl TableauCache {
    fn new(bytes_each: usize) -> Self {
        TableauCache {
            slots: VecDeque::new(),
            capacity: (CACHE_BYTES / bytes_each.max(1)).clamp(2, 256),
        }
    }

    fn get(&mut self, id: usize) -> Option<Lp> {
        let k = self.slots.iter().position(|(i, _)| *i == id)?;
        let entry = self.slots.remove(k)?;
        let copy = entry.1.clone();
        self.slots.push_back(entry);
        Some(copy)
    }

    fn put(&mut self, id: usize, lp: Lp) {
        if self.slots.len() >= self.capacity {
            self.slots.pop_front();
        }
        self.slots.push_back((id, lp));
    }
}

fn most_fractional(values: &[f64], binaries: &[usize]) -> Option<usize> {
    let mut best = None;
    let mut best_frac = INT_TOL;
    for &j in binaries {
        let f = values[j] - values[j].floor();
        let frac = f.min(1.0 - f);
        if frac > best_frac {
            best_frac = frac;
            best = Some(j);
        }
    }
    best
}

/// Branch-and-bound with LP bounds from the bundled simplex.
pub fn solve_mip(model: &Model, config: &SolveConfig) -> Solution {
    let deadline = config.deadline();
    let binaries: Vec<usize> = model.binaries().collect();
    let target = config.gap();

    let mut root = Lp::new(model);
    let end = root.solve(deadline);
    let root_sol = lp_solution(&mut root, end, deadline);
    match root_sol.status {
        Status::Optimal => {}
        Status::TimeLimit => {
            return Solution {
                nodes: 1,
                ..Solution::failed(Status::TimeLimit, "time limit reached at the root")
            }
        }
        _ => return Solution { nodes: 1, ..root_sol },
    }
    let mut iterations = root.iterations;
    // template for rebuilding evicted tableaux: root bounds, fresh basis
    let template = root.clone();
    let mut cache = TableauCache::new(root.tableau_bytes());

    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut nodes = 1usize;
    let mut next_id = 1usize;
    let mut heap: BinaryHeap<Node> = BinaryHeap::new();

    let handle = |lp: Lp,
                      id: usize,
                      fixes: &[(usize, f64, f64)],
                      obj: f64,
                      values: Vec<f64>,
                      incumbent: &mut Option<(f64, Vec<f64>)>,
                      heap: &mut BinaryHeap<Node>,
                      cache: &mut TableauCache,
                      next_id: &mut usize| {
        if let Some((inc, _)) = incumbent {
            if obj >= *inc - EXACT_GAP * inc.abs().max(1.0) {
                return;
            }
        }
        match most_fractional(&values, &binaries) {
            None => {
                let mut vals = values;
                for &j in &binaries {
                    vals[j] = vals[j].round();
                }
                *incumbent = Some((obj, vals));
            }
            Some(j) => {
                let basis = Rc::new(lp.snapshot());
                cache.put(id, lp);
                let lo = model.variable(j).lower;
                let up = model.variable(j).upper;
                let mut down = fixes.to_vec();
                down.push((j, lo, 0.0));
                let mut upf = fixes.to_vec();
                upf.push((j, 1.0, up));
                for f in [down, upf] {
                    heap.push(Node {
                        id: *next_id,
                        bound: obj,
                        parent: Some(id),
                        fixes: f,
                        basis: Some(basis.clone()),
                    });
                    *next_id += 1;
                }
            }
        }
    };

    let root_values = root_sol.values.clone();
    handle(
        root,
        0,
        &[],
        root_sol.objective,
        root_values,
        &mut incumbent,
        &mut heap,
        &mut cache,
        &mut next_id,
    );

    let mut timed_out = false;
    let mut numerical = false;
    while let Some(node) = heap.peek() {
        let global = node.bound;
        if let Some((inc, _)) = &incumbent {
            if global >= *inc - EXACT_GAP * inc.abs().max(1.0) {
                heap.clear();
                break;
            }
            if target > 0.0 && gap_reached(*inc, global, target) {
                break;
            }
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            timed_out = true;
            break;
        }
        let node = heap.pop().expect("peeked");
        let mut lp = match node.parent.and_then(|p| cache.get(p)) {
            Some(lp) => lp,
            None => {
                let mut lp = template.clone();
                for &(j, lo, up) in &node.fixes {
                    lp.set_bounds(j, lo, up);
                }
                let ok = node.basis.as_ref().is_some_and(|b| lp.refactor(b));
                if !ok {
                    let mut cold = Lp::new(&fixed_copy(model, &node.fixes));
                    let end = cold.solve(deadline);
                    nodes += 1;
                    iterations += cold.iterations;
                    if end == LpEnd::Optimal {
                        let obj = cold.objective();
                        let values = cold.values();
                        handle(
                            cold, node.id, &node.fixes, obj, values, &mut incumbent, &mut heap,
                            &mut cache, &mut next_id,
                        );
                    } else if end == LpEnd::TimeLimit {
                        timed_out = true;
                        break;
                    }
                    continue;
                }
                lp
            }
        };
        for &(j, lo, up) in &node.fixes {
            lp.set_bounds(j, lo, up);
        }
        let before = lp.iterations;
        let mut end = lp.dual(deadline);
        iterations += lp.iterations.saturating_sub(before);
        nodes += 1;
        let suspect = match end {
            LpEnd::Optimal => lp.max_residual() > NODE_RESIDUAL,
            LpEnd::Unbounded | LpEnd::Failed => true,
            _ => false,
        };
        if suspect {
            log::debug!("node {} re-solved cold after {:?}", node.id, end);
            let mut cold = Lp::new(&fixed_copy(model, &node.fixes));
            end = cold.solve(deadline);
            iterations += cold.iterations;
            if end == LpEnd::Optimal && cold.max_residual() > NODE_RESIDUAL {
                end = LpEnd::Failed;
            }
            lp = cold;
        }
        match end {
            LpEnd::Optimal => {
                let obj = lp.objective();
                let values = lp.values();
                handle(
                    lp, node.id, &node.fixes, obj, values, &mut incumbent, &mut heap, &mut cache,
                    &mut next_id,
                );
            }
            LpEnd::Infeasible => {}
            LpEnd::TimeLimit => {
                timed_out = true;
                break;
            }
            LpEnd::Unbounded | LpEnd::Failed => {
                numerical = true;
                break;
            }
        }
    }

    let open_bound = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    match incumbent {
        None => {
            let status = if timed_out {
                Status::TimeLimit
            } else if numerical {
                Status::Error
            } else {
                Status::Infeasible
            };
            Solution {
                status,
                objective: f64::NAN,
                best_bound: if timed_out { open_bound } else { f64::NAN },
                values: Vec::new(),
                nodes,
                iterations,
                message: Some(
                    match status {
                        Status::TimeLimit => "time limit reached before any integer solution",
                        Status::Error => "numerical failure in a node LP",
                        _ => "no integer feasible point",
                    }
                    .to_string(),
                ),
            }
        }
        Some((obj, values)) => {
            let (objective, values) = polish(model, &binaries, obj, values, deadline);
            let bound = open_bound.min(objective);
            let status = if numerical {
                Status::Error
            } else if timed_out {
                Status::TimeLimit
            } else if heap.is_empty() || relative_gap(objective, bound) <= EXACT_GAP {
                Status::Optimal
            } else {
                Status::GapReached
            };
            Solution {
                status,
                objective,
                best_bound: if heap.is_empty() { objective } else { bound },
                values,
                nodes,
                iterations,
                message: None,
            }
        }
    }
}

fn fixed_copy(model: &Model, fixes: &[(usize, f64, f64)]) -> Model {
    let mut m = model.clone();
    for &(j, lo, up) in fixes {
        m.set_bounds_unchecked(j, lo, up);
    }
    m
}

/// Re-solves the LP with all binaries fixed at the incumbent for an accurate
/// continuous part.
fn polish(
    model: &Model,
    binaries: &[usize],
    obj: f64,
    values: Vec<f64>,
    deadline: Option<Instant>,
) -> (f64, Vec<f64>) {
    let mut m = model.clone();
    for &j in binaries {
        let v = values[j];
        m.set_bounds_unchecked(j, v, v);
    }
    let mut lp = Lp::new(&m);
    if lp.solve(deadline) == LpEnd::Optimal && lp.max_residual() <= 1e-9 {
        let polished = lp.objective();
        if polished <= obj + 1e-7 * obj.abs().max(1.0) {
            let mut vals = lp.values();
            for &j in binaries {
                vals[j] = values[j];
            }
            return (polished, vals);
        }
    }
    (obj, values)
}
