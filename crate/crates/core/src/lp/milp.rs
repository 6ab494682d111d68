//! Best-first branch and bound with diving and lazy constraints.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::simplex::solve_with_bounds;
use super::{Constraint, LinearProgram, LpStatus};

#[derive(Debug, Clone)]
pub struct MilpProblem {
    pub lp: LinearProgram,
    pub integer: Vec<bool>,
}

impl MilpProblem {
    pub fn new(lp: LinearProgram, integer: Vec<bool>) -> Self {
        assert_eq!(lp.num_vars(), integer.len());
        MilpProblem { lp, integer }
    }

    /// All variables integral.
    pub fn pure(lp: LinearProgram) -> Self {
        let n = lp.num_vars();
        MilpProblem::new(lp, vec![true; n])
    }
}

#[derive(Debug, Clone)]
pub struct MilpOptions {
    pub max_nodes: usize,
    pub rel_gap: f64,
    pub abs_gap: f64,
    pub int_tol: f64,
    /// Cut rounds at fractional LP points, per node.
    pub fractional_rounds: usize,
}

impl Default for MilpOptions {
    fn default() -> Self {
        MilpOptions {
            max_nodes: 200_000,
            rel_gap: 1e-9,
            abs_gap: 1e-7,
            int_tol: 1e-6,
            fractional_rounds: 3,
        }
    }
}

/// Progress information handed to a [`Separator`].
#[derive(Debug, Clone, Copy)]
pub struct SearchState {
    /// Lower bound over the whole tree before the current LP.
    pub global_bound: f64,
    /// LP value at the point being separated.
    pub lp_value: f64,
    pub incumbent: Option<f64>,
    pub nodes: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Separation {
    /// Rows violated by the point; they are added to every node.
    pub cuts: Vec<Constraint>,
    /// A feasible solution found while separating, with its objective.
    pub feasible: Option<(Vec<f64>, f64)>,
}

pub trait Separator {
    /// Called on LP solutions. `integral` tells whether all integer variables
    /// already take integer values; such points are accepted only when no cut
    /// is returned.
    fn separate(&mut self, x: &[f64], integral: bool, state: &SearchState) -> Separation;
}

pub struct NoSeparator;

impl Separator for NoSeparator {
    fn separate(&mut self, _: &[f64], _: bool, _: &SearchState) -> Separation {
        Separation::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Stopped at the node limit or left a node LP unsolved; `x` is the best
    /// solution found, if any.
    NodeLimit,
}

#[derive(Debug, Clone)]
pub struct MilpResult {
    pub status: MilpStatus,
    pub x: Option<Vec<f64>>,
    pub objective: f64,
    pub bound: f64,
    pub nodes: usize,
    pub cuts: usize,
}

struct Node {
    lower: Vec<f64>,
    upper: Vec<f64>,
    bound: f64,
    depth: usize,
    seq: usize,
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
    // BinaryHeap is a max-heap: smaller bound first, then deeper, then older.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

struct Incumbent {
    x: Vec<f64>,
    value: f64,
}

pub fn solve_milp(
    problem: &MilpProblem,
    separator: &mut dyn Separator,
    options: &MilpOptions,
) -> MilpResult {
    let lp = &problem.lp;
    let mut cuts: Vec<Constraint> = Vec::new();
    let mut incumbent: Option<Incumbent> = None;
    let mut heap = BinaryHeap::new();
    let mut seq = 0;
    let mut nodes = 0;
    let mut dive: Option<Node> = Some(Node {
        lower: lp.lower.clone(),
        upper: lp.upper.clone(),
        bound: f64::NEG_INFINITY,
        depth: 0,
        seq,
    });
    let cutoff = |inc: &Option<Incumbent>| match inc {
        Some(i) => i.value - options.abs_gap.max(options.rel_gap * i.value.abs()),
        None => f64::INFINITY,
    };
    let offer = |inc: &mut Option<Incumbent>, x: Vec<f64>, value: f64| {
        if inc.as_ref().map_or(true, |i| value < i.value - 1e-12) {
            *inc = Some(Incumbent { x, value });
        }
    };
    let mut limit_hit = false;
    let mut unsolved_bound = f64::INFINITY;

    while let Some(node) = dive.take().or_else(|| heap.pop()) {
        if node.bound >= cutoff(&incumbent) {
            continue;
        }
        if nodes >= options.max_nodes {
            heap.push(node);
            limit_hit = true;
            break;
        }
        nodes += 1;
        let open_bound = heap
            .peek()
            .map_or(f64::INFINITY, |n: &Node| n.bound)
            .min(node.bound);
        let mut rounds = 0;
        let solution = loop {
            let s = solve_with_bounds(lp, &node.lower, &node.upper, &cuts);
            match s.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => break None,
                LpStatus::Unbounded => {
                    return MilpResult {
                        status: MilpStatus::Unbounded,
                        x: None,
                        objective: f64::NEG_INFINITY,
                        bound: f64::NEG_INFINITY,
                        nodes,
                        cuts: cuts.len(),
                    }
                }
                LpStatus::IterationLimit => {
                    log::warn!("LP iteration limit at node {nodes}; bound left open");
                    unsolved_bound = unsolved_bound.min(node.bound);
                    limit_hit = true;
                    break None;
                }
            }
            if s.objective >= cutoff(&incumbent) {
                break None;
            }
            let integral = is_integral(&s.x, &problem.integer, options.int_tol);
            if !integral && rounds >= options.fractional_rounds {
                break Some((s, false));
            }
            let state = SearchState {
                global_bound: open_bound.max(f64::NEG_INFINITY).min(s.objective),
                lp_value: s.objective,
                incumbent: incumbent.as_ref().map(|i| i.value),
                nodes,
            };
            let sep = separator.separate(&s.x, integral, &state);
            if let Some((x, v)) = sep.feasible {
                offer(&mut incumbent, x, v);
            }
            if sep.cuts.is_empty() {
                break Some((s, integral));
            }
            cuts.extend(sep.cuts);
            rounds += 1;
        };
        let Some((s, integral)) = solution else {
            continue;
        };
        if integral {
            let mut x = s.x;
            for (v, &int) in x.iter_mut().zip(&problem.integer) {
                if int {
                    *v = v.round();
                }
            }
            let value = lp.objective_value(&x);
            offer(&mut incumbent, x, value);
            continue;
        }
        let j = branching_variable(&s.x, &problem.integer, options.int_tol);
        let v = s.x[j];
        let mut down = Node {
            lower: node.lower.clone(),
            upper: node.upper.clone(),
            bound: s.objective,
            depth: node.depth + 1,
            seq: 0,
        };
        down.upper[j] = v.floor();
        let mut up = Node {
            lower: node.lower,
            upper: node.upper,
            bound: s.objective,
            depth: node.depth + 1,
            seq: 0,
        };
        up.lower[j] = v.ceil();
        seq += 1;
        down.seq = seq;
        seq += 1;
        up.seq = seq;
        let (first, second) = if v - v.floor() >= 0.5 { (up, down) } else { (down, up) };
        heap.push(second);
        dive = Some(first);
    }

    let best_open = heap.iter().map(|n| n.bound).fold(unsolved_bound, f64::min);
    match incumbent {
        Some(inc) => MilpResult {
            status: if limit_hit { MilpStatus::NodeLimit } else { MilpStatus::Optimal },
            bound: if limit_hit { best_open.min(inc.value) } else { inc.value },
            objective: inc.value,
            x: Some(inc.x),
            nodes,
            cuts: cuts.len(),
        },
        None => MilpResult {
            status: if limit_hit { MilpStatus::NodeLimit } else { MilpStatus::Infeasible },
            x: None,
            objective: f64::INFINITY,
            bound: if limit_hit { best_open } else { f64::INFINITY },
            nodes,
            cuts: cuts.len(),
        },
    }
}

fn is_integral(x: &[f64], integer: &[bool], tol: f64) -> bool {
    x.iter()
        .zip(integer)
        .all(|(v, &int)| !int || (v - v.round()).abs() <= tol)
}

/// Most fractional integer variable, lowest index on ties.
fn branching_variable(x: &[f64], integer: &[bool], tol: f64) -> usize {
    let mut best = usize::MAX;
    let mut best_frac = tol;
    for (j, (&v, &int)) in x.iter().zip(integer).enumerate() {
        if !int {
            continue;
        }
        let frac = (v - v.floor()).min(v.ceil() - v);
        if frac > best_frac + 1e-12 {
            best_frac = frac;
            best = j;
        }
    }
    debug_assert!(best != usize::MAX);
    best
}
