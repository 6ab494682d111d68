use std::collections::HashMap;

use super::{ShuttleRequest, ShuttleRoute};
use crate::lp::{solve_milp, Constraint, LinearProgram, MilpOptions, MilpProblem, NoSeparator, Sense};

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionResult {
    /// Indices into the route pool, ascending.
    pub selected: Vec<usize>,
    pub cost: f64,
}

/// Minimum-cost selection of routes covering every request exactly once.
///
/// Requests linked by shared routes form independent components; each
/// component with a shared route is solved as its own integer program.
/// Every request needs a singleton route in `routes`.
pub fn solve_set_partitioning(requests: &[&ShuttleRequest], routes: &[ShuttleRoute]) -> PartitionResult {
    let local: HashMap<usize, usize> = requests.iter().enumerate().map(|(i, r)| (r.id, i)).collect();
    let mut dsu = Dsu::new(requests.len());
    for r in routes {
        let first = local[&r.requests[0]];
        for id in &r.requests[1..] {
            dsu.union(first, local[id]);
        }
    }
    let mut components: HashMap<usize, Vec<usize>> = HashMap::new();
    for (j, r) in routes.iter().enumerate() {
        components.entry(dsu.find(local[&r.requests[0]])).or_default().push(j);
    }
    let mut roots: Vec<usize> = components.keys().copied().collect();
    roots.sort_unstable();
    let mut selected = Vec::new();
    for root in roots {
        let pool = &components[&root];
        if pool.iter().all(|&j| routes[j].requests.len() == 1) {
            selected.extend(pool.iter().copied());
            continue;
        }
        selected.extend(solve_component(pool, routes, &local));
    }
    selected.sort_unstable();
    let cost = selected.iter().map(|&j| routes[j].cost).sum();
    PartitionResult { selected, cost }
}

fn solve_component(pool: &[usize], routes: &[ShuttleRoute], local: &HashMap<usize, usize>) -> Vec<usize> {
    let mut rows: HashMap<usize, Vec<(usize, f64)>> = HashMap::new();
    let mut lp = LinearProgram::new(pool.len());
    for (k, &j) in pool.iter().enumerate() {
        lp.objective[k] = routes[j].cost;
        lp.upper[k] = 1.0;
        for id in &routes[j].requests {
            rows.entry(local[id]).or_default().push((k, 1.0));
        }
    }
    let mut keys: Vec<usize> = rows.keys().copied().collect();
    keys.sort_unstable();
    for key in keys {
        lp.add(Constraint::new(rows.remove(&key).expect("key"), Sense::Eq, 1.0));
    }
    let r = solve_milp(&MilpProblem::pure(lp), &mut NoSeparator, &MilpOptions::default());
    let x = r.x.expect("singleton routes make every component feasible");
    pool.iter()
        .zip(&x)
        .filter(|(_, &v)| v > 0.5)
        .map(|(&j, _)| j)
        .collect()
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}
