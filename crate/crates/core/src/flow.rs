//! Successive-shortest-path minimum-cost flow with dual potentials.

use std::collections::VecDeque;

const EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowArc {
    pub from: usize,
    pub to: usize,
    /// May be `f64::INFINITY`.
    pub capacity: f64,
    pub cost: f64,
}

#[derive(Debug, Clone)]
pub struct FlowSolution {
    pub flow: Vec<f64>,
    pub cost: f64,
    /// Amount actually routed; less than requested if the sink is cut off.
    pub sent: f64,
    /// Node potentials `pi` with `cost(a) - (pi[to] - pi[from]) >= 0` on every
    /// arc that still has residual capacity.
    pub potential: Vec<f64>,
}

impl FlowSolution {
    /// Dual of the capacity row of arc `i`: `min(0, reduced cost)`.
    pub fn capacity_dual(&self, arcs: &[FlowArc], i: usize) -> f64 {
        let a = arcs[i];
        if a.capacity.is_infinite() {
            return 0.0;
        }
        let rc = a.cost - (self.potential[a.to] - self.potential[a.from]);
        if rc < 0.0 {
            rc
        } else {
            0.0
        }
    }
}

struct Residual {
    head: Vec<usize>,
    cap: Vec<f64>,
    cost: Vec<f64>,
    out: Vec<Vec<usize>>,
}

impl Residual {
    fn new(n: usize, arcs: &[FlowArc]) -> Self {
        let mut r = Residual {
            head: Vec::with_capacity(2 * arcs.len()),
            cap: Vec::with_capacity(2 * arcs.len()),
            cost: Vec::with_capacity(2 * arcs.len()),
            out: vec![Vec::new(); n],
        };
        for a in arcs {
            r.out[a.from].push(r.head.len());
            r.head.push(a.to);
            r.cap.push(a.capacity);
            r.cost.push(a.cost);
            r.out[a.to].push(r.head.len());
            r.head.push(a.from);
            r.cap.push(0.0);
            r.cost.push(-a.cost);
        }
        r
    }

    /// Bellman-Ford (queue based) from `s`; returns distances and parent edges.
    fn shortest(&self, s: usize) -> (Vec<f64>, Vec<usize>) {
        let n = self.out.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut parent = vec![usize::MAX; n];
        let mut queued = vec![false; n];
        let mut queue = VecDeque::new();
        dist[s] = 0.0;
        queue.push_back(s);
        queued[s] = true;
        while let Some(u) = queue.pop_front() {
            queued[u] = false;
            for &e in &self.out[u] {
                if self.cap[e] <= EPS {
                    continue;
                }
                let v = self.head[e];
                let nd = dist[u] + self.cost[e];
                if nd < dist[v] - 1e-12 * (1.0 + nd.abs()) {
                    dist[v] = nd;
                    parent[v] = e;
                    if !queued[v] {
                        queued[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        (dist, parent)
    }

    fn tail(&self, e: usize) -> usize {
        self.head[e ^ 1]
    }
}

/// Sends up to `amount` units from `source` to `sink` at minimum cost.
///
/// Costs may be negative as long as there is no negative cycle.
pub fn min_cost_flow(
    n: usize,
    arcs: &[FlowArc],
    source: usize,
    sink: usize,
    amount: f64,
) -> FlowSolution {
    let mut r = Residual::new(n, arcs);
    let mut sent = 0.0;
    while amount - sent > EPS {
        let (dist, parent) = r.shortest(source);
        if dist[sink].is_infinite() {
            break;
        }
        let mut push = amount - sent;
        let mut v = sink;
        while v != source {
            let e = parent[v];
            push = push.min(r.cap[e]);
            v = r.tail(e);
        }
        let mut v = sink;
        while v != source {
            let e = parent[v];
            r.cap[e] -= push;
            r.cap[e ^ 1] += push;
            v = r.tail(e);
        }
        sent += push;
    }
    let flow: Vec<f64> = (0..arcs.len()).map(|i| r.cap[2 * i + 1]).collect();
    let cost = flow.iter().zip(arcs).map(|(f, a)| f * a.cost).sum();
    let potential = potentials(&r, source);
    FlowSolution {
        flow,
        cost,
        sent,
        potential,
    }
}

/// Shortest residual distances for nodes reachable from `source`. Every other
/// node gets the smallest potential that keeps its outgoing residual arcs
/// dual feasible, i.e. `max(pi[v] - cost)` over residual paths into the
/// reachable set. This keeps capacity duals on closed arcs as small as
/// possible in magnitude.
fn potentials(r: &Residual, source: usize) -> Vec<f64> {
    let n = r.out.len();
    let (dist, _) = r.shortest(source);
    let reached: Vec<bool> = dist.iter().map(|d| d.is_finite()).collect();
    let mut q: Vec<f64> = dist.iter().map(|&d| if d.is_finite() { -d } else { f64::INFINITY }).collect();
    for _ in 0..n {
        let mut changed = false;
        for u in 0..n {
            if reached[u] {
                continue;
            }
            for &e in &r.out[u] {
                if r.cap[e] <= EPS {
                    continue;
                }
                let cand = r.cost[e] + q[r.head[e]];
                if cand < q[u] - 1e-12 * (1.0 + cand.abs()) {
                    q[u] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    q.iter()
        .map(|&v| if v.is_finite() { -v } else { 0.0 })
        .collect()
}
