use super::ShuttleRoute;
use crate::model::NetworkModel;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FleetPlan {
    pub size: usize,
    /// Route indices served by each shuttle, in service order.
    pub chains: Vec<Vec<usize>>,
}

/// Minimum number of shuttles covering all routes. A shuttle can serve `b`
/// after `a` if it can drive from the end of `a` to the start of `b` before
/// `b` starts. Solved as a minimum path cover of the compatibility DAG.
pub fn size_fleet(routes: &[ShuttleRoute], network: &NetworkModel) -> FleetPlan {
    let chains = min_chain_cover(routes.len(), |a, b| {
        let (ra, rb) = (&routes[a], &routes[b]);
        a != b
            && ra.end_time_s + network.matrix.time(ra.end_location(), rb.start_location())
                <= rb.start_time_s + 1e-9
    });
    FleetPlan {
        size: chains.len(),
        chains,
    }
}

/// Minimum path cover of a DAG given by `edge(a, b)`: vertex count minus a
/// maximum bipartite matching (augmenting paths, vertices in index order).
pub fn min_chain_cover(n: usize, edge: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let adj: Vec<Vec<usize>> = (0..n).map(|a| (0..n).filter(|&b| edge(a, b)).collect()).collect();
    let mut pred = vec![usize::MAX; n];
    let mut succ = vec![usize::MAX; n];
    let mut seen = vec![usize::MAX; n];
    for a in 0..n {
        augment(a, a, &adj, &mut pred, &mut succ, &mut seen);
    }
    let mut chains = Vec::new();
    for start in 0..n {
        if pred[start] != usize::MAX {
            continue;
        }
        let mut chain = vec![start];
        let mut v = start;
        while succ[v] != usize::MAX {
            v = succ[v];
            chain.push(v);
        }
        chains.push(chain);
    }
    chains
}

fn augment(
    root: usize,
    a: usize,
    adj: &[Vec<usize>],
    pred: &mut [usize],
    succ: &mut [usize],
    seen: &mut [usize],
) -> bool {
    for &b in &adj[a] {
        if seen[b] == root {
            continue;
        }
        seen[b] = root;
        if pred[b] == usize::MAX || augment(root, pred[b], adj, pred, succ, seen) {
            pred[b] = a;
            succ[a] = b;
            return true;
        }
    }
    false
}
