//! Per-trip shortest-path subproblem on a transfer-expanded graph.

use super::teg::{TransferExpandedGraph, DESTINATION, ORIGIN};
use crate::flow::{min_cost_flow, FlowArc};

#[derive(Debug, Clone)]
pub struct SubproblemSolution {
    pub cost: f64,
    /// Flow on every graph arc.
    pub flow: Vec<f64>,
    /// Arc indices of the heaviest path in the flow decomposition; the unique
    /// path when the flow is integral.
    pub path: Vec<usize>,
    /// Capacity duals per graph arc (zero for arcs that are not bus copies).
    pub duals: Vec<f64>,
}

impl SubproblemSolution {
    /// Adds `sum of duals over copies` to `coef[bus position]`.
    pub fn accumulate_coefficients(&self, teg: &TransferExpandedGraph, coef: &mut [f64]) {
        for (a, mu) in teg.arcs.iter().zip(&self.duals) {
            if let Some(pos) = a.bus {
                coef[pos] += mu;
            }
        }
    }
}

/// Solves the relaxation where every copy of bus arc `a` has capacity
/// `z_hat[a]` and all other arcs are uncapacitated.
pub fn solve_subproblem(teg: &TransferExpandedGraph, z_hat: &[f64]) -> SubproblemSolution {
    let arcs: Vec<FlowArc> = teg
        .arcs
        .iter()
        .map(|a| FlowArc {
            from: a.from,
            to: a.to,
            capacity: a.bus.map_or(f64::INFINITY, |p| z_hat[p].clamp(0.0, 1.0)),
            cost: a.cost,
        })
        .collect();
    let sol = min_cost_flow(teg.num_vertices, &arcs, ORIGIN, DESTINATION, 1.0);
    debug_assert!((sol.sent - 1.0).abs() < 1e-9, "direct arc keeps the subproblem feasible");
    let duals = (0..arcs.len()).map(|i| sol.capacity_dual(&arcs, i)).collect();
    let path = heaviest_path(teg, &sol.flow);
    SubproblemSolution {
        cost: sol.cost,
        flow: sol.flow,
        path,
        duals,
    }
}

fn heaviest_path(teg: &TransferExpandedGraph, flow: &[f64]) -> Vec<usize> {
    let mut path = Vec::new();
    let mut v = ORIGIN;
    while v != DESTINATION {
        let next = teg
            .arcs
            .iter()
            .enumerate()
            .filter(|(i, a)| a.from == v && flow[*i] > 1e-12)
            .max_by(|(i, _), (j, _)| flow[*i].total_cmp(&flow[*j]).then(j.cmp(i)));
        match next {
            Some((i, a)) => {
                path.push(i);
                v = a.to;
            }
            None => break,
        }
    }
    path
}
