//! Brute-force oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

pub mod dispatch;
pub mod rideshare;

use std::collections::BTreeMap;

use odmts::model::{arc_fixed_cost, arc_trip_cost, ArcId, DesignParameters, Mode, NetworkModel, Trip};

/// All bus designs satisfying frequency balance at every hub and at most one
/// frequency per ordered hub pair, as open flags in `bus_arcs` order.
pub fn enumerate_designs(network: &NetworkModel) -> Vec<Vec<bool>> {
    let bus = network.bus_arcs();
    let mut pairs: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (pos, &id) in bus.iter().enumerate() {
        let a = network.arc(id);
        pairs.entry((a.origin, a.dest)).or_default().push(pos);
    }
    let pairs: Vec<((usize, usize), Vec<usize>)> = pairs.into_iter().collect();
    // hubs to check after assigning pair i
    let mut last = BTreeMap::new();
    for (i, ((o, d), _)) in pairs.iter().enumerate() {
        last.insert(*o, i);
        last.insert(*d, i);
    }
    let mut check_after: Vec<Vec<usize>> = vec![Vec::new(); pairs.len()];
    for (hub, i) in last {
        check_after[i].push(hub);
    }
    let mut out = Vec::new();
    let mut open = vec![false; bus.len()];
    fn balanced(network: &NetworkModel, open: &[bool], hub: usize) -> bool {
        let mut net = 0i64;
        for (pos, &id) in network.bus_arcs().iter().enumerate() {
            if open[pos] {
                let a = network.arc(id);
                let f = i64::from(a.frequency.unwrap());
                if a.origin == hub {
                    net += f;
                }
                if a.dest == hub {
                    net -= f;
                }
            }
        }
        net == 0
    }
    fn rec(
        i: usize,
        pairs: &[((usize, usize), Vec<usize>)],
        check_after: &[Vec<usize>],
        network: &NetworkModel,
        open: &mut Vec<bool>,
        out: &mut Vec<Vec<bool>>,
    ) {
        if i == pairs.len() {
            out.push(open.clone());
            return;
        }
        let choices: Vec<Option<usize>> =
            std::iter::once(None).chain(pairs[i].1.iter().map(|&p| Some(p))).collect();
        for c in choices {
            if let Some(p) = c {
                open[p] = true;
            }
            if check_after[i].iter().all(|&h| balanced(network, open, h)) {
                rec(i + 1, pairs, check_after, network, open, out);
            }
            if let Some(p) = c {
                open[p] = false;
            }
        }
    }
    rec(0, &pairs, &check_after, network, &mut open, &mut out);
    out
}

#[derive(Debug, Clone)]
pub struct Walk {
    pub arcs: Vec<ArcId>,
    pub cost: f64,
    /// Bus arc positions used.
    pub bus: Vec<usize>,
}

/// Every arc sequence from the trip origin to its destination with at most
/// `k` arcs, using shuttle arcs origin -> hub, hub -> destination and
/// origin -> destination, plus every bus and rail arc.
pub fn trip_walks(network: &NetworkModel, trip: &Trip, params: &DesignParameters) -> Vec<Walk> {
    let o = network.location_index(&trip.origin).unwrap();
    let d = network.location_index(&trip.dest).unwrap();
    let allowed = |id: ArcId| {
        let a = network.arc(id);
        match a.mode {
            Mode::Shuttle => {
                (a.origin == o && (a.dest == d || network.is_hub(a.dest)))
                    || (network.is_hub(a.origin) && a.dest == d)
            }
            _ => true,
        }
    };
    let arcs: Vec<ArcId> = (0..network.arcs.len()).map(ArcId).filter(|&id| allowed(id)).collect();
    let mut walks = Vec::new();
    let mut stack = vec![(o, Vec::<ArcId>::new())];
    while let Some((v, path)) = stack.pop() {
        if v == d && !path.is_empty() {
            walks.push(path);
            continue;
        }
        if path.len() == params.transfer_limit {
            continue;
        }
        for &id in &arcs {
            let a = network.arc(id);
            if a.origin == v {
                let mut p = path.clone();
                p.push(id);
                stack.push((a.dest, p));
            }
        }
    }
    walks
        .into_iter()
        .map(|arcs| Walk {
            cost: arcs.iter().map(|&id| arc_trip_cost(network.arc(id), trip, params)).sum(),
            bus: arcs.iter().filter_map(|&id| network.bus_arc_position(id)).collect(),
            arcs,
        })
        .collect()
}

/// Cheapest walk usable under `open`.
pub fn best_walk_cost(walks: &[Walk], open: &[bool]) -> f64 {
    walks
        .iter()
        .filter(|w| w.bus.iter().all(|&p| open[p]))
        .map(|w| w.cost)
        .fold(f64::INFINITY, f64::min)
}

pub fn fixed_cost(network: &NetworkModel, params: &DesignParameters, open: &[bool]) -> f64 {
    network
        .bus_arcs()
        .iter()
        .zip(open)
        .filter(|(_, &o)| o)
        .map(|(&id, _)| arc_fixed_cost(network.arc(id), params).unwrap())
        .sum()
}

/// Exhaustive optimum of the design problem and the number of designs tried.
pub fn design_oracle(network: &NetworkModel, trips: &[Trip], params: &DesignParameters) -> (f64, usize) {
    let walks: Vec<Vec<Walk>> = trips.iter().map(|t| trip_walks(network, t, params)).collect();
    let designs = enumerate_designs(network);
    let best = designs
        .iter()
        .map(|open| {
            fixed_cost(network, params, open)
                + walks.iter().map(|w| best_walk_cost(w, open)).sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min);
    (best, designs.len())
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

/// All set partitions of `0..n` as block lists (restricted growth strings).
pub fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(i: usize, n: usize, blocks: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == n {
            out.push(blocks.clone());
            return;
        }
        for b in 0..blocks.len() {
            blocks[b].push(i);
            rec(i + 1, n, blocks, out);
            blocks[b].pop();
        }
        blocks.push(vec![i]);
        rec(i + 1, n, blocks, out);
        blocks.pop();
    }
    let mut out = Vec::new();
    rec(0, n, &mut Vec::new(), &mut out);
    out
}
