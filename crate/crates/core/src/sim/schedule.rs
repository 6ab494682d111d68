use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::design::DesignSolution;
use crate::model::{ArcId, DesignParameters, Mode, NetworkModel};

/// A fixed route served at even headways. Run `k` leaves the first stop at
/// `offset_s + k * headway_s`; a cyclic line returns to its first stop.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Line {
    pub name: String,
    pub mode: Mode,
    pub arcs: Vec<ArcId>,
    pub cyclic: bool,
    pub headway_s: f64,
    pub offset_s: f64,
    /// Vehicles needed to keep the headway over one full round.
    pub vehicles: u32,
}

impl Line {
    /// Offsets from the first departure to every stop of a run.
    pub fn stop_offsets(&self, network: &NetworkModel) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.arcs.len() + 1);
        let mut t = 0.0;
        out.push(t);
        for &a in &self.arcs {
            t += network.arc(a).travel_time_s;
            out.push(t);
        }
        out
    }

    pub fn round_trip_s(&self, network: &NetworkModel) -> f64 {
        let one_way: f64 = self.arcs.iter().map(|&a| network.arc(a).travel_time_s).sum();
        if self.cyclic {
            one_way
        } else {
            2.0 * one_way
        }
    }
}

fn vehicles_for(round_s: f64, headway_s: f64) -> u32 {
    ((round_s / headway_s) - 1e-9).ceil().max(1.0) as u32
}

fn offset(rng: &mut ChaCha8Rng, headway_s: f64, synchronized: bool) -> f64 {
    if synchronized {
        0.0
    } else {
        rng.gen_range(0.0..headway_s)
    }
}

/// Groups the open bus arcs into cyclic lines by decomposing the
/// frequency-weighted circulation into cycles.
pub fn bus_lines(
    design: &DesignSolution,
    network: &NetworkModel,
    params: &DesignParameters,
    seed: u64,
    synchronized: bool,
) -> Vec<Line> {
    let mut residual: BTreeMap<ArcId, u32> = design
        .open_bus_arcs
        .iter()
        .map(|&a| (a, network.arc(a).frequency.unwrap_or(0)))
        .filter(|&(_, f)| f > 0)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xB05);
    let mut lines = Vec::new();
    while let Some((&start, _)) = residual.iter().find(|(_, &f)| f > 0) {
        let home = network.arc(start).origin;
        let mut walk = vec![start];
        let mut nodes = vec![home];
        let cycle = loop {
            let at = network.arc(*walk.last().expect("walk is never empty")).dest;
            if let Some(pos) = nodes.iter().position(|&v| v == at) {
                break walk.split_off(pos);
            }
            nodes.push(at);
            let next = residual
                .iter()
                .filter(|(&a, &f)| f > 0 && network.arc(a).origin == at)
                .min_by_key(|(&a, _)| (network.arc(a).dest != home, a))
                .map(|(&a, _)| a);
            match next {
                Some(a) => walk.push(a),
                // frequencies do not balance here; run the open walk as is
                None => break std::mem::take(&mut walk),
            }
        };
        let freq = cycle.iter().map(|a| residual[a]).min().unwrap_or(1);
        for a in &cycle {
            *residual.get_mut(a).expect("cycle arcs are open") -= freq;
        }
        let headway_s = params.horizon_s / f64::from(freq);
        let names: Vec<&str> = std::iter::once(network.arc(cycle[0]).origin)
            .chain(cycle.iter().map(|&a| network.arc(a).dest))
            .map(|v| network.location(v).id.as_str())
            .collect();
        let mut line = Line {
            name: format!("bus:{}", names.join("-")),
            mode: Mode::Bus,
            arcs: cycle,
            cyclic: true,
            headway_s,
            offset_s: offset(&mut rng, headway_s, synchronized),
            vehicles: 1,
        };
        line.vehicles = vehicles_for(line.round_trip_s(network), headway_s);
        lines.push(line);
    }
    lines
}

/// Both directions of every rail line, each with its own offset.
pub fn rail_lines(network: &NetworkModel, params: &DesignParameters, seed: u64, synchronized: bool) -> Vec<Line> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7A11);
    let mut lines = Vec::new();
    for rl in &network.rail_lines {
        for (dir, stations) in [("+", rl.stations.clone()), ("-", rl.stations.iter().rev().copied().collect())] {
            let arcs: Vec<ArcId> = stations
                .windows(2)
                .filter_map(|w| {
                    network
                        .arcs
                        .iter()
                        .find(|a| a.mode == Mode::Rail && a.origin == w[0] && a.dest == w[1])
                        .map(|a| a.id)
                })
                .collect();
            if arcs.is_empty() {
                continue;
            }
            let freq = network.arc(arcs[0]).frequency.unwrap_or(1).max(1);
            let headway_s = params.horizon_s / f64::from(freq);
            let mut line = Line {
                name: format!("rail:{}{}", rl.name, dir),
                mode: Mode::Rail,
                arcs,
                cyclic: false,
                headway_s,
                offset_s: offset(&mut rng, headway_s, synchronized),
                vehicles: 1,
            };
            line.vehicles = vehicles_for(line.round_trip_s(network), headway_s);
            lines.push(line);
        }
    }
    lines
}
