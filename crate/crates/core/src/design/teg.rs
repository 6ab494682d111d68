//! Per-trip transfer-expanded graphs.
//!
//! Vertex 0 is the trip origin, vertex 1 its destination, and vertex
//! `2 + (k - 1) * H + i` is hub `i` on layer `k` (`1 <= k <= K - 1`). A path
//! through layers `1..=k` uses exactly `k + 1` arcs, so every origin to
//! destination path respects the transfer limit by construction.

use crate::model::{arc_trip_cost, ArcId, DesignParameters, NetworkModel, Trip};
use crate::{Error, Result};

pub const ORIGIN: usize = 0;
pub const DESTINATION: usize = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct TegArc {
    pub from: usize,
    pub to: usize,
    pub cost: f64,
    pub original: ArcId,
    /// Position in [`NetworkModel::bus_arcs`] for copies of bus arcs.
    pub bus: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct TransferExpandedGraph {
    pub num_vertices: usize,
    pub arcs: Vec<TegArc>,
    pub transfer_limit: usize,
    num_hubs: usize,
}

impl TransferExpandedGraph {
    pub fn vertex(&self, layer: usize, hub_pos: usize) -> usize {
        debug_assert!(layer >= 1 && layer < self.transfer_limit);
        2 + (layer - 1) * self.num_hubs + hub_pos
    }

    /// Enumerates every origin to destination path as a list of arc indices.
    pub fn paths(&self) -> Vec<Vec<usize>> {
        let mut out_arcs = vec![Vec::new(); self.num_vertices];
        for (i, a) in self.arcs.iter().enumerate() {
            out_arcs[a.from].push(i);
        }
        let mut paths = Vec::new();
        let mut stack = vec![(ORIGIN, Vec::new())];
        while let Some((v, path)) = stack.pop() {
            if v == DESTINATION {
                paths.push(path);
                continue;
            }
            for &i in out_arcs[v].iter().rev() {
                let mut p = path.clone();
                p.push(i);
                stack.push((self.arcs[i].to, p));
            }
        }
        paths
    }
}

pub fn build_teg(
    trip: &Trip,
    network: &NetworkModel,
    params: &DesignParameters,
) -> Result<TransferExpandedGraph> {
    let k = params.transfer_limit;
    if k == 0 {
        return Err(Error::InvalidInput("transfer limit must be at least 1".into()));
    }
    let o = network.location_index(&trip.origin)?;
    let d = network.location_index(&trip.dest)?;
    let hubs = network.hubs();
    let h = hubs.len();
    let mut hub_pos = vec![usize::MAX; network.locations.len()];
    for (i, &loc) in hubs.iter().enumerate() {
        hub_pos[loc] = i;
    }
    let shuttle = |from: usize, to: usize| {
        network.shuttle_arc(from, to).ok_or_else(|| Error::MissingTravel {
            origin: network.location(from).id.clone(),
            dest: network.location(to).id.clone(),
        })
    };
    let mut g = TransferExpandedGraph {
        num_vertices: 2 + (k - 1) * h,
        arcs: Vec::new(),
        transfer_limit: k,
        num_hubs: h,
    };
    let mut push = |from: usize, to: usize, id: ArcId| {
        g.arcs.push(TegArc {
            from,
            to,
            cost: arc_trip_cost(network.arc(id), trip, params),
            original: id,
            bus: network.bus_arc_position(id),
        });
    };
    push(ORIGIN, DESTINATION, shuttle(o, d)?);
    if k >= 2 {
        let layer = |layer: usize, pos: usize| 2 + (layer - 1) * h + pos;
        for (i, &hub) in hubs.iter().enumerate() {
            push(ORIGIN, layer(1, i), shuttle(o, hub)?);
        }
        for kk in 1..k.saturating_sub(1) {
            for &id in network.hub_arcs() {
                let a = network.arc(id);
                push(layer(kk, hub_pos[a.origin]), layer(kk + 1, hub_pos[a.dest]), id);
            }
        }
        for kk in 1..k {
            for (i, &hub) in hubs.iter().enumerate() {
                push(layer(kk, i), DESTINATION, shuttle(hub, d)?);
            }
        }
    }
    Ok(g)
}
