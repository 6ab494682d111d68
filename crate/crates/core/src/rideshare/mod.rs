//! Offline ridesharing and fleet sizing for the shuttle legs of a design.

mod fleet;
mod io;
mod partition;
mod routes;

use std::collections::{BTreeMap, HashMap};

pub use fleet::{min_chain_cover, size_fleet, FleetPlan};
pub use io::{write_fleet, write_routes};
pub use partition::{solve_set_partitioning, PartitionResult};
pub use routes::{build_route, enumerate_routes, singleton_route};

use crate::design::{DesignSolution, TripPath};
use crate::model::{DesignParameters, Mode, NetworkModel, Trip};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RequestClass {
    /// Travelling to the hub at this location index.
    ToHub(usize),
    /// Leaving from the hub at this location index.
    FromHub(usize),
    Direct,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShuttleRequest {
    pub id: usize,
    pub trip_id: String,
    /// Passenger number within the trip, from zero.
    pub passenger: u32,
    /// Index of the leg within the trip path.
    pub leg: usize,
    pub origin: usize,
    pub dest: usize,
    pub request_time_s: f64,
    pub class: RequestClass,
}

#[derive(Debug, Clone)]
pub struct RideshareConfig {
    pub capacity: u32,
    pub window_s: f64,
    pub rho: f64,
    /// Per-mile shuttle cost for route costs; the design estimate if unset.
    pub cost_per_mile: Option<f64>,
}

impl Default for RideshareConfig {
    fn default() -> Self {
        RideshareConfig {
            capacity: 4,
            window_s: 30.0,
            rho: 1.5,
            cost_per_mile: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stop {
    pub location: usize,
    pub time_s: f64,
    pub pickups: Vec<usize>,
    pub dropoffs: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShuttleRoute {
    pub class: RequestClass,
    /// Request ids, ascending.
    pub requests: Vec<usize>,
    pub stops: Vec<Stop>,
    pub start_time_s: f64,
    pub end_time_s: f64,
    pub miles: f64,
    pub cost: f64,
}

impl ShuttleRoute {
    pub fn start_location(&self) -> usize {
        self.stops[0].location
    }

    pub fn end_location(&self) -> usize {
        self.stops[self.stops.len() - 1].location
    }
}

pub fn classify(network: &NetworkModel, origin: usize, dest: usize) -> RequestClass {
    if network.is_hub(dest) {
        RequestClass::ToHub(dest)
    } else if network.is_hub(origin) {
        RequestClass::FromHub(origin)
    } else {
        RequestClass::Direct
    }
}

/// Expected time spent on a fixed-route arc: ride time plus half a headway.
pub fn expected_leg_seconds(network: &NetworkModel, params: &DesignParameters, arc: crate::model::ArcId) -> f64 {
    let a = network.arc(arc);
    match a.mode {
        Mode::Shuttle => a.travel_time_s,
        Mode::Bus | Mode::Rail => {
            a.travel_time_s + params.horizon_s / (2.0 * f64::from(a.frequency.unwrap_or(1).max(1)))
        }
    }
}

/// One request per passenger per shuttle leg. A leg's request time is the
/// trip start plus the expected duration of the legs before it.
pub fn extract_requests(
    design: &DesignSolution,
    trips: &[Trip],
    network: &NetworkModel,
    params: &DesignParameters,
) -> Result<Vec<ShuttleRequest>> {
    let paths: HashMap<&str, &TripPath> = design.paths.iter().map(|p| (p.trip_id.as_str(), p)).collect();
    let mut out = Vec::new();
    for trip in trips {
        if design.dropped_trips.contains(&trip.id) {
            continue;
        }
        let path = paths
            .get(trip.id.as_str())
            .ok_or_else(|| Error::InvalidInput(format!("no designed path for trip {}", trip.id)))?;
        let mut t = trip.request_time_s;
        for (leg, &id) in path.arcs.iter().enumerate() {
            let a = network.arc(id);
            if a.mode == Mode::Shuttle {
                for passenger in 0..trip.passengers {
                    out.push(ShuttleRequest {
                        id: out.len(),
                        trip_id: trip.id.clone(),
                        passenger,
                        leg,
                        origin: a.origin,
                        dest: a.dest,
                        request_time_s: t,
                        class: classify(network, a.origin, a.dest),
                    });
                }
            }
            t += expected_leg_seconds(network, params, id);
        }
    }
    Ok(out)
}

/// Request ids grouped by class, each group sorted by time then id.
pub fn group_requests(requests: &[ShuttleRequest]) -> BTreeMap<RequestClass, Vec<usize>> {
    let mut groups: BTreeMap<RequestClass, Vec<usize>> = BTreeMap::new();
    for r in requests {
        groups.entry(r.class).or_default().push(r.id);
    }
    for ids in groups.values_mut() {
        ids.sort_by(|&a, &b| {
            requests[a]
                .request_time_s
                .total_cmp(&requests[b].request_time_s)
                .then(a.cmp(&b))
        });
    }
    groups
}

#[derive(Debug, Clone)]
pub struct RideshareResult {
    pub requests: Vec<ShuttleRequest>,
    /// Selected routes: hub classes in class order, then direct singletons.
    pub routes: Vec<ShuttleRoute>,
    pub cost: f64,
    pub fleet: FleetPlan,
}

/// Requests, routes, set partitioning per hub direction, and fleet size.
pub fn plan_shuttles(
    design: &DesignSolution,
    trips: &[Trip],
    network: &NetworkModel,
    params: &DesignParameters,
    config: &RideshareConfig,
    exec: crate::par::Execution,
) -> Result<RideshareResult> {
    let requests = extract_requests(design, trips, network, params)?;
    let groups: Vec<(RequestClass, Vec<usize>)> = group_requests(&requests).into_iter().collect();
    let selected = crate::par::map(exec, &groups, |(class, ids)| {
        let reqs: Vec<&ShuttleRequest> = ids.iter().map(|&i| &requests[i]).collect();
        if *class == RequestClass::Direct {
            reqs.iter()
                .map(|r| singleton_route(r, network, params, config))
                .collect::<Vec<_>>()
        } else {
            let pool = enumerate_routes(&reqs, network, params, config);
            let res = solve_set_partitioning(&reqs, &pool);
            res.selected.into_iter().map(|i| pool[i].clone()).collect()
        }
    });
    let mut routes: Vec<ShuttleRoute> = Vec::new();
    let mut direct = Vec::new();
    for ((class, _), sel) in groups.iter().zip(selected) {
        if *class == RequestClass::Direct {
            direct = sel;
        } else {
            routes.extend(sel);
        }
    }
    routes.extend(direct);
    let cost = routes.iter().map(|r| r.cost).sum();
    let fleet = size_fleet(&routes, network);
    Ok(RideshareResult {
        requests,
        routes,
        cost,
        fleet,
    })
}
