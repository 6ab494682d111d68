//! Oracles and generators for ridesharing and fleet sizing.

use odmts::lp::{solve_lp, Constraint, LinearProgram, Sense};
use odmts::model::{build_network, HubPolicy, Location, NetworkModel};
use odmts::rideshare::{RequestClass, ShuttleRequest, ShuttleRoute, Stop};
use odmts::synth::travel_matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::set_partitions;

pub fn request(id: usize, net: &NetworkModel, o: &str, d: &str, t: f64) -> ShuttleRequest {
    let (o, d) = (net.location_index(o).unwrap(), net.location_index(d).unwrap());
    ShuttleRequest {
        id,
        trip_id: format!("t{id}"),
        passenger: 0,
        leg: 0,
        origin: o,
        dest: d,
        request_time_s: t,
        class: odmts::rideshare::classify(net, o, d),
    }
}


/// Exhaustive set-partition oracle over a route pool.
pub fn partition_oracle(n: usize, ids: &[usize], pool: &[ShuttleRoute]) -> f64 {
    set_partitions(n)
        .iter()
        .filter_map(|blocks| {
            blocks
                .iter()
                .map(|b| {
                    let mut set: Vec<usize> = b.iter().map(|&i| ids[i]).collect();
                    set.sort_unstable();
                    pool.iter().filter(|r| r.requests == set).map(|r| r.cost).reduce(f64::min)
                })
                .sum::<Option<f64>>()
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn random_requests(seed: u64, n: usize) -> (NetworkModel, Vec<ShuttleRequest>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut locs = vec![Location::new("h", 33.75, -84.39).hub()];
    for i in 0..5 {
        locs.push(Location::new(format!("s{i}"), 33.75 + rng.gen_range(-0.03..0.03), -84.39 + rng.gen_range(-0.03..0.03)));
    }
    let m = travel_matrix(&locs);
    let net = build_network(locs, &HubPolicy::Flagged, &[], &[8], &[24], m).unwrap();
    let to_hub = rng.gen_bool(0.5);
    let reqs = (0..n)
        .map(|id| {
            let s = format!("s{}", rng.gen_range(0..5));
            let t = rng.gen_range(0..4) as f64 * 15.0;
            if to_hub {
                request(id, &net, &s, "h", t)
            } else {
                request(id, &net, "h", &s, t)
            }
        })
        .collect();
    (net, reqs)
}


pub fn bare_route(start_loc: usize, end_loc: usize, start: f64, end: f64) -> ShuttleRoute {
    let stop = |location, time_s| Stop { location, time_s, pickups: vec![], dropoffs: vec![] };
    ShuttleRoute {
        class: RequestClass::Direct,
        requests: vec![],
        stops: vec![stop(start_loc, start), stop(end_loc, end)],
        start_time_s: start,
        end_time_s: end,
        miles: 0.0,
        cost: 0.0,
    }
}


/// Minimum number of chains by exhaustive set partitioning; a block is a
/// chain iff consecutive routes in start order are compatible.
pub fn chain_oracle(n: usize, edge: &dyn Fn(usize, usize) -> bool, start: &[f64]) -> usize {
    set_partitions(n)
        .iter()
        .filter(|blocks| {
            blocks.iter().all(|b| {
                let mut b = b.clone();
                b.sort_by(|&x, &y| start[x].total_cmp(&start[y]));
                b.windows(2).all(|w| edge(w[0], w[1]))
            })
        })
        .map(|blocks| blocks.len())
        .min()
        .unwrap()
}

/// Maximum bipartite matching as an LP (totally unimodular).
pub fn matching_lp(n: usize, edge: &dyn Fn(usize, usize) -> bool) -> f64 {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).filter(|&(a, b)| edge(a, b)).collect();
    let mut lp = LinearProgram::new(pairs.len());
    lp.objective = vec![-1.0; pairs.len()];
    for v in 0..n {
        let out: Vec<(usize, f64)> = pairs.iter().enumerate().filter(|(_, p)| p.0 == v).map(|(i, _)| (i, 1.0)).collect();
        let inn: Vec<(usize, f64)> = pairs.iter().enumerate().filter(|(_, p)| p.1 == v).map(|(i, _)| (i, 1.0)).collect();
        lp.add(Constraint::new(out, Sense::Le, 1.0));
        lp.add(Constraint::new(inn, Sense::Le, 1.0));
    }
    -solve_lp(&lp).objective
}

/// `n` timed routes between four hubs a few miles apart.
pub fn random_routes(seed: u64, n: usize) -> (NetworkModel, Vec<ShuttleRoute>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let locs: Vec<Location> = (0..4)
        .map(|i| Location::new(format!("p{i}"), 33.75 + rng.gen_range(-0.05..0.05), -84.39 + rng.gen_range(-0.05..0.05)).hub())
        .collect();
    let m = travel_matrix(&locs);
    let net = build_network(locs, &HubPolicy::Flagged, &[], &[], &[], m).unwrap();
    let routes = (0..n)
        .map(|_| {
            let s = rng.gen_range(0.0..7200.0f64).floor();
            bare_route(rng.gen_range(0..4), rng.gen_range(0..4), s, s + rng.gen_range(300.0..1800.0f64).floor())
        })
        .collect();
    (net, routes)
}
