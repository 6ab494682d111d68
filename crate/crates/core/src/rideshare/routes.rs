use super::{RequestClass, RideshareConfig, ShuttleRequest, ShuttleRoute, Stop};
use crate::model::{DesignParameters, NetworkModel};

/// All feasible groups of at most `capacity` requests whose request times lie
/// within the window, each with its shortest feasible stop order. Requests
/// must share one hub class.
pub fn enumerate_routes(
    requests: &[&ShuttleRequest],
    network: &NetworkModel,
    params: &DesignParameters,
    config: &RideshareConfig,
) -> Vec<ShuttleRoute> {
    let mut order: Vec<usize> = (0..requests.len()).collect();
    order.sort_by(|&a, &b| {
        requests[a]
            .request_time_s
            .total_cmp(&requests[b].request_time_s)
            .then(requests[a].id.cmp(&requests[b].id))
    });
    let cap = config.capacity.max(1) as usize;
    let mut routes = Vec::new();
    let mut group = Vec::with_capacity(cap);
    for (pos, &first) in order.iter().enumerate() {
        let limit = requests[first].request_time_s + config.window_s;
        let window: Vec<usize> = order[pos + 1..]
            .iter()
            .copied()
            .take_while(|&j| requests[j].request_time_s <= limit + 1e-9)
            .collect();
        group.clear();
        group.push(first);
        extend(&window, 0, cap, &mut group, &mut |g| {
            let members: Vec<&ShuttleRequest> = g.iter().map(|&i| requests[i]).collect();
            if let Some(r) = best_route(&members, network, params, config) {
                routes.push(r);
            }
        });
    }
    routes
}

fn extend(
    window: &[usize],
    from: usize,
    cap: usize,
    group: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]),
) {
    visit(group);
    if group.len() == cap {
        return;
    }
    for k in from..window.len() {
        group.push(window[k]);
        extend(window, k + 1, cap, group, visit);
        group.pop();
    }
}

/// Shortest-duration feasible stop order for a group (ties: lower cost, then
/// the lexicographically first order).
fn best_route(
    members: &[&ShuttleRequest],
    network: &NetworkModel,
    params: &DesignParameters,
    config: &RideshareConfig,
) -> Option<ShuttleRoute> {
    let mut locs: Vec<usize> = members.iter().map(|r| variable_end(r)).collect();
    locs.sort_unstable();
    locs.dedup();
    let mut best: Option<ShuttleRoute> = None;
    let mut perm: Vec<usize> = (0..locs.len()).collect();
    loop {
        let order: Vec<usize> = perm.iter().map(|&i| locs[i]).collect();
        if let Some(r) = build_route(members, &order, network, params, config) {
            let better = match &best {
                None => true,
                Some(b) => {
                    let (d, bd) = (r.end_time_s - r.start_time_s, b.end_time_s - b.start_time_s);
                    d < bd - 1e-9 || (d <= bd + 1e-9 && r.cost < b.cost - 1e-12)
                }
            };
            if better {
                best = Some(r);
            }
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best
}

/// The end of a request that varies within its class: the pickup point for
/// trips to a hub, the drop-off point otherwise.
fn variable_end(r: &ShuttleRequest) -> usize {
    match r.class {
        RequestClass::ToHub(_) => r.origin,
        RequestClass::FromHub(_) | RequestClass::Direct => r.dest,
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Route serving a single request on its own.
pub fn singleton_route(
    request: &ShuttleRequest,
    network: &NetworkModel,
    params: &DesignParameters,
    config: &RideshareConfig,
) -> ShuttleRoute {
    build_route(&[request], &[variable_end(request)], network, params, config)
        .expect("a single request is always feasible")
}

/// Builds the route visiting the pickup locations (to-hub) or drop-off
/// locations (from-hub, direct) in `order`. Returns `None` if a shared
/// passenger's ride exceeds `rho` times their direct ride.
pub fn build_route(
    members: &[&ShuttleRequest],
    order: &[usize],
    network: &NetworkModel,
    params: &DesignParameters,
    config: &RideshareConfig,
) -> Option<ShuttleRoute> {
    let class = members[0].class;
    let m = &network.matrix;
    let start = members.iter().map(|r| r.request_time_s).fold(f64::NEG_INFINITY, f64::max);
    let mut stops: Vec<Stop> = Vec::new();
    let push = |loc: usize, stops: &mut Vec<Stop>| {
        let time = match stops.last() {
            Some(prev) => prev.time_s + m.time(prev.location, loc),
            None => start,
        };
        stops.push(Stop { location: loc, time_s: time, pickups: Vec::new(), dropoffs: Vec::new() });
        stops.len() - 1
    };
    let mut ids: Vec<usize> = members.iter().map(|r| r.id).collect();
    ids.sort_unstable();
    match class {
        RequestClass::ToHub(hub) => {
            for &loc in order {
                let s = push(loc, &mut stops);
                stops[s].pickups = sorted_ids(members, |r| r.origin == loc);
            }
            let s = push(hub, &mut stops);
            stops[s].dropoffs = ids.clone();
        }
        RequestClass::FromHub(_) | RequestClass::Direct => {
            let s = push(members[0].origin, &mut stops);
            stops[s].pickups = ids.clone();
            for &loc in order {
                let s = push(loc, &mut stops);
                stops[s].dropoffs = sorted_ids(members, |r| r.dest == loc);
            }
        }
    }
    let mut ride_h = 0.0;
    for r in members {
        let pick = stops.iter().find(|s| s.pickups.contains(&r.id))?;
        let drop = stops.iter().find(|s| s.dropoffs.contains(&r.id))?;
        let ride = drop.time_s - pick.time_s;
        let direct = m.time(r.origin, r.dest);
        if members.len() > 1 && ride > config.rho * direct + 1e-9 {
            return None;
        }
        ride_h += ride / crate::model::SECONDS_PER_HOUR;
    }
    let miles: f64 = stops.windows(2).map(|w| m.miles(w[0].location, w[1].location)).sum();
    let per_mile = config.cost_per_mile.unwrap_or(params.shuttle_cost_per_mile_estimate);
    let cost = (1.0 - params.alpha) * miles * per_mile + params.alpha * ride_h;
    let end = stops[stops.len() - 1].time_s;
    Some(ShuttleRoute {
        class,
        requests: ids,
        stops,
        start_time_s: start,
        end_time_s: end,
        miles,
        cost,
    })
}

fn sorted_ids(members: &[&ShuttleRequest], keep: impl Fn(&ShuttleRequest) -> bool) -> Vec<usize> {
    let mut v: Vec<usize> = members.iter().filter(|r| keep(r)).map(|r| r.id).collect();
    v.sort_unstable();
    v
}
