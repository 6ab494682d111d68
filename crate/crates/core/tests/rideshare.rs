mod common;

use common::rideshare::*;
use odmts::design::{DesignSolution, DesignStatus, TripPath};
use odmts::model::{build_network, DesignParameters, HubPolicy, Location, NetworkModel, TravelMatrix, Trip};
use odmts::rideshare::{
    enumerate_routes, extract_requests, min_chain_cover, size_fleet, solve_set_partitioning,
    RequestClass, RideshareConfig, ShuttleRequest,
};
use proptest::prelude::*;

/// Network with hand-set travel times (seconds); distance = seconds / 120.
fn network(locations: Vec<Location>, times: &[(&str, &str, f64)], default_s: f64) -> NetworkModel {
    let names: Vec<String> = locations.iter().map(|l| l.id.clone()).collect();
    let mut m = TravelMatrix::new(names.clone());
    for i in 0..names.len() {
        for j in 0..names.len() {
            if i != j {
                let t = times
                    .iter()
                    .find(|(a, b, _)| (*a == names[i] && *b == names[j]) || (*a == names[j] && *b == names[i]))
                    .map_or(default_s, |x| x.2);
                m.insert(i, j, t, t / 120.0);
            }
        }
    }
    build_network(locations, &HubPolicy::Flagged, &[], &[8], &[24], m).unwrap()
}

#[test]
fn from_hub_request_time_follows_the_path() {
    let locs = vec![
        Location::new("h1", 0.0, 0.0).rail_station("L", 0),
        Location::new("h2", 0.0, 0.1).rail_station("L", 1),
        Location::new("o", 0.1, 0.0),
        Location::new("d", 0.1, 0.1),
    ];
    let mut net = network(locs, &[("o", "h1", 600.0), ("h1", "h2", 600.0), ("h2", "d", 300.0)], 1800.0);
    // 6:00 start, 10 min shuttle, 5 min expected rail wait, 10 min ride
    let trip = Trip::new("t", "o", "d", 2, 6.0 * 3600.0);
    net.ensure_trip_arcs(&trip).unwrap();
    let (o, d, h1, h2) = (2, 3, 0, 1);
    let rail = *net.hub_arcs().iter().find(|&&a| net.arc(a).origin == h1 && net.arc(a).dest == h2).unwrap();
    let design = DesignSolution {
        status: DesignStatus::Optimal,
        open_bus_arcs: vec![],
        objective_total: 0.0,
        fixed_cost_part: 0.0,
        passenger_part: 0.0,
        lower_bound: 0.0,
        paths: vec![TripPath {
            trip_id: "t".into(),
            arcs: vec![net.shuttle_arc(o, h1).unwrap(), rail, net.shuttle_arc(h2, d).unwrap()],
            cost: 0.0,
        }],
        dropped_trips: vec![],
        trace: vec![],
    };
    let reqs = extract_requests(&design, &[trip], &net, &DesignParameters::default()).unwrap();
    assert_eq!(reqs.len(), 4);
    assert_eq!(reqs[0].class, RequestClass::ToHub(h1));
    assert_eq!(reqs[0].request_time_s, 6.0 * 3600.0);
    let last = &reqs[3];
    assert_eq!(last.class, RequestClass::FromHub(h2));
    assert_eq!(last.request_time_s, 6.0 * 3600.0 + 25.0 * 60.0);
}

#[test]
fn a_design_serves_any_subset_of_its_trips() {
    let locs = vec![Location::new("h", 0.0, 0.0).hub(), Location::new("a", 0.1, 0.0), Location::new("b", 0.0, 0.1)];
    let mut net = network(locs, &[], 600.0);
    let trips = [Trip::new("t1", "a", "h", 1, 0.0), Trip::new("t2", "b", "h", 3, 60.0)];
    let mut paths = Vec::new();
    for (t, o) in trips.iter().zip([1, 2]) {
        net.ensure_trip_arcs(t).unwrap();
        paths.push(TripPath { trip_id: t.id.clone(), arcs: vec![net.shuttle_arc(o, 0).unwrap()], cost: 0.0 });
    }
    let design = DesignSolution {
        status: DesignStatus::Optimal,
        open_bus_arcs: vec![],
        objective_total: 0.0,
        fixed_cost_part: 0.0,
        passenger_part: 0.0,
        lower_bound: 0.0,
        paths,
        dropped_trips: vec![],
        trace: vec![],
    };
    let sampled = [Trip { passengers: 2, ..trips[1].clone() }];
    let reqs = extract_requests(&design, &sampled, &net, &DesignParameters::default()).unwrap();
    assert_eq!(reqs.len(), 2);
    assert!(reqs.iter().all(|r| r.trip_id == "t2"));
    let stranger = [Trip::new("t9", "a", "h", 1, 0.0)];
    assert!(extract_requests(&design, &stranger, &net, &DesignParameters::default()).is_err());
}

fn to_hub_net() -> NetworkModel {
    let locs = vec![
        Location::new("h", 0.0, 0.0).hub(),
        Location::new("a", 0.1, 0.0),
        Location::new("b", 0.2, 0.0),
        Location::new("c", 0.3, 0.0),
    ];
    network(
        locs,
        &[("a", "h", 600.0), ("b", "h", 600.0), ("a", "b", 120.0), ("c", "h", 500.0), ("a", "c", 900.0), ("b", "c", 900.0)],
        1000.0,
    )
}

#[test]
fn singleton_and_shared_routes() {
    let net = to_hub_net();
    let params = DesignParameters::default();
    let cfg = RideshareConfig::default();
    let r0 = request(0, &net, "a", "h", 100.0);
    let pool = enumerate_routes(&[&r0], &net, &params, &cfg);
    assert_eq!(pool.len(), 1);
    let expected = (1.0 - params.alpha) * 5.0 + params.alpha * 600.0 / 3600.0;
    assert!((pool[0].cost - expected).abs() < 1e-12);

    let r1 = request(1, &net, "b", "h", 100.0);
    let pool = enumerate_routes(&[&r0, &r1], &net, &params, &cfg);
    assert_eq!(pool.len(), 3);
    let shared = pool.iter().find(|r| r.requests.len() == 2).unwrap();
    // a -> b -> h: 720 s for the rider from a, ratio 1.2
    assert_eq!(shared.stops.iter().map(|s| s.location).collect::<Vec<_>>(), vec![1, 2, 0]);
    assert_eq!(shared.end_time_s - shared.start_time_s, 720.0);

    let late = request(1, &net, "b", "h", 131.0);
    let pool = enumerate_routes(&[&r0, &late], &net, &params, &cfg);
    assert!(pool.iter().all(|r| r.requests.len() == 1));
    let edge = request(1, &net, "b", "h", 130.0);
    assert_eq!(enumerate_routes(&[&r0, &edge], &net, &params, &cfg).len(), 3);
}

#[test]
fn detour_limit_excludes_groups() {
    let net = to_hub_net();
    let params = DesignParameters::default();
    let r0 = request(0, &net, "a", "h", 0.0);
    let r1 = request(1, &net, "c", "h", 0.0);
    // a -> c -> h takes 1400 s vs 600 direct; c -> a -> h takes 1500 vs 500
    let pool = enumerate_routes(&[&r0, &r1], &net, &params, &RideshareConfig::default());
    assert_eq!(pool.len(), 2);
    let loose = RideshareConfig { rho: 3.0, ..Default::default() };
    assert_eq!(enumerate_routes(&[&r0, &r1], &net, &params, &loose).len(), 3);
}

#[test]
fn partitioning_prefers_cheap_pair() {
    let net = to_hub_net();
    let params = DesignParameters::default();
    let reqs = [request(0, &net, "a", "h", 0.0), request(1, &net, "b", "h", 5.0), request(2, &net, "c", "h", 10.0)];
    let refs: Vec<&ShuttleRequest> = reqs.iter().collect();
    let pool = enumerate_routes(&refs, &net, &params, &RideshareConfig::default());
    let res = solve_set_partitioning(&refs, &pool);
    let sets: Vec<&Vec<usize>> = res.selected.iter().map(|&j| &pool[j].requests).collect();
    assert!(sets.contains(&&vec![0, 1]));
    assert!(sets.contains(&&vec![2]));
}

#[test]
fn partitioning_matches_exhaustive_enumeration() {
    for seed in 0..30 {
        let n = 3 + (seed as usize % 6);
        let (net, reqs) = random_requests(seed, n);
        let refs: Vec<&ShuttleRequest> = reqs.iter().collect();
        let pool = enumerate_routes(&refs, &net, &DesignParameters::default(), &RideshareConfig::default());
        let res = solve_set_partitioning(&refs, &pool);
        let ids: Vec<usize> = reqs.iter().map(|r| r.id).collect();
        let oracle = partition_oracle(n, &ids, &pool);
        assert!((res.cost - oracle).abs() < 1e-9, "seed {seed}: {} vs {oracle}", res.cost);
        let mut covered: Vec<usize> = res.selected.iter().flat_map(|&j| pool[j].requests.clone()).collect();
        covered.sort_unstable();
        assert_eq!(covered, ids);
    }
}

#[test]
fn wider_window_never_costs_more() {
    for seed in 0..15 {
        let (net, reqs) = random_requests(seed, 6);
        let refs: Vec<&ShuttleRequest> = reqs.iter().collect();
        let params = DesignParameters::default();
        let mut prev = f64::INFINITY;
        for (w, rho) in [(0.0, 1.0), (15.0, 1.2), (30.0, 1.5), (60.0, 2.0)] {
            let cfg = RideshareConfig { window_s: w, rho, ..Default::default() };
            let pool = enumerate_routes(&refs, &net, &params, &cfg);
            let c = solve_set_partitioning(&refs, &pool).cost;
            assert!(c <= prev + 1e-9);
            prev = c;
        }
    }
}

#[test]
fn fleet_relocation_boundary() {
    for (reloc, fleet) in [(1200.0, 1), (2400.0, 2)] {
        let locs = vec![Location::new("H", 0.0, 0.0).hub(), Location::new("X", 0.1, 0.0), Location::new("Y", 0.2, 0.0)];
        let net = network(locs, &[("X", "Y", reloc)], 600.0);
        let seven = 7.0 * 3600.0;
        let routes = vec![bare_route(0, 1, seven - 1800.0, seven), bare_route(2, 0, seven + 1800.0, seven + 2400.0)];
        assert_eq!(size_fleet(&routes, &net).size, fleet);
        assert_eq!(size_fleet(&routes[..1], &net).size, 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]
    #[test]
    fn fleet_matches_chain_oracle(seed in 0u64..10_000, n in 1usize..=8) {
        let (net, routes) = random_routes(seed, n);
        let plan = size_fleet(&routes, &net);
        let edge = |a: usize, b: usize| a != b && routes[a].end_time_s + net.matrix.time(routes[a].end_location(), routes[b].start_location()) <= routes[b].start_time_s + 1e-9;
        let start: Vec<f64> = routes.iter().map(|r| r.start_time_s).collect();
        prop_assert_eq!(plan.size, chain_oracle(n, &edge, &start));
        prop_assert!((plan.size as f64 - (n as f64 - matching_lp(n, &edge))).abs() < 1e-9);
        let mut all: Vec<usize> = plan.chains.concat();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        for c in &plan.chains {
            for w in c.windows(2) {
                prop_assert!(edge(w[0], w[1]));
            }
        }
    }
}

#[test]
fn chain_cover_on_a_path_is_one() {
    assert_eq!(min_chain_cover(5, |a, b| b == a + 1).len(), 1);
    assert_eq!(min_chain_cover(5, |_, _| false).len(), 5);
}
