//! Seeded synthetic instances for tests, benchmarks and demos.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{
    alpha_from_value_of_time, build_network, DesignParameters, HubPolicy, Location, NetworkModel,
    TravelMatrix, Trip,
};

const CENTER: (f64, f64) = (33.75, -84.39);

#[derive(Debug, Clone)]
pub struct RandomInstanceConfig {
    pub max_rail_stations: usize,
    pub max_bus_hubs: usize,
    pub stops: usize,
    pub max_trips: usize,
    pub max_frequencies: usize,
    pub max_passengers: u32,
    /// Half-width of the service area in degrees.
    pub spread_deg: f64,
    /// When set, stops are scattered within this many degrees of a random
    /// hub instead of uniformly, which makes hub-to-hub corridors pay off.
    pub stop_jitter_deg: Option<f64>,
    pub bus_cost_per_hour: f64,
}

impl Default for RandomInstanceConfig {
    fn default() -> Self {
        RandomInstanceConfig {
            max_rail_stations: 4,
            max_bus_hubs: 2,
            stops: 8,
            max_trips: 20,
            max_frequencies: 3,
            max_passengers: 15,
            spread_deg: 0.08,
            stop_jitter_deg: None,
            bus_cost_per_hour: DesignParameters::default().bus_cost_per_hour,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub network: NetworkModel,
    pub trips: Vec<Trip>,
    pub params: DesignParameters,
}

/// Road speed and detour factor used for synthetic travel matrices.
pub const ROAD_SPEED_MPH: f64 = 22.0;
pub const ROAD_DETOUR: f64 = 1.3;

pub fn travel_matrix(locations: &[Location]) -> TravelMatrix {
    let coords: Vec<(String, f64, f64)> = locations
        .iter()
        .map(|l| (l.id.clone(), l.lat, l.lon))
        .collect();
    TravelMatrix::from_coordinates(&coords, ROAD_SPEED_MPH, ROAD_DETOUR)
}

/// A small random design instance: one rail line (possibly absent), a few
/// bus-only hubs, non-hub stops and trips between stops.
pub fn random_instance(seed: u64, cfg: &RandomInstanceConfig) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spread = cfg.spread_deg;
    let point = |rng: &mut ChaCha8Rng| {
        (
            CENTER.0 + rng.gen_range(-spread..spread),
            CENTER.1 + rng.gen_range(-spread..spread),
        )
    };
    let rail = match rng.gen_range(0..=cfg.max_rail_stations) {
        1 => 2,
        n => n,
    };
    let bus = rng.gen_range(1..=cfg.max_bus_hubs.max(1));
    let mut locations = Vec::new();
    for i in 0..rail {
        let (lat, lon) = point(&mut rng);
        locations.push(Location::new(format!("R{i}"), lat, lon).rail_station("L1", i as u32));
    }
    for i in 0..bus {
        let (lat, lon) = point(&mut rng);
        locations.push(Location::new(format!("H{i}"), lat, lon).hub());
    }
    let hubs: Vec<(f64, f64)> = locations.iter().map(|l| (l.lat, l.lon)).collect();
    for i in 0..cfg.stops.max(2) {
        let (lat, lon) = match cfg.stop_jitter_deg {
            Some(j) => {
                let (hl, ho) = hubs[rng.gen_range(0..hubs.len())];
                (hl + rng.gen_range(-j..j), ho + rng.gen_range(-j..j))
            }
            None => point(&mut rng),
        };
        locations.push(Location::new(format!("S{i}"), lat, lon));
    }
    let stop_ids: Vec<String> = (0..cfg.stops.max(2)).map(|i| format!("S{i}")).collect();
    let params = DesignParameters {
        alpha: *[0.0, 0.5, alpha_from_value_of_time(7.25), 1.0]
            .choose(&mut rng)
            .expect("nonempty"),
        transfer_limit: rng.gen_range(1..=4),
        bus_cost_per_hour: cfg.bus_cost_per_hour,
        ..DesignParameters::default()
    };
    let n_trips = rng.gen_range(1..=cfg.max_trips.max(1));
    let trips: Vec<Trip> = (0..n_trips)
        .map(|i| {
            let pair: Vec<&String> = stop_ids.choose_multiple(&mut rng, 2).collect();
            Trip::new(
                format!("t{i}"),
                pair[0].clone(),
                pair[1].clone(),
                rng.gen_range(1..=cfg.max_passengers.max(1)),
                rng.gen_range(0.0..params.horizon_s).floor(),
            )
        })
        .collect();
    let mut freqs = vec![8u32, 12, 16];
    freqs.shuffle(&mut rng);
    let k = rng.gen_range(1..=cfg.max_frequencies.clamp(1, 3));
    let mut freqs: Vec<u32> = freqs[..k].to_vec();
    freqs.sort_unstable();
    let matrix = travel_matrix(&locations);
    let network = build_network(locations, &HubPolicy::Flagged, &trips, &freqs, &[24], matrix)
        .expect("synthetic instance is complete");
    Instance {
        network,
        trips,
        params,
    }
}

/// Locations and trips of the toy city: a four-station rail line, three bus
/// hubs with a busy east-west corridor, and 24 stops clustered around the
/// hubs. Trips carry 200 passengers in total over a four-hour morning.
pub fn toy_city(seed: u64) -> (Vec<Location>, Vec<Trip>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut locations = Vec::new();
    for i in 0..4 {
        let lat = CENTER.0 - 0.06 + 0.04 * i as f64;
        locations.push(Location::new(format!("R{i}"), lat, CENTER.1).rail_station("L1", i as u32));
    }
    let bus_hubs = [(0.01, -0.07), (-0.01, 0.07), (0.05, 0.05)];
    for (i, (dlat, dlon)) in bus_hubs.iter().enumerate() {
        locations.push(Location::new(format!("H{i}"), CENTER.0 + dlat, CENTER.1 + dlon).hub());
    }
    let anchors: Vec<(f64, f64)> = locations.iter().map(|l| (l.lat, l.lon)).collect();
    let mut home = Vec::new();
    for i in 0..24 {
        let a = i % anchors.len();
        let (lat, lon) = anchors[a];
        home.push(a);
        locations.push(Location::new(
            format!("S{i:02}"),
            lat + rng.gen_range(-0.012..0.012),
            lon + rng.gen_range(-0.012..0.012),
        ));
    }
    let stops: Vec<usize> = (0..24).collect();
    let near = |hub: usize| -> Vec<usize> { stops.iter().copied().filter(|&s| home[s] == hub).collect() };
    let (west, east) = (near(4), near(5));
    let mut trips = Vec::new();
    let mut passengers = 0;
    while passengers < 200 {
        let (o, d) = if rng.gen_bool(0.35) {
            let (a, b) = (*west.choose(&mut rng).expect("stops"), *east.choose(&mut rng).expect("stops"));
            if rng.gen_bool(0.5) { (a, b) } else { (b, a) }
        } else {
            let pair: Vec<&usize> = stops.choose_multiple(&mut rng, 2).collect();
            (*pair[0], *pair[1])
        };
        let k = rng.gen_range(1..=4).min(200 - passengers);
        // morning peak around the first hour
        let t = (rng.gen_range(0.0..1.0f64).powf(1.6) * 4.0 * 3600.0).floor();
        trips.push(Trip::new(format!("t{:03}", trips.len()), format!("S{o:02}"), format!("S{d:02}"), k, t));
        passengers += k;
    }
    trips.sort_by(|a, b| a.request_time_s.total_cmp(&b.request_time_s).then(a.id.cmp(&b.id)));
    (locations, trips)
}
