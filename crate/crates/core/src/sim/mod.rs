//! Discrete-event simulation of an ODMTS design.
//!
//! Passengers follow their designed paths. Fixed-route legs board the first
//! run with a free seat (FIFO per stop); shuttle legs are posted to the
//! epoch dispatcher when the passenger reaches the leg origin. The loop runs
//! over the extended horizon; reports cover the horizon only.

mod io;
mod report;
mod schedule;

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap, VecDeque};

pub use io::{write_occupancy, write_passengers, write_report, write_road_usage};
pub use report::{
    OccupancySample, OperatingCost, PassengerRecord, RoadSegment, SimulationOutput, SimulationReport, WaitBins,
};
pub use schedule::{bus_lines, rail_lines, Line};

use crate::design::DesignSolution;
use crate::dispatch::{ActionKind, DispatchConfig, DispatchRequest, Dispatcher, Rider, ShuttleState};
use crate::model::{ArcId, DesignParameters, Mode, NetworkModel, Trip};
use crate::{Error, Result};

/// When the shuttle service counts as overwhelmed.
#[derive(Debug, Clone, PartialEq)]
pub struct OverwhelmCriterion {
    pub window_s: f64,
    /// Limit on the mean shuttle wait of legs requested within any window.
    pub max_mean_wait_s: f64,
    /// Limit on how long a single request may stay unassigned.
    pub max_unserved_s: f64,
}

impl Default for OverwhelmCriterion {
    fn default() -> Self {
        OverwhelmCriterion {
            window_s: 1800.0,
            max_mean_wait_s: 900.0,
            max_unserved_s: 1800.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub shuttle_capacity: u32,
    pub bus_capacity: u32,
    pub rail_capacity: u32,
    pub seed: u64,
    /// Start every fixed line at offset zero instead of a seeded offset.
    pub synchronized: bool,
    pub dispatch: DispatchConfig,
    pub overwhelm: OverwhelmCriterion,
    pub bus_cost_per_hour: f64,
    pub shuttle_cost_per_hour: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            shuttle_capacity: 4,
            bus_capacity: 50,
            rail_capacity: 500,
            seed: 0,
            synchronized: false,
            dispatch: DispatchConfig::default(),
            overwhelm: OverwhelmCriterion::default(),
            bus_cost_per_hour: 72.15,
            shuttle_cost_per_hour: 27.31,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Leg {
    arc: ArcId,
    mode: Mode,
    origin: usize,
    dest: usize,
}

#[derive(Debug, Clone)]
struct Passenger {
    trip_id: String,
    index: u32,
    start_s: f64,
    legs: Vec<Leg>,
    leg: usize,
    arrive_s: Vec<f64>,
    board_s: Vec<f64>,
    alight_s: Vec<f64>,
    done: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Time(f64);

impl Eq for Time {}

impl PartialOrd for Time {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Time {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Ties at equal time resolve by kind (trip starts, shuttle arrivals, fixed
/// stops, dispatch epochs) and then by entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Event {
    TripStart { pax: usize },
    ShuttleArrive { shuttle: usize },
    FixedStop { line: usize, run: i64, stop: usize },
    Epoch,
}

type Queue = BinaryHeap<Reverse<(Time, Event)>>;

/// Minimum number of vehicles on the open bus lines.
pub fn bus_count(lines: &[Line]) -> u32 {
    lines.iter().filter(|l| l.mode == Mode::Bus).map(|l| l.vehicles).sum()
}

/// Initial shuttle locations: hubs weighted by the shuttle legs that start
/// or end there, rounded by largest remainder.
pub fn seed_shuttles(network: &NetworkModel, legs: &[(usize, usize)], fleet: usize) -> Vec<usize> {
    let hubs = network.hubs();
    let mut weight = vec![0.0f64; hubs.len()];
    for &(o, d) in legs {
        for v in [o, d] {
            if let Ok(i) = hubs.binary_search(&v) {
                weight[i] += 1.0;
            }
        }
    }
    let total: f64 = weight.iter().sum();
    if total == 0.0 {
        weight.iter_mut().for_each(|w| *w = 1.0);
    }
    let total: f64 = weight.iter().sum();
    let quota: Vec<f64> = weight.iter().map(|w| w / total * fleet as f64).collect();
    let mut count: Vec<usize> = quota.iter().map(|q| q.floor() as usize).collect();
    let mut left = fleet - count.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..hubs.len()).collect();
    order.sort_by(|&a, &b| (quota[b] - quota[b].floor()).total_cmp(&(quota[a] - quota[a].floor())).then(a.cmp(&b)));
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        count[i] += 1;
        left -= 1;
    }
    hubs.iter().zip(&count).flat_map(|(&h, &c)| std::iter::repeat(h).take(c)).collect()
}

struct Sim<'a> {
    network: &'a NetworkModel,
    params: &'a DesignParameters,
    config: &'a SimConfig,
    lines: Vec<Line>,
    offsets: Vec<Vec<f64>>,
    pax: Vec<Passenger>,
    queues: HashMap<ArcId, VecDeque<usize>>,
    onboard: HashMap<(usize, i64), Vec<usize>>,
    shuttles: Vec<ShuttleState>,
    moving: Vec<bool>,
    dispatcher: Dispatcher,
    revealed: Vec<DispatchRequest>,
    request_pax: HashMap<usize, usize>,
    next_request: usize,
    events: Queue,
    out: SimulationOutput,
}

/// Runs one simulation with `fleet` shuttles.
pub fn simulate(
    network: &NetworkModel,
    design: &DesignSolution,
    trips: &[Trip],
    params: &DesignParameters,
    fleet: usize,
    config: &SimConfig,
) -> Result<SimulationOutput> {
    params.validate()?;
    let mut lines = bus_lines(design, network, params, config.seed, config.synchronized);
    lines.extend(rail_lines(network, params, config.seed, config.synchronized));
    let offsets = lines.iter().map(|l| l.stop_offsets(network)).collect();

    let mut pax = Vec::new();
    let mut shuttle_legs = Vec::new();
    for trip in trips {
        if design.dropped_trips.contains(&trip.id) {
            continue;
        }
        let path = design
            .path(&trip.id)
            .ok_or_else(|| Error::InvalidInput(format!("no designed path for trip {}", trip.id)))?;
        let legs: Vec<Leg> = path
            .arcs
            .iter()
            .map(|&a| {
                let arc = network.arc(a);
                Leg { arc: a, mode: arc.mode, origin: arc.origin, dest: arc.dest }
            })
            .collect();
        for leg in legs.iter().filter(|l| l.mode == Mode::Shuttle) {
            shuttle_legs.push((leg.origin, leg.dest));
        }
        for index in 0..trip.passengers {
            pax.push(Passenger {
                trip_id: trip.id.clone(),
                index,
                start_s: trip.request_time_s,
                legs: legs.clone(),
                leg: 0,
                arrive_s: vec![f64::NAN; legs.len()],
                board_s: vec![f64::NAN; legs.len()],
                alight_s: vec![f64::NAN; legs.len()],
                done: legs.is_empty(),
            });
        }
    }
    if fleet == 0 && !shuttle_legs.is_empty() {
        return Err(Error::InvalidInput("the design needs shuttles but the fleet is empty".into()));
    }
    let shuttles: Vec<ShuttleState> = seed_shuttles(network, &shuttle_legs, fleet)
        .into_iter()
        .enumerate()
        .map(|(i, loc)| ShuttleState::idle(i, loc, 0.0))
        .collect();
    let dispatch = DispatchConfig { capacity: config.shuttle_capacity, ..config.dispatch.clone() };
    let mut sim = Sim {
        network,
        params,
        config,
        lines,
        offsets,
        moving: vec![false; shuttles.len()],
        shuttles,
        pax,
        queues: HashMap::new(),
        onboard: HashMap::new(),
        dispatcher: Dispatcher::new(dispatch),
        revealed: Vec::new(),
        request_pax: HashMap::new(),
        next_request: 0,
        events: BinaryHeap::new(),
        out: SimulationOutput::default(),
    };
    sim.run(fleet);
    Ok(sim.out)
}

impl Sim<'_> {
    fn horizon(&self) -> f64 {
        self.params.horizon_s
    }

    fn end(&self) -> f64 {
        self.params.extended_horizon_s
    }

    fn in_window(&self, t: f64) -> bool {
        (0.0..=self.horizon()).contains(&t)
    }

    fn push(&mut self, t: f64, e: Event) {
        if t <= self.end() {
            self.events.push(Reverse((Time(t), e)));
        }
    }

    fn capacity(&self, mode: Mode) -> u32 {
        match mode {
            Mode::Shuttle => self.config.shuttle_capacity,
            Mode::Bus => self.config.bus_capacity,
            Mode::Rail => self.config.rail_capacity,
        }
    }

    fn run(&mut self, fleet: usize) {
        for p in 0..self.pax.len() {
            let t = self.pax[p].start_s;
            if !self.pax[p].done {
                self.push(t, Event::TripStart { pax: p });
            }
        }
        for li in 0..self.lines.len() {
            let (h, o) = (self.lines[li].headway_s, self.lines[li].offset_s);
            let span = *self.offsets[li].last().expect("offsets include the first stop");
            let first = ((-span - o) / h).floor() as i64;
            let last = ((self.end() - o) / h).floor() as i64;
            for run in first..=last {
                let dep = o + run as f64 * h;
                if let Some(stop) = self.offsets[li].iter().position(|&x| dep + x >= 0.0) {
                    self.push(dep + self.offsets[li][stop], Event::FixedStop { line: li, run, stop });
                }
            }
        }
        self.push(0.0, Event::Epoch);
        while let Some(Reverse((Time(t), e))) = self.events.pop() {
            match e {
                Event::TripStart { pax } => self.start_leg(pax, t),
                Event::ShuttleArrive { shuttle } => {
                    self.moving[shuttle] = false;
                    self.shuttles[shuttle].ready_s = t;
                    self.advance(shuttle, t);
                }
                Event::FixedStop { line, run, stop } => self.fixed_stop(line, run, stop, t),
                Event::Epoch => self.epoch(t),
            }
        }
        self.finish(fleet);
    }

    fn start_leg(&mut self, p: usize, t: f64) {
        let pax = &mut self.pax[p];
        if pax.leg == pax.legs.len() {
            pax.done = true;
            return;
        }
        let leg = pax.legs[pax.leg];
        pax.arrive_s[pax.leg] = t;
        if leg.mode == Mode::Shuttle {
            let id = self.next_request;
            self.next_request += 1;
            self.request_pax.insert(id, p);
            self.revealed.push(DispatchRequest {
                id,
                origin: leg.origin,
                dest: leg.dest,
                request_time_s: t,
                direct_s: self.network.matrix.time(leg.origin, leg.dest),
            });
        } else {
            self.queues.entry(leg.arc).or_default().push_back(p);
        }
    }

    fn fixed_stop(&mut self, li: usize, run: i64, stop: usize, t: f64) {
        let line = &self.lines[li];
        let arriving = stop.checked_sub(1).map(|s| line.arcs[s]);
        let departing = line.arcs.get(stop).copied();
        let mode = line.mode;
        let mut riders = self.onboard.remove(&(li, run)).unwrap_or_default();
        let mut staying = Vec::new();
        for p in riders.drain(..) {
            let pax = &mut self.pax[p];
            debug_assert_eq!(Some(pax.legs[pax.leg].arc), arriving);
            pax.alight_s[pax.leg] = t;
            pax.leg += 1;
            if departing.is_some() && pax.legs.get(pax.leg).map(|l| l.arc) == departing {
                pax.arrive_s[pax.leg] = t;
                pax.board_s[pax.leg] = t;
                staying.push(p);
            } else {
                self.start_leg(p, t);
            }
        }
        let Some(arc) = departing else { return };
        let cap = self.capacity(mode) as usize;
        if let Some(q) = self.queues.get_mut(&arc) {
            while staying.len() < cap {
                let Some(p) = q.pop_front() else { break };
                let pax = &mut self.pax[p];
                pax.board_s[pax.leg] = t;
                staying.push(p);
            }
        }
        if self.in_window(t) {
            let label = format!("{}#{}", self.lines[li].name, run.rem_euclid(i64::from(self.lines[li].vehicles)));
            let a = self.network.arc(arc);
            self.out.record_movement(a.origin, a.dest, mode, a.distance_mi);
            self.out.occupancy.push(OccupancySample {
                time_s: t,
                mode,
                vehicle: label,
                occupancy: staying.len() as u32,
                capacity: cap as u32,
            });
        }
        let next = t + self.network.arc(arc).travel_time_s;
        self.onboard.insert((li, run), staying);
        self.push(next, Event::FixedStop { line: li, run, stop: stop + 1 });
    }

    fn epoch(&mut self, t: f64) {
        let fresh = std::mem::take(&mut self.revealed);
        if !self.shuttles.is_empty() {
            self.dispatcher.run_epoch(t, &mut self.shuttles, fresh, &self.network.matrix);
        }
        for p in &self.dispatcher.pending {
            if self.in_window(p.request.request_time_s) {
                self.out.max_pending_s = self.out.max_pending_s.max(t - p.request.request_time_s);
            }
        }
        let mut active = 0;
        for s in 0..self.shuttles.len() {
            if !self.moving[s] {
                self.advance(s, t);
            }
            let sh = &self.shuttles[s];
            if self.moving[s] || !sh.plan.is_empty() || !sh.onboard.is_empty() {
                active += 1;
            }
        }
        if self.in_window(t) {
            self.out.active_shuttles.push((t, active));
        }
        let l = self.dispatcher.config.epoch_s;
        self.push(t + l, Event::Epoch);
    }

    /// Executes the actions at the shuttle's location, then departs for the
    /// next one.
    fn advance(&mut self, s: usize, t: f64) {
        loop {
            let sh = &self.shuttles[s];
            let Some(&action) = sh.plan.first() else { return };
            if action.location() != sh.location {
                let (from, to) = (sh.location, action.location());
                let occupancy = sh.onboard.len() as u32;
                let travel = self.network.matrix.time(from, to);
                let miles = self.network.matrix.miles(from, to);
                if self.in_window(t) {
                    self.out.record_movement(from, to, Mode::Shuttle, miles);
                    self.out.record_shuttle_miles(occupancy, miles);
                    self.out.occupancy.push(OccupancySample {
                        time_s: t,
                        mode: Mode::Shuttle,
                        vehicle: format!("shuttle#{s}"),
                        occupancy,
                        capacity: self.config.shuttle_capacity,
                    });
                }
                let sh = &mut self.shuttles[s];
                sh.location = to;
                sh.ready_s = t + travel;
                self.moving[s] = true;
                self.push(t + travel, Event::ShuttleArrive { shuttle: s });
                return;
            }
            self.shuttles[s].plan.remove(0);
            let p = self.request_pax[&action.request.id];
            match action.kind {
                ActionKind::Pickup => {
                    self.shuttles[s].onboard.push(Rider { request: action.request, pickup_s: t });
                    let pax = &mut self.pax[p];
                    pax.board_s[pax.leg] = t;
                }
                ActionKind::Dropoff => {
                    self.shuttles[s].onboard.retain(|r| r.request.id != action.request.id);
                    let pax = &mut self.pax[p];
                    pax.alight_s[pax.leg] = t;
                    pax.leg += 1;
                    self.start_leg(p, t);
                }
            }
        }
    }

    fn finish(&mut self, fleet: usize) {
        let horizon = self.horizon();
        let end = self.end();
        let mut records = Vec::with_capacity(self.pax.len());
        for p in &self.pax {
            let completed = p.done;
            let mut wait_s = 0.0;
            let mut in_vehicle_s = 0.0;
            let mut mode_wait_s = std::collections::BTreeMap::new();
            let mut legs = Vec::with_capacity(p.legs.len());
            for (k, leg) in p.legs.iter().enumerate() {
                let loc = |v: usize| self.network.location(v).id.as_str();
                legs.push(format!("{}:{}>{}", leg.mode, loc(leg.origin), loc(leg.dest)));
                let (arrive, board, alight) = (p.arrive_s[k], p.board_s[k], p.alight_s[k]);
                let wait = if board.is_nan() { end - arrive } else { board - arrive };
                if !arrive.is_nan() {
                    wait_s += wait;
                    *mode_wait_s.entry(leg.mode).or_insert(0.0) += wait;
                    if leg.mode == Mode::Shuttle && self.in_window(arrive) {
                        self.out.shuttle_waits.push((arrive, wait));
                    }
                } else {
                    mode_wait_s.entry(leg.mode).or_insert(0.0);
                }
                if !alight.is_nan() {
                    in_vehicle_s += alight - board;
                }
            }
            records.push(PassengerRecord {
                trip_id: p.trip_id.clone(),
                passenger: p.index,
                start_s: p.start_s,
                end_s: completed.then(|| p.alight_s.last().copied().unwrap_or(p.start_s)),
                completed,
                wait_s,
                in_vehicle_s,
                mode_wait_s,
                legs,
            });
        }
        let lines = std::mem::take(&mut self.lines);
        self.out.finalize(records, &lines, fleet, horizon, self.config);
        self.out.dispatch_log = std::mem::take(&mut self.dispatcher.log);
        self.out.lines = lines;
    }
}

#[derive(Debug, Clone)]
pub struct AutoscaleResult {
    pub fleet: usize,
    pub escalations: usize,
    /// False if the escalation cap was hit while still overwhelmed.
    pub healthy: bool,
    pub output: SimulationOutput,
}

/// Grows the fleet by 10% (rounded up) until the shuttle service is no
/// longer overwhelmed, for at most `max_escalations` rounds.
pub fn autoscale_fleet(
    network: &NetworkModel,
    design: &DesignSolution,
    trips: &[Trip],
    params: &DesignParameters,
    initial: usize,
    max_escalations: usize,
    config: &SimConfig,
) -> Result<AutoscaleResult> {
    let mut fleet = initial.max(1);
    let mut escalations = 0;
    loop {
        let output = simulate(network, design, trips, params, fleet, config)?;
        let healthy = !output.report.overwhelmed;
        if healthy || escalations == max_escalations {
            return Ok(AutoscaleResult { fleet, escalations, healthy, output });
        }
        log::info!("fleet of {fleet} shuttles is overwhelmed, escalating");
        fleet = (fleet as f64 * 1.1 - 1e-9).ceil() as usize;
        escalations += 1;
    }
}
