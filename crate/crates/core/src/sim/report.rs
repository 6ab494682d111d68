use std::collections::BTreeMap;

use serde::Serialize;

use super::{bus_count, Line, SimConfig};
use crate::dispatch::EpochLog;
use crate::model::{Mode, SECONDS_PER_HOUR};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PassengerRecord {
    pub trip_id: String,
    pub passenger: u32,
    pub start_s: f64,
    pub end_s: Option<f64>,
    pub completed: bool,
    pub wait_s: f64,
    pub in_vehicle_s: f64,
    /// Wait per mode, present when the path uses that mode.
    pub mode_wait_s: BTreeMap<Mode, f64>,
    /// `mode:origin>dest` per leg in travel order.
    pub legs: Vec<String>,
}

impl PassengerRecord {
    pub fn total_s(&self) -> Option<f64> {
        self.end_s.map(|e| e - self.start_s)
    }

    pub fn uses(&self, mode: Mode) -> bool {
        self.mode_wait_s.contains_key(&mode)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccupancySample {
    pub time_s: f64,
    pub mode: Mode,
    pub vehicle: String,
    pub occupancy: u32,
    pub capacity: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoadSegment {
    pub from: usize,
    pub to: usize,
    pub mode: Mode,
    pub vehicles: u32,
    pub miles: f64,
}

/// Share of trips using a mode whose total wait on that mode falls in
/// each bin, in percent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaitBins {
    pub trips: usize,
    pub under_5_min: f64,
    pub from_5_to_10_min: f64,
    pub over_10_min: f64,
}

impl WaitBins {
    pub fn from_waits(waits: &[f64]) -> Option<Self> {
        if waits.is_empty() {
            return None;
        }
        let n = waits.len() as f64;
        let count = |f: &dyn Fn(f64) -> bool| waits.iter().filter(|&&w| f(w)).count() as f64;
        let low = count(&|w| w < 300.0);
        let mid = count(&|w| (300.0..600.0).contains(&w));
        let high = waits.len() as f64 - low - mid;
        Some(WaitBins {
            trips: waits.len(),
            under_5_min: 100.0 * low / n,
            from_5_to_10_min: 100.0 * mid / n,
            over_10_min: 100.0 * high / n,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct OperatingCost {
    pub bus: f64,
    pub shuttle: f64,
    pub total: f64,
    /// Shuttle cost over the horizon divided by shuttle miles driven.
    pub shuttle_per_mile: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SimulationReport {
    pub horizon_s: f64,
    pub fleet: usize,
    pub bus_lines: usize,
    pub buses: u32,
    pub passengers: usize,
    pub completed: usize,
    pub stranded: usize,
    pub conservation_holds: bool,
    pub capacity_violations: usize,
    pub mean_wait_s: f64,
    pub mean_in_vehicle_s: f64,
    pub mean_total_s: f64,
    pub wait_bins: BTreeMap<Mode, Option<WaitBins>>,
    pub max_utilization: BTreeMap<Mode, f64>,
    pub shuttle_miles: f64,
    /// Miles driven with 0, 1, ... passengers on board.
    pub shuttle_miles_by_occupancy: Vec<f64>,
    pub max_active_shuttles: usize,
    pub max_shuttle_wait_s: f64,
    /// Longest time a shuttle request stayed unassigned in the dispatcher.
    pub max_pending_s: f64,
    /// Largest mean shuttle wait over legs requested in one rolling window.
    pub peak_shuttle_wait_s: f64,
    pub overwhelmed: bool,
    pub cost: OperatingCost,
}

#[derive(Debug, Clone, Default)]
pub struct SimulationOutput {
    pub report: SimulationReport,
    pub passengers: Vec<PassengerRecord>,
    pub occupancy: Vec<OccupancySample>,
    pub road_usage: Vec<RoadSegment>,
    pub active_shuttles: Vec<(f64, usize)>,
    pub dispatch_log: Vec<EpochLog>,
    pub lines: Vec<Line>,
    /// Requested time and wait of every shuttle leg started in the horizon;
    /// unserved legs count their wait up to the end of the run.
    pub shuttle_waits: Vec<(f64, f64)>,
    pub(crate) max_pending_s: f64,
    movements: BTreeMap<(usize, usize, Mode), (u32, f64)>,
    miles_by_occupancy: Vec<f64>,
}

impl SimulationOutput {
    pub(crate) fn record_movement(&mut self, from: usize, to: usize, mode: Mode, miles: f64) {
        let e = self.movements.entry((from, to, mode)).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += miles;
    }

    pub(crate) fn record_shuttle_miles(&mut self, occupancy: u32, miles: f64) {
        let k = occupancy as usize;
        if self.miles_by_occupancy.len() <= k {
            self.miles_by_occupancy.resize(k + 1, 0.0);
        }
        self.miles_by_occupancy[k] += miles;
    }

    pub(crate) fn finalize(
        &mut self,
        records: Vec<PassengerRecord>,
        lines: &[Line],
        fleet: usize,
        horizon_s: f64,
        config: &SimConfig,
    ) {
        let in_window: Vec<&PassengerRecord> =
            records.iter().filter(|r| (0.0..=horizon_s).contains(&r.start_s)).collect();
        let done: Vec<&PassengerRecord> = in_window.iter().copied().filter(|r| r.completed).collect();
        let mean = |f: &dyn Fn(&PassengerRecord) -> f64| {
            if done.is_empty() {
                0.0
            } else {
                done.iter().map(|r| f(r)).sum::<f64>() / done.len() as f64
            }
        };
        let mut wait_bins = BTreeMap::new();
        for mode in Mode::ALL {
            let waits: Vec<f64> = done.iter().filter_map(|r| r.mode_wait_s.get(&mode).copied()).collect();
            wait_bins.insert(mode, WaitBins::from_waits(&waits));
        }
        let mut max_utilization = BTreeMap::new();
        let mut capacity_violations = 0;
        for s in &self.occupancy {
            if s.occupancy > s.capacity {
                capacity_violations += 1;
            }
            let u = if s.capacity == 0 { 0.0 } else { f64::from(s.occupancy) / f64::from(s.capacity) };
            let e = max_utilization.entry(s.mode).or_insert(0.0f64);
            *e = e.max(u);
        }
        self.shuttle_waits.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let window = config.overwhelm.window_s;
        let waits = &self.shuttle_waits;
        let mut peak: f64 = 0.0;
        let mut hi = 0;
        let mut sum = 0.0;
        let mut lo = 0;
        while lo < waits.len() {
            while hi < waits.len() && waits[hi].0 < waits[lo].0 + window {
                sum += waits[hi].1;
                hi += 1;
            }
            peak = peak.max(sum / (hi - lo) as f64);
            let start = waits[lo].0;
            while lo < waits.len() && waits[lo].0 == start {
                sum -= waits[lo].1;
                lo += 1;
            }
        }
        let max_wait = self.shuttle_waits.iter().map(|w| w.1).fold(0.0, f64::max);
        let stranded = records.iter().filter(|r| !r.completed).count();
        let completed_all = records.len() - stranded;
        let shuttle_miles: f64 = self.miles_by_occupancy.iter().sum();
        let mut by_occ = self.miles_by_occupancy.clone();
        by_occ.resize((config.shuttle_capacity as usize + 1).max(by_occ.len()), 0.0);
        let hours = horizon_s / SECONDS_PER_HOUR;
        let buses = bus_count(lines);
        let bus_cost = f64::from(buses) * config.bus_cost_per_hour * hours;
        let shuttle_cost = fleet as f64 * config.shuttle_cost_per_hour * hours;
        self.road_usage = self
            .movements
            .iter()
            .map(|(&(from, to, mode), &(vehicles, miles))| RoadSegment { from, to, mode, vehicles, miles })
            .collect();
        self.report = SimulationReport {
            horizon_s,
            fleet,
            bus_lines: lines.iter().filter(|l| l.mode == Mode::Bus).count(),
            buses,
            passengers: in_window.len(),
            completed: done.len(),
            stranded,
            conservation_holds: completed_all + stranded == records.len(),
            capacity_violations,
            mean_wait_s: mean(&|r| r.wait_s),
            mean_in_vehicle_s: mean(&|r| r.in_vehicle_s),
            mean_total_s: mean(&|r| r.total_s().unwrap_or(0.0)),
            wait_bins,
            max_utilization,
            shuttle_miles,
            shuttle_miles_by_occupancy: by_occ,
            max_active_shuttles: self.active_shuttles.iter().map(|a| a.1).max().unwrap_or(0),
            max_shuttle_wait_s: max_wait,
            max_pending_s: self.max_pending_s,
            peak_shuttle_wait_s: peak,
            overwhelmed: peak > config.overwhelm.max_mean_wait_s || self.max_pending_s > config.overwhelm.max_unserved_s,
            cost: OperatingCost {
                bus: bus_cost,
                shuttle: shuttle_cost,
                total: bus_cost + shuttle_cost,
                shuttle_per_mile: (shuttle_miles > 0.0).then(|| shuttle_cost / shuttle_miles),
            },
        };
        self.passengers = records;
    }
}
