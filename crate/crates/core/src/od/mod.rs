//! Origin-destination estimation from fare transactions and automatic
//! passenger counts (APC).
//!
//! Card transactions are paired into legs, bus alightings are inferred from
//! the card's next boarding, legs are chained into journeys and journeys are
//! aggregated into [`Trip`] records per time bucket. Riders paying cash leave
//! no card trail and are synthesized from the APC boardings that card
//! transactions do not account for.

mod io;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::model::{haversine_miles, Location, Mode, Trip, SECONDS_PER_HOUR};
use crate::par::{self, Execution};

pub use io::{read_apc, read_transactions, write_diagnostics};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransactionKind {
    BusBoard,
    RailEntry,
    RailExit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transaction {
    /// `None` for cash payments.
    pub card_id: Option<String>,
    pub timestamp_s: f64,
    pub terminal: String,
    pub kind: TransactionKind,
    /// Bus route of a boarding; may be empty when the stop serves one route.
    pub route: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApcRecord {
    pub stop: String,
    pub route: String,
    pub timestamp_s: f64,
    pub boardings: u32,
    pub alightings: u32,
    /// Position of the stop along the route, if the feed provides it.
    pub sequence: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Leg {
    pub card_id: String,
    pub mode: Mode,
    pub route: Option<String>,
    pub board: String,
    pub board_s: f64,
    pub alight: Option<String>,
    pub alight_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Journey {
    pub origin: String,
    pub dest: String,
    pub start_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdConfig {
    /// Longest gap between an alighting and the next boarding of one journey.
    pub transfer_window_s: f64,
    pub bucket_s: f64,
    pub seed: u64,
    /// Used to estimate when an inferred bus alighting happens.
    pub bus_speed_mph: f64,
    pub road_detour: f64,
    pub execution: Execution,
}

impl Default for OdConfig {
    fn default() -> Self {
        OdConfig {
            transfer_window_s: 45.0 * 60.0,
            bucket_s: 15.0 * 60.0,
            seed: 0,
            bus_speed_mph: 12.0,
            road_detour: 1.3,
            execution: Execution::default(),
        }
    }
}

impl OdConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.bucket_s > 0.0) || !(self.bus_speed_mph > 0.0) || self.transfer_window_s < 0.0 {
            return Err(crate::Error::InvalidInput(
                "bucket, bus speed and transfer window must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Counts written to diagnostics.json.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub transactions: usize,
    pub cash_transactions: usize,
    pub unknown_terminals: usize,
    pub cards: usize,
    pub rail_legs: usize,
    pub bus_legs: usize,
    pub unmatched_exits: usize,
    pub unmatched_entries: usize,
    pub inferred_from_next_board: usize,
    pub sampled_from_apc: usize,
    pub uniform_fallback_routes: BTreeSet<String>,
    pub unresolved_bus_legs: usize,
    pub dropped_journeys: usize,
    pub loop_journeys: usize,
    pub card_journeys: usize,
    pub apc_boardings: u64,
    pub card_bus_boardings: u64,
    /// Card boardings the counters did not see.
    pub apc_shortfall: u64,
    pub cash_riders: usize,
    pub journeys: usize,
    pub trips: usize,
}

#[derive(Debug, Clone, Default)]
struct ChainCounts {
    inferred: usize,
    sampled: usize,
    uniform: BTreeSet<String>,
    unresolved: usize,
    dropped: usize,
    loops: usize,
}

impl ChainCounts {
    fn absorb(&mut self, o: ChainCounts) {
        self.inferred += o.inferred;
        self.sampled += o.sampled;
        self.uniform.extend(o.uniform);
        self.unresolved += o.unresolved;
        self.dropped += o.dropped;
        self.loops += o.loops;
    }

    fn write(self, d: &mut Diagnostics) {
        d.inferred_from_next_board = self.inferred;
        d.sampled_from_apc = self.sampled;
        d.uniform_fallback_routes.extend(self.uniform);
        d.unresolved_bus_legs = self.unresolved;
        d.dropped_journeys = self.dropped;
        d.loop_journeys = self.loops;
    }
}

#[derive(Debug, Clone)]
pub struct OdEstimate {
    pub trips: Vec<Trip>,
    pub diagnostics: Diagnostics,
}

/// Pairs each card's transactions into legs. Rail entries and exits become
/// rail legs; bus boardings become bus legs with an unknown alighting. Exits
/// without an entry and entries without an exit are dropped and counted.
pub fn group_legs(transactions: &[Transaction], diag: &mut Diagnostics) -> Vec<Leg> {
    let mut by_card: BTreeMap<&str, Vec<&Transaction>> = BTreeMap::new();
    for t in transactions {
        match &t.card_id {
            Some(c) => by_card.entry(c.as_str()).or_default().push(t),
            None => diag.cash_transactions += 1,
        }
    }
    diag.cards = by_card.len();
    let mut legs = Vec::new();
    for (card, mut txs) in by_card {
        txs.sort_by(|a, b| a.timestamp_s.total_cmp(&b.timestamp_s));
        let mut open: Option<&Transaction> = None;
        for t in txs {
            match t.kind {
                TransactionKind::RailEntry => {
                    if open.replace(t).is_some() {
                        diag.unmatched_entries += 1;
                    }
                }
                TransactionKind::RailExit => match open.take() {
                    Some(e) => {
                        diag.rail_legs += 1;
                        legs.push(Leg {
                            card_id: card.to_string(),
                            mode: Mode::Rail,
                            route: e.route.clone(),
                            board: e.terminal.clone(),
                            board_s: e.timestamp_s,
                            alight: Some(t.terminal.clone()),
                            alight_s: Some(t.timestamp_s),
                        });
                    }
                    None => diag.unmatched_exits += 1,
                },
                TransactionKind::BusBoard => {
                    if open.take().is_some() {
                        diag.unmatched_entries += 1;
                    }
                    diag.bus_legs += 1;
                    legs.push(Leg {
                        card_id: card.to_string(),
                        mode: Mode::Bus,
                        route: t.route.clone(),
                        board: t.terminal.clone(),
                        board_s: t.timestamp_s,
                        alight: None,
                        alight_s: None,
                    });
                }
            }
        }
        if open.is_some() {
            diag.unmatched_entries += 1;
        }
    }
    legs
}

/// Stop order and alighting totals of every route seen by the counters.
#[derive(Debug, Clone, Default)]
struct RouteIndex {
    stops: BTreeMap<String, Vec<String>>,
    alightings: HashMap<(String, String), u64>,
    routes_at_stop: BTreeMap<String, BTreeSet<String>>,
}

impl RouteIndex {
    fn new(apc: &[ApcRecord]) -> Self {
        let mut order: BTreeMap<String, Vec<(u32, usize, String)>> = BTreeMap::new();
        let mut idx = RouteIndex::default();
        for (i, r) in apc.iter().enumerate() {
            let seq = order.entry(r.route.clone()).or_default();
            if !seq.iter().any(|(_, _, s)| *s == r.stop) {
                seq.push((r.sequence.unwrap_or(u32::MAX), i, r.stop.clone()));
            }
            *idx.alightings.entry((r.route.clone(), r.stop.clone())).or_default() += u64::from(r.alightings);
            idx.routes_at_stop.entry(r.stop.clone()).or_default().insert(r.route.clone());
        }
        for (route, mut seq) in order {
            seq.sort();
            idx.stops.insert(route, seq.into_iter().map(|(_, _, s)| s).collect());
        }
        idx
    }

    /// The route a boarding used: the recorded one, or the only route the
    /// counters saw at the stop.
    fn route_of(&self, route: Option<&str>, stop: &str) -> Option<String> {
        match route {
            Some(r) if !r.is_empty() => self.stops.contains_key(r).then(|| r.to_string()),
            _ => match self.routes_at_stop.get(stop) {
                Some(rs) if rs.len() == 1 => rs.iter().next().cloned(),
                _ => None,
            },
        }
    }

    /// Stops after `board` on `route`. Boarding at the last stop of a route,
    /// or off the route, makes every other stop a candidate.
    fn downstream(&self, route: &str, board: &str) -> Vec<&str> {
        let stops = match self.stops.get(route) {
            Some(s) => s,
            None => return Vec::new(),
        };
        let after: Vec<&str> = match stops.iter().position(|s| s == board) {
            Some(p) => stops[p + 1..].iter().map(String::as_str).collect(),
            None => Vec::new(),
        };
        if after.is_empty() {
            stops.iter().map(String::as_str).filter(|s| *s != board).collect()
        } else {
            after
        }
    }

    fn sample<R: Rng>(&self, route: &str, board: &str, rng: &mut R, counts: &mut ChainCounts) -> Option<String> {
        let cands = self.downstream(route, board);
        if cands.is_empty() {
            return None;
        }
        let weights: Vec<u64> = cands
            .iter()
            .map(|s| self.alightings.get(&(route.to_string(), s.to_string())).copied().unwrap_or(0))
            .collect();
        let k = match WeightedIndex::new(&weights) {
            Ok(w) => w.sample(rng),
            Err(_) => {
                if counts.uniform.insert(route.to_string()) {
                    log::warn!("route {route} has no recorded alightings; sampling stops uniformly");
                }
                rng.gen_range(0..cands.len())
            }
        };
        counts.sampled += 1;
        Some(cands[k].to_string())
    }
}

struct Context<'a> {
    routes: RouteIndex,
    coords: HashMap<&'a str, (f64, f64)>,
    config: &'a OdConfig,
}

impl Context<'_> {
    fn miles(&self, a: &str, b: &str) -> f64 {
        match (self.coords.get(a), self.coords.get(b)) {
            (Some(p), Some(q)) => haversine_miles(p.0, p.1, q.0, q.1),
            _ => f64::INFINITY,
        }
    }

    fn ride_s(&self, a: &str, b: &str) -> f64 {
        self.miles(a, b) * self.config.road_detour / self.config.bus_speed_mph * SECONDS_PER_HOUR
    }

    /// Resolves the alighting of every bus leg of one card and chains the
    /// legs into journeys.
    fn chain_card(&self, legs: &[Leg], rng: &mut ChaCha8Rng) -> (Vec<Journey>, ChainCounts) {
        let mut counts = ChainCounts::default();
        // (board, alight, board_s, alight_s) or None when unresolved
        let mut resolved: Vec<Option<(String, String, f64, f64)>> = Vec::with_capacity(legs.len());
        for (i, leg) in legs.iter().enumerate() {
            if let (Some(a), Some(t)) = (&leg.alight, leg.alight_s) {
                resolved.push(Some((leg.board.clone(), a.clone(), leg.board_s, t)));
                continue;
            }
            let route = self.routes.route_of(leg.route.as_deref(), &leg.board);
            // the last leg of the day heads back to where the day started
            let next = (legs.len() > 1).then(|| &legs[(i + 1) % legs.len()].board);
            let alight = route.as_deref().and_then(|r| {
                let by_next = next.and_then(|nb| {
                    self.routes
                        .downstream(r, &leg.board)
                        .into_iter()
                        .map(|s| (self.miles(s, nb), s))
                        .filter(|(d, _)| d.is_finite())
                        .min_by(|a, b| a.0.total_cmp(&b.0))
                        .map(|(_, s)| s.to_string())
                });
                match by_next {
                    Some(s) => {
                        counts.inferred += 1;
                        Some(s)
                    }
                    None => self.routes.sample(r, &leg.board, rng, &mut counts),
                }
            });
            match alight {
                Some(a) => {
                    let t = leg.board_s + self.ride_s(&leg.board, &a);
                    resolved.push(Some((leg.board.clone(), a, leg.board_s, t)));
                }
                None => {
                    counts.unresolved += 1;
                    resolved.push(None);
                }
            }
        }

        let mut journeys = Vec::new();
        let mut i = 0;
        while i < legs.len() {
            let mut j = i;
            let mut ok = resolved[i].is_some();
            let mut end_s = resolved[i].as_ref().map_or(legs[i].board_s, |r| r.3);
            while j + 1 < legs.len() && legs[j + 1].board_s - end_s <= self.config.transfer_window_s {
                j += 1;
                ok &= resolved[j].is_some();
                end_s = resolved[j].as_ref().map_or(legs[j].board_s, |r| r.3);
            }
            if !ok {
                counts.dropped += 1;
            } else {
                let first = resolved[i].as_ref().expect("resolved");
                let last = resolved[j].as_ref().expect("resolved");
                if first.0 == last.1 {
                    counts.loops += 1;
                } else {
                    journeys.push(Journey {
                        origin: first.0.clone(),
                        dest: last.1.clone(),
                        start_s: first.2,
                    });
                }
            }
            i = j + 1;
        }
        (journeys, counts)
    }
}

fn card_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn chain_all(
    ctx: &Context<'_>,
    legs: &[Leg],
    diag: &mut Diagnostics,
) -> Vec<Journey> {
    let mut groups: Vec<&[Leg]> = Vec::new();
    let mut start = 0;
    for i in 1..=legs.len() {
        if i == legs.len() || legs[i].card_id != legs[start].card_id {
            if i > start {
                groups.push(&legs[start..i]);
            }
            start = i;
        }
    }
    let seed = ctx.config.seed;
    let results = par::map_range(ctx.config.execution, groups.len(), |g| {
        ctx.chain_card(groups[g], &mut card_rng(seed, g as u64))
    });
    let mut counts = ChainCounts::default();
    let mut journeys = Vec::new();
    for (js, c) in results {
        journeys.extend(js);
        counts.absorb(c);
    }
    counts.write(diag);
    journeys
}

fn context<'a>(apc: &[ApcRecord], locations: &'a [Location], config: &'a OdConfig) -> Context<'a> {
    Context {
        routes: RouteIndex::new(apc),
        coords: locations.iter().map(|l| (l.id.as_str(), (l.lat, l.lon))).collect(),
        config,
    }
}

/// Chains legs (sorted by card, then time, as [`group_legs`] returns them)
/// into journeys. A bus alighting becomes the stop of the boarded route
/// nearest the card's next boarding; single-leg cards draw it from the APC
/// alighting distribution downstream of the boarding stop.
pub fn chain_journeys(
    legs: &[Leg],
    apc: &[ApcRecord],
    locations: &[Location],
    config: &OdConfig,
    diag: &mut Diagnostics,
) -> Vec<Journey> {
    let ctx = context(apc, locations, config);
    let journeys = chain_all(&ctx, legs, diag);
    diag.card_journeys = journeys.len();
    journeys
}

/// [`chain_journeys`] aggregated into trips.
pub fn chain_trips(
    legs: &[Leg],
    apc: &[ApcRecord],
    locations: &[Location],
    config: &OdConfig,
    diag: &mut Diagnostics,
) -> Vec<Trip> {
    aggregate(&chain_journeys(legs, apc, locations, config, diag), config.bucket_s)
}

/// Groups journeys with the same origin, destination and time bucket into one
/// trip whose request time is the bucket start.
pub fn aggregate(journeys: &[Journey], bucket_s: f64) -> Vec<Trip> {
    let mut counts: BTreeMap<(i64, &str, &str), u32> = BTreeMap::new();
    for j in journeys {
        let b = (j.start_s / bucket_s).floor() as i64;
        *counts.entry((b, &j.origin, &j.dest)).or_default() += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, ((b, o, d), p))| Trip::new(format!("od{i:05}"), o, d, p, b as f64 * bucket_s))
        .collect()
}

/// Boardings the counters saw beyond the card boardings, one per cash rider,
/// timed by the APC record left over after matching each card boarding to
/// the nearest-in-time counted boarding at the same stop.
fn cash_journeys(ctx: &Context<'_>, apc: &[ApcRecord], legs: &[Leg], diag: &mut Diagnostics) -> Vec<Journey> {
    let mut counted: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    for r in apc {
        diag.apc_boardings += u64::from(r.boardings);
        counted
            .entry((r.route.clone(), r.stop.clone()))
            .or_default()
            .extend(std::iter::repeat(r.timestamp_s).take(r.boardings as usize));
    }
    for v in counted.values_mut() {
        v.sort_by(f64::total_cmp);
    }
    for leg in legs.iter().filter(|l| l.mode == Mode::Bus) {
        diag.card_bus_boardings += 1;
        let route = ctx.routes.route_of(leg.route.as_deref(), &leg.board);
        let times = route.and_then(|r| counted.get_mut(&(r, leg.board.clone())));
        match times {
            Some(v) if !v.is_empty() => {
                let p = v.partition_point(|&t| t < leg.board_s);
                let k = match (p.checked_sub(1), (p < v.len()).then_some(p)) {
                    (Some(a), Some(b)) if leg.board_s - v[a] <= v[b] - leg.board_s => a,
                    (Some(a), None) => a,
                    (_, Some(b)) => b,
                    (None, None) => unreachable!("nonempty"),
                };
                v.remove(k);
            }
            _ => diag.apc_shortfall += 1,
        }
    }
    let mut rng = card_rng(ctx.config.seed, u64::MAX);
    let mut counts = ChainCounts::default();
    let mut journeys = Vec::new();
    for ((route, stop), times) in counted {
        for t in times {
            match ctx.routes.sample(&route, &stop, &mut rng, &mut counts) {
                Some(dest) => journeys.push(Journey {
                    origin: stop.clone(),
                    dest,
                    start_s: t,
                }),
                None => counts.unresolved += 1,
            }
        }
    }
    diag.cash_riders = journeys.len();
    diag.unresolved_bus_legs += counts.unresolved;
    diag.uniform_fallback_routes.extend(counts.uniform);
    journeys
}

/// Full estimation: legs, chaining, cash riders and aggregation. Transactions
/// at terminals missing from `locations` are dropped and counted.
pub fn estimate_od(
    transactions: &[Transaction],
    apc: &[ApcRecord],
    locations: &[Location],
    config: &OdConfig,
) -> crate::Result<OdEstimate> {
    config.validate()?;
    let mut diag = Diagnostics {
        transactions: transactions.len(),
        ..Diagnostics::default()
    };
    let known: BTreeSet<&str> = locations.iter().map(|l| l.id.as_str()).collect();
    let kept: Vec<Transaction> = transactions
        .iter()
        .filter(|t| known.contains(t.terminal.as_str()))
        .cloned()
        .collect();
    diag.unknown_terminals = transactions.len() - kept.len();
    let apc: Vec<ApcRecord> = apc.iter().filter(|r| known.contains(r.stop.as_str())).cloned().collect();

    let legs = group_legs(&kept, &mut diag);
    let ctx = context(&apc, locations, config);
    let mut journeys = chain_all(&ctx, &legs, &mut diag);
    diag.card_journeys = journeys.len();
    journeys.extend(cash_journeys(&ctx, &apc, &legs, &mut diag));
    diag.journeys = journeys.len();
    let trips = aggregate(&journeys, config.bucket_s);
    diag.trips = trips.len();
    Ok(OdEstimate { trips, diagnostics: diag })
}
