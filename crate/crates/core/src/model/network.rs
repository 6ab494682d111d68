use std::collections::{BTreeMap, HashMap, HashSet};

use super::{haversine_miles, Arc, ArcId, Location, Mode, TravelMatrix, Trip};
use crate::{Error, Result};

/// How the hub set is determined.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum HubPolicy {
    /// Use the `is_hub` flags of the input locations.
    #[default]
    Flagged,
    /// Keep rail stations and flagged hubs, then add up to `count` bus-only
    /// hubs, greedily taking the location with the most passenger activity
    /// that is at least `min_separation_mi` from every hub chosen so far.
    Greedy { count: usize, min_separation_mi: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RailLine {
    pub name: String,
    /// Station indices in line order.
    pub stations: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct NetworkModel {
    pub locations: Vec<Location>,
    pub arcs: Vec<Arc>,
    pub bus_frequencies: Vec<u32>,
    pub rail_frequencies: Vec<u32>,
    pub rail_lines: Vec<RailLine>,
    pub matrix: TravelMatrix,
    index: HashMap<String, usize>,
    hubs: Vec<usize>,
    bus_arcs: Vec<ArcId>,
    hub_arcs: Vec<ArcId>,
    shuttle: HashMap<(usize, usize), ArcId>,
}

impl NetworkModel {
    pub fn location_index(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownLocation(id.to_string()))
    }

    pub fn location(&self, idx: usize) -> &Location {
        &self.locations[idx]
    }

    pub fn arc(&self, id: ArcId) -> &Arc {
        &self.arcs[id.0]
    }

    /// Hub indices in input order.
    pub fn hubs(&self) -> &[usize] {
        &self.hubs
    }

    pub fn is_hub(&self, idx: usize) -> bool {
        self.locations[idx].is_hub
    }

    /// The arcs eligible for design decisions.
    pub fn bus_arcs(&self) -> &[ArcId] {
        &self.bus_arcs
    }

    /// Bus and rail arcs, i.e. every arc between two hubs.
    pub fn hub_arcs(&self) -> &[ArcId] {
        &self.hub_arcs
    }

    pub fn shuttle_arc(&self, from: usize, to: usize) -> Option<ArcId> {
        self.shuttle.get(&(from, to)).copied()
    }

    /// Position of a bus arc inside [`Self::bus_arcs`].
    pub fn bus_arc_position(&self, id: ArcId) -> Option<usize> {
        self.bus_arcs.binary_search(&id).ok()
    }

    /// Stable textual key, e.g. `bus:H1->R2@8`.
    pub fn arc_key(&self, id: ArcId) -> String {
        let a = self.arc(id);
        let (o, d) = (&self.locations[a.origin].id, &self.locations[a.dest].id);
        match a.frequency {
            Some(f) => format!("{}:{o}->{d}@{f}", a.mode),
            None => format!("{}:{o}->{d}", a.mode),
        }
    }

    pub fn arcs_of_mode(&self, mode: Mode) -> impl Iterator<Item = &Arc> {
        self.arcs.iter().filter(move |a| a.mode == mode)
    }

    /// Adds the shuttle arcs a trip needs if they are not present yet.
    pub fn ensure_trip_arcs(&mut self, trip: &Trip) -> Result<()> {
        let o = self.location_index(&trip.origin)?;
        let d = self.location_index(&trip.dest)?;
        let hubs = self.hubs.clone();
        for h in hubs {
            self.add_shuttle(o, h)?;
            self.add_shuttle(h, d)?;
        }
        self.add_shuttle(o, d)
    }

    fn add_shuttle(&mut self, from: usize, to: usize) -> Result<()> {
        if self.shuttle.contains_key(&(from, to)) {
            return Ok(());
        }
        let (t, d) = self.matrix.lookup(from, to)?;
        let id = ArcId(self.arcs.len());
        self.arcs.push(Arc {
            id,
            origin: from,
            dest: to,
            mode: Mode::Shuttle,
            frequency: None,
            travel_time_s: t,
            distance_mi: d,
        });
        self.shuttle.insert((from, to), id);
        Ok(())
    }

    fn push_fixed(&mut self, from: usize, to: usize, mode: Mode, frequency: u32) -> Result<ArcId> {
        let (t, d) = self.matrix.lookup(from, to)?;
        if t <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "{mode} arc {} -> {} needs a positive travel time",
                self.locations[from].id, self.locations[to].id
            )));
        }
        let id = ArcId(self.arcs.len());
        self.arcs.push(Arc {
            id,
            origin: from,
            dest: to,
            mode,
            frequency: Some(frequency),
            travel_time_s: t,
            distance_mi: d,
        });
        self.hub_arcs.push(id);
        if mode == Mode::Bus {
            self.bus_arcs.push(id);
        }
        Ok(id)
    }
}

/// Builds the design multigraph.
///
/// * rail arcs at the (single) rail frequency between consecutive stations of
///   every line, both directions;
/// * bus arcs for every bus frequency between every ordered pair of bus-only
///   hubs, and between each bus-only hub and its three nearest rail stations
///   (road travel time, ties by station id), both directions;
/// * shuttle arcs per trip: origin to every hub, every hub to destination,
///   and origin to destination.
///
/// A shuttle arc whose endpoints coincide (a trip starting at a hub) has zero
/// time and distance.
pub fn build_network(
    mut locations: Vec<Location>,
    hub_policy: &HubPolicy,
    trips: &[Trip],
    bus_frequencies: &[u32],
    rail_frequencies: &[u32],
    matrix: TravelMatrix,
) -> Result<NetworkModel> {
    let mut index = HashMap::with_capacity(locations.len());
    for (i, loc) in locations.iter().enumerate() {
        if loc.is_rail_station && !loc.is_hub {
            return Err(Error::InvalidInput(format!(
                "rail station {} must be a hub",
                loc.id
            )));
        }
        if index.insert(loc.id.clone(), i).is_some() {
            return Err(Error::InvalidInput(format!("duplicate location id {}", loc.id)));
        }
    }
    if let HubPolicy::Greedy {
        count,
        min_separation_mi,
    } = hub_policy
    {
        select_bus_hubs(&mut locations, &index, trips, *count, *min_separation_mi)?;
    }
    let hubs: Vec<usize> = (0..locations.len()).filter(|&i| locations[i].is_hub).collect();
    if hubs.is_empty() {
        return Err(Error::InvalidInput("the hub set is empty".into()));
    }
    let mut bus_frequencies = bus_frequencies.to_vec();
    bus_frequencies.sort_unstable();
    bus_frequencies.dedup();
    let mut rail_frequencies = rail_frequencies.to_vec();
    rail_frequencies.sort_unstable();
    rail_frequencies.dedup();
    if bus_frequencies.contains(&0) || rail_frequencies.contains(&0) {
        return Err(Error::InvalidInput("frequencies must be positive".into()));
    }

    let rail_lines = rail_lines(&locations);
    let mut net = NetworkModel {
        locations,
        arcs: Vec::new(),
        bus_frequencies,
        rail_frequencies,
        rail_lines,
        matrix,
        index,
        hubs,
        bus_arcs: Vec::new(),
        hub_arcs: Vec::new(),
        shuttle: HashMap::new(),
    };

    if !net.rail_lines.is_empty() {
        let freq = *net.rail_frequencies.first().ok_or_else(|| {
            Error::InvalidInput("rail lines are present but no rail frequency is given".into())
        })?;
        let mut seen = HashSet::new();
        let pairs: Vec<(usize, usize)> = net
            .rail_lines
            .iter()
            .flat_map(|l| l.stations.windows(2).map(|w| (w[0], w[1])))
            .collect();
        for (a, b) in pairs {
            for (from, to) in [(a, b), (b, a)] {
                if seen.insert((from, to)) {
                    net.push_fixed(from, to, Mode::Rail, freq)?;
                }
            }
        }
    }

    let bus_only: Vec<usize> = net
        .hubs
        .iter()
        .copied()
        .filter(|&h| net.locations[h].is_bus_only_hub())
        .collect();
    let stations: Vec<usize> = net
        .hubs
        .iter()
        .copied()
        .filter(|&h| net.locations[h].is_rail_station)
        .collect();
    let mut pairs = Vec::new();
    for &a in &bus_only {
        for &b in &bus_only {
            if a != b {
                pairs.push((a, b));
            }
        }
    }
    for &b in &bus_only {
        let mut ranked = Vec::with_capacity(stations.len());
        for &s in &stations {
            let (t, _) = net.matrix.lookup(b, s)?;
            ranked.push((t, net.locations[s].id.clone(), s));
        }
        ranked.sort_by(|x, y| x.0.total_cmp(&y.0).then_with(|| x.1.cmp(&y.1)));
        for (_, _, s) in ranked.into_iter().take(3) {
            pairs.push((b, s));
            pairs.push((s, b));
        }
    }
    let freqs = net.bus_frequencies.clone();
    for (a, b) in pairs {
        for &f in &freqs {
            net.push_fixed(a, b, Mode::Bus, f)?;
        }
    }

    for trip in trips {
        net.ensure_trip_arcs(trip)?;
    }
    Ok(net)
}

fn rail_lines(locations: &[Location]) -> Vec<RailLine> {
    let mut lines: BTreeMap<&str, Vec<(u32, usize)>> = BTreeMap::new();
    for (i, loc) in locations.iter().enumerate() {
        for stop in &loc.rail_lines {
            lines.entry(stop.line.as_str()).or_default().push((stop.position, i));
        }
    }
    lines
        .into_iter()
        .map(|(name, mut stops)| {
            stops.sort();
            RailLine {
                name: name.to_string(),
                stations: stops.into_iter().map(|s| s.1).collect(),
            }
        })
        .collect()
}

fn select_bus_hubs(
    locations: &mut [Location],
    index: &HashMap<String, usize>,
    trips: &[Trip],
    count: usize,
    min_separation_mi: f64,
) -> Result<()> {
    let mut activity = vec![0u64; locations.len()];
    for t in trips {
        for id in [&t.origin, &t.dest] {
            let i = *index
                .get(id.as_str())
                .ok_or_else(|| Error::UnknownLocation(id.clone()))?;
            activity[i] += u64::from(t.passengers);
        }
    }
    let mut candidates: Vec<usize> = (0..locations.len())
        .filter(|&i| !locations[i].is_hub && activity[i] > 0)
        .collect();
    candidates.sort_by(|&a, &b| {
        activity[b]
            .cmp(&activity[a])
            .then_with(|| locations[a].id.cmp(&locations[b].id))
    });
    let mut chosen: Vec<usize> = (0..locations.len()).filter(|&i| locations[i].is_hub).collect();
    let mut added = 0;
    for c in candidates {
        if added == count {
            break;
        }
        let far = chosen.iter().all(|&h| {
            haversine_miles(
                locations[c].lat,
                locations[c].lon,
                locations[h].lat,
                locations[h].lon,
            ) >= min_separation_mi
        });
        if far {
            locations[c].is_hub = true;
            chosen.push(c);
            added += 1;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix_for(locs: &[Location]) -> TravelMatrix {
        let coords: Vec<_> = locs.iter().map(|l| (l.id.clone(), l.lat, l.lon)).collect();
        TravelMatrix::from_coordinates(&coords, 20.0, 1.3)
    }

    fn small() -> Vec<Location> {
        vec![
            Location::new("R1", 33.70, -84.40).rail_station("red", 1),
            Location::new("R2", 33.75, -84.40).rail_station("red", 2),
            Location::new("B1", 33.80, -84.30).hub(),
            Location::new("o", 33.71, -84.35),
            Location::new("d", 33.79, -84.33),
        ]
    }

    #[test]
    fn bus_arc_count_one_bus_hub_two_stations() {
        let locs = small();
        let m = matrix_for(&locs);
        let trips = [Trip::new("t", "o", "d", 1, 0.0)];
        let net = build_network(locs, &HubPolicy::Flagged, &trips, &[8, 12, 16], &[24], m).unwrap();
        assert_eq!(net.bus_arcs().len(), 12);
        assert_eq!(net.arcs_of_mode(Mode::Rail).count(), 2);
        // o->3 hubs, 3 hubs->d, o->d
        assert_eq!(net.arcs_of_mode(Mode::Shuttle).count(), 7);
    }

    #[test]
    fn no_bus_only_hubs_means_no_bus_arcs() {
        let mut locs = small();
        locs[2].is_hub = false;
        let m = matrix_for(&locs);
        let net = build_network(locs, &HubPolicy::Flagged, &[], &[8, 12, 16], &[24], m).unwrap();
        assert!(net.bus_arcs().is_empty());
    }

    #[test]
    fn shuttle_arcs_for_one_trip_two_hubs() {
        let locs = vec![
            Location::new("h1", 33.70, -84.40).hub(),
            Location::new("h2", 33.75, -84.40).hub(),
            Location::new("o", 33.71, -84.35),
            Location::new("d", 33.79, -84.33),
        ];
        let m = matrix_for(&locs);
        let trips = [Trip::new("t", "o", "d", 1, 0.0)];
        let net = build_network(locs, &HubPolicy::Flagged, &trips, &[], &[], m).unwrap();
        assert_eq!(net.arcs_of_mode(Mode::Shuttle).count(), 5);
        // h1 <-> h2 bus arcs exist in both directions only when frequencies are given
        assert!(net.bus_arcs().is_empty());
    }

    #[test]
    fn nearest_three_stations_with_id_tiebreak() {
        let mut locs = vec![Location::new("B", 0.0, 0.0).hub()];
        for (k, name) in ["S4", "S3", "S2", "S1"].iter().enumerate() {
            locs.push(Location::new(*name, 0.01 * (k as f64 + 1.0), 0.0).rail_station("l", k as u32));
        }
        let mut m = TravelMatrix::new(locs.iter().map(|l| l.id.clone()).collect());
        for i in 0..locs.len() {
            for j in 0..locs.len() {
                if i != j {
                    m.insert(i, j, 600.0, 1.0);
                }
            }
        }
        let net = build_network(locs, &HubPolicy::Flagged, &[], &[8], &[24], m).unwrap();
        let mut targets: Vec<&str> = net
            .bus_arcs()
            .iter()
            .map(|&a| net.arc(a))
            .filter(|a| a.origin == 0)
            .map(|a| net.locations[a.dest].id.as_str())
            .collect();
        targets.sort();
        assert_eq!(targets, vec!["S1", "S2", "S3"]);
    }

    #[test]
    fn missing_matrix_entry_names_the_pair() {
        let locs = small();
        let m = TravelMatrix::new(locs.iter().map(|l| l.id.clone()).collect());
        let err = build_network(locs, &HubPolicy::Flagged, &[], &[8], &[24], m).unwrap_err();
        assert!(matches!(err, Error::MissingTravel { .. }), "{err}");
        assert!(err.to_string().contains("R1 -> R2"), "{err}");
    }

    #[test]
    fn rail_station_without_hub_flag_is_rejected() {
        let mut locs = small();
        locs[0].is_hub = false;
        let m = matrix_for(&locs);
        assert!(build_network(locs, &HubPolicy::Flagged, &[], &[8], &[24], m).is_err());
    }

    #[test]
    fn greedy_hub_selection_respects_separation() {
        let locs = vec![
            Location::new("R", 33.70, -84.40).rail_station("red", 1),
            Location::new("busy", 33.90, -84.40),
            Location::new("near_busy", 33.901, -84.40),
            Location::new("far", 33.50, -84.40),
        ];
        let m = matrix_for(&locs);
        let trips = [
            Trip::new("a", "busy", "R", 9, 0.0),
            Trip::new("b", "near_busy", "R", 5, 0.0),
            Trip::new("c", "far", "R", 1, 0.0),
        ];
        let policy = HubPolicy::Greedy {
            count: 2,
            min_separation_mi: 4.0,
        };
        let net = build_network(locs, &policy, &trips, &[8], &[24], m).unwrap();
        let hubs: Vec<&str> = net.hubs().iter().map(|&h| net.locations[h].id.as_str()).collect();
        assert_eq!(hubs, vec!["R", "busy", "far"]);
    }
}
