use std::collections::HashMap;

use super::{haversine_miles, Location, Trip};

const FEET_PER_MILE: f64 = 5280.0;

/// Result of merging nearby stops: every original id maps to the id of the
/// stop that represents its cluster.
#[derive(Debug, Clone, Default)]
pub struct Clustering {
    pub representative: HashMap<String, String>,
}

impl Clustering {
    pub fn map<'a>(&'a self, id: &'a str) -> &'a str {
        self.representative.get(id).map(String::as_str).unwrap_or(id)
    }

    /// Rewrites trip endpoints; trips that collapse onto a single stop are
    /// returned separately.
    pub fn apply(&self, trips: &[Trip]) -> (Vec<Trip>, Vec<Trip>) {
        let mut kept = Vec::with_capacity(trips.len());
        let mut collapsed = Vec::new();
        for t in trips {
            let mut t = t.clone();
            t.origin = self.map(&t.origin).to_string();
            t.dest = self.map(&t.dest).to_string();
            if t.origin == t.dest {
                collapsed.push(t);
            } else {
                kept.push(t);
            }
        }
        (kept, collapsed)
    }
}

/// Greedy clustering: stops are visited by descending demand (ties by id);
/// an unassigned stop becomes a representative and absorbs every unassigned
/// non-hub stop within `radius_ft`. Hubs are never absorbed.
pub fn cluster_stops(locations: &[Location], trips: &[Trip], radius_ft: f64) -> Clustering {
    let mut demand: HashMap<&str, u64> = HashMap::new();
    for t in trips {
        *demand.entry(t.origin.as_str()).or_default() += u64::from(t.passengers);
        *demand.entry(t.dest.as_str()).or_default() += u64::from(t.passengers);
    }
    let mut order: Vec<usize> = (0..locations.len()).collect();
    order.sort_by(|&a, &b| {
        let (da, db) = (
            demand.get(locations[a].id.as_str()).copied().unwrap_or(0),
            demand.get(locations[b].id.as_str()).copied().unwrap_or(0),
        );
        locations[b]
            .is_hub
            .cmp(&locations[a].is_hub)
            .then(db.cmp(&da))
            .then_with(|| locations[a].id.cmp(&locations[b].id))
    });
    let radius_mi = radius_ft / FEET_PER_MILE;
    let mut assigned = vec![false; locations.len()];
    let mut out = Clustering::default();
    for &rep in &order {
        if assigned[rep] {
            continue;
        }
        assigned[rep] = true;
        let r = &locations[rep];
        for &other in &order {
            let o = &locations[other];
            if assigned[other] || o.is_hub {
                continue;
            }
            if haversine_miles(r.lat, r.lon, o.lat, o.lon) <= radius_mi {
                assigned[other] = true;
                out.representative.insert(o.id.clone(), r.id.clone());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn busiest_stop_absorbs_neighbours() {
        let locs = vec![
            Location::new("a", 33.7000, -84.4),
            Location::new("b", 33.7010, -84.4), // ~365 ft north of a
            Location::new("c", 33.7200, -84.4),
        ];
        let trips = vec![
            Trip::new("1", "b", "c", 5, 0.0),
            Trip::new("2", "a", "c", 1, 0.0),
            Trip::new("3", "a", "b", 1, 0.0),
        ];
        let cl = cluster_stops(&locs, &trips, 1500.0);
        assert_eq!(cl.map("a"), "b");
        assert_eq!(cl.map("c"), "c");
        let (kept, collapsed) = cl.apply(&trips);
        assert_eq!(kept.len(), 2);
        assert_eq!(collapsed.len(), 1);
        assert_eq!(collapsed[0].id, "3");
    }
}
