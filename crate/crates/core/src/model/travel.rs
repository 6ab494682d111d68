use std::collections::HashMap;

use crate::{Error, Result};

const EARTH_RADIUS_MI: f64 = 3958.8;

pub fn haversine_miles(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_MI * a.sqrt().asin()
}

/// Road travel times (seconds) and distances (miles) between location
/// indices. A location to itself is always zero.
#[derive(Debug, Clone, Default)]
pub struct TravelMatrix {
    entries: HashMap<(u32, u32), (f64, f64)>,
    names: Vec<String>,
}

impl TravelMatrix {
    pub fn new(names: Vec<String>) -> Self {
        TravelMatrix {
            entries: HashMap::new(),
            names,
        }
    }

    /// Dense matrix from coordinates: haversine distance stretched by
    /// `detour` and driven at `speed_mph`.
    pub fn from_coordinates(coords: &[(String, f64, f64)], speed_mph: f64, detour: f64) -> Self {
        let mut m = TravelMatrix::new(coords.iter().map(|c| c.0.clone()).collect());
        for (i, a) in coords.iter().enumerate() {
            for (j, b) in coords.iter().enumerate() {
                if i != j {
                    let miles = haversine_miles(a.1, a.2, b.1, b.2) * detour;
                    m.insert(i, j, miles / speed_mph * 3600.0, miles);
                }
            }
        }
        m
    }

    pub fn insert(&mut self, from: usize, to: usize, seconds: f64, miles: f64) {
        self.entries.insert((from as u32, to as u32), (seconds, miles));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, from: usize, to: usize) -> Option<(f64, f64)> {
        if from == to {
            return Some((0.0, 0.0));
        }
        self.entries.get(&(from as u32, to as u32)).copied()
    }

    pub fn lookup(&self, from: usize, to: usize) -> Result<(f64, f64)> {
        self.get(from, to).ok_or_else(|| Error::MissingTravel {
            origin: self.name(from),
            dest: self.name(to),
        })
    }

    /// Travel time in seconds; panics on a pair that was never validated.
    pub fn time(&self, from: usize, to: usize) -> f64 {
        self.get(from, to)
            .unwrap_or_else(|| panic!("no travel time {} -> {}", self.name(from), self.name(to)))
            .0
    }

    pub fn miles(&self, from: usize, to: usize) -> f64 {
        self.get(from, to)
            .unwrap_or_else(|| panic!("no distance {} -> {}", self.name(from), self.name(to)))
            .1
    }

    fn name(&self, idx: usize) -> String {
        self.names.get(idx).cloned().unwrap_or_else(|| format!("#{idx}"))
    }
}
