//! Shared data model: locations, arcs, the design multigraph, trips and the
//! design parameters every downstream stage works with.

mod cluster;
mod cost;
pub mod io;
mod network;
mod travel;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use cluster::{cluster_stops, Clustering};
pub use cost::{alpha_from_value_of_time, arc_fixed_cost, arc_trip_cost};
pub use network::{build_network, HubPolicy, NetworkModel, RailLine};
pub use travel::{haversine_miles, TravelMatrix};

pub const SECONDS_PER_HOUR: f64 = 3600.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Shuttle,
    Bus,
    Rail,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Shuttle, Mode::Bus, Mode::Rail];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Shuttle => "shuttle",
            Mode::Bus => "bus",
            Mode::Rail => "rail",
        }
    }

    pub fn is_fixed_route(self) -> bool {
        matches!(self, Mode::Bus | Mode::Rail)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Membership of a rail station in a line, with its position along the line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineStop {
    pub line: String,
    pub position: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub id: String,
    pub lat: f64,
    pub lon: f64,
    pub is_hub: bool,
    pub is_rail_station: bool,
    #[serde(default)]
    pub rail_lines: Vec<LineStop>,
}

impl Location {
    pub fn new(id: impl Into<String>, lat: f64, lon: f64) -> Self {
        Location {
            id: id.into(),
            lat,
            lon,
            is_hub: false,
            is_rail_station: false,
            rail_lines: Vec::new(),
        }
    }

    pub fn hub(mut self) -> Self {
        self.is_hub = true;
        self
    }

    pub fn rail_station(mut self, line: impl Into<String>, position: u32) -> Self {
        self.is_hub = true;
        self.is_rail_station = true;
        self.rail_lines.push(LineStop {
            line: line.into(),
            position,
        });
        self
    }

    pub fn is_bus_only_hub(&self) -> bool {
        self.is_hub && !self.is_rail_station
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArcId(pub usize);

/// A directed connection of the design multigraph. Indices refer to
/// [`NetworkModel::locations`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub id: ArcId,
    pub origin: usize,
    pub dest: usize,
    pub mode: Mode,
    /// Vehicles per horizon; present iff the mode is bus or rail.
    pub frequency: Option<u32>,
    pub travel_time_s: f64,
    pub distance_mi: f64,
}

impl Arc {
    pub fn travel_time_h(&self) -> f64 {
        self.travel_time_s / SECONDS_PER_HOUR
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trip {
    pub id: String,
    pub origin: String,
    pub dest: String,
    pub passengers: u32,
    pub request_time_s: f64,
}

impl Trip {
    pub fn new(
        id: impl Into<String>,
        origin: impl Into<String>,
        dest: impl Into<String>,
        passengers: u32,
        request_time_s: f64,
    ) -> Self {
        Trip {
            id: id.into(),
            origin: origin.into(),
            dest: dest.into(),
            passengers,
            request_time_s,
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        if self.passengers == 0 {
            return Err(crate::Error::InvalidInput(format!(
                "trip {} has no passengers",
                self.id
            )));
        }
        if self.origin == self.dest {
            return Err(crate::Error::InvalidInput(format!(
                "trip {} starts and ends at {}",
                self.id, self.origin
            )));
        }
        Ok(())
    }
}

/// Weights and costs of the design objective. Times are seconds here and
/// converted to hours inside the cost formulas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DesignParameters {
    pub alpha: f64,
    pub horizon_s: f64,
    pub extended_horizon_s: f64,
    pub transfer_limit: usize,
    pub bus_cost_per_hour: f64,
    pub rail_cost_per_hour: Option<f64>,
    pub shuttle_cost_per_hour: f64,
    pub shuttle_cost_per_mile_estimate: f64,
}

impl Default for DesignParameters {
    fn default() -> Self {
        DesignParameters {
            alpha: alpha_from_value_of_time(7.25),
            horizon_s: 4.0 * SECONDS_PER_HOUR,
            extended_horizon_s: 6.0 * SECONDS_PER_HOUR,
            transfer_limit: 4,
            bus_cost_per_hour: 72.15,
            rail_cost_per_hour: None,
            shuttle_cost_per_hour: 27.31,
            shuttle_cost_per_mile_estimate: 1.0,
        }
    }
}

impl DesignParameters {
    pub fn horizon_h(&self) -> f64 {
        self.horizon_s / SECONDS_PER_HOUR
    }

    pub fn validate(&self) -> crate::Result<()> {
        let bad = |msg: &str| Err(crate::Error::InvalidInput(msg.to_string()));
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad("alpha must lie in [0, 1]");
        }
        if self.transfer_limit < 1 {
            return bad("transfer limit K must be at least 1");
        }
        if self.extended_horizon_s < self.horizon_s {
            return bad("extended horizon must not be shorter than the horizon");
        }
        if self.horizon_s <= 0.0 {
            return bad("horizon must be positive");
        }
        Ok(())
    }
}
