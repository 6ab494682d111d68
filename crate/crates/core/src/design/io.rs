use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DesignSolution, DesignStatus, TraceRow, TripPath};
use crate::model::{arc_fixed_cost, ArcId, DesignParameters, Mode, NetworkModel};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignFile {
    pub status: DesignStatus,
    pub objective: ObjectiveRecord,
    pub open_bus_arcs: Vec<OpenArcRecord>,
    pub paths: Vec<PathRecord>,
    #[serde(default)]
    pub dropped_trips: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveRecord {
    pub total: f64,
    pub fixed_cost: f64,
    pub passenger: f64,
    pub lower_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpenArcRecord {
    pub origin: String,
    pub dest: String,
    pub frequency: u32,
    pub travel_time_s: f64,
    pub fixed_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub trip: String,
    pub cost: f64,
    pub legs: Vec<LegRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegRecord {
    pub mode: Mode,
    pub origin: String,
    pub dest: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub frequency: Option<u32>,
}

impl DesignFile {
    pub fn from_solution(
        design: &DesignSolution,
        network: &NetworkModel,
        params: &DesignParameters,
    ) -> Self {
        let name = |i: usize| network.location(i).id.clone();
        DesignFile {
            status: design.status,
            objective: ObjectiveRecord {
                total: design.objective_total,
                fixed_cost: design.fixed_cost_part,
                passenger: design.passenger_part,
                lower_bound: design.lower_bound,
            },
            open_bus_arcs: design
                .open_bus_arcs
                .iter()
                .map(|&id| {
                    let a = network.arc(id);
                    OpenArcRecord {
                        origin: name(a.origin),
                        dest: name(a.dest),
                        frequency: a.frequency.unwrap_or(0),
                        travel_time_s: a.travel_time_s,
                        fixed_cost: arc_fixed_cost(a, params).unwrap_or(0.0),
                    }
                })
                .collect(),
            paths: design
                .paths
                .iter()
                .map(|p| PathRecord {
                    trip: p.trip_id.clone(),
                    cost: p.cost,
                    legs: p
                        .arcs
                        .iter()
                        .map(|&id| {
                            let a = network.arc(id);
                            LegRecord {
                                mode: a.mode,
                                origin: name(a.origin),
                                dest: name(a.dest),
                                frequency: a.frequency,
                            }
                        })
                        .collect(),
                })
                .collect(),
            dropped_trips: design.dropped_trips.clone(),
        }
    }

    /// Resolves arc references against `network`.
    pub fn to_solution(&self, network: &NetworkModel) -> Result<DesignSolution> {
        let find = |mode: Mode, o: &str, d: &str, f: Option<u32>| -> Result<ArcId> {
            let (oi, di) = (network.location_index(o)?, network.location_index(d)?);
            if mode == Mode::Shuttle {
                return network.shuttle_arc(oi, di).ok_or_else(|| Error::MissingTravel {
                    origin: o.to_string(),
                    dest: d.to_string(),
                });
            }
            network
                .hub_arcs()
                .iter()
                .copied()
                .find(|&id| {
                    let a = network.arc(id);
                    a.mode == mode && a.origin == oi && a.dest == di && a.frequency == f
                })
                .ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "design references unknown {mode} arc {o} -> {d} at frequency {f:?}"
                    ))
                })
        };
        let mut open_bus_arcs = self
            .open_bus_arcs
            .iter()
            .map(|r| find(Mode::Bus, &r.origin, &r.dest, Some(r.frequency)))
            .collect::<Result<Vec<_>>>()?;
        open_bus_arcs.sort();
        let paths = self
            .paths
            .iter()
            .map(|p| {
                Ok(TripPath {
                    trip_id: p.trip.clone(),
                    cost: p.cost,
                    arcs: p
                        .legs
                        .iter()
                        .map(|l| find(l.mode, &l.origin, &l.dest, l.frequency))
                        .collect::<Result<_>>()?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(DesignSolution {
            status: self.status,
            open_bus_arcs,
            objective_total: self.objective.total,
            fixed_cost_part: self.objective.fixed_cost,
            passenger_part: self.objective.passenger,
            lower_bound: self.objective.lower_bound,
            paths,
            dropped_trips: self.dropped_trips.clone(),
            trace: Vec::new(),
        })
    }
}

pub fn write_design(
    path: &Path,
    design: &DesignSolution,
    network: &NetworkModel,
    params: &DesignParameters,
) -> Result<()> {
    let file = DesignFile::from_solution(design, network, params);
    let mut text = serde_json::to_string_pretty(&file)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_design(path: &Path, network: &NetworkModel) -> Result<DesignSolution> {
    let text = std::fs::read_to_string(path)?;
    let file: DesignFile = serde_json::from_str(&text)?;
    file.to_solution(network)
}

pub fn write_trace<W: Write>(w: W, trace: &[TraceRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["iteration", "lower_bound", "upper_bound", "cuts_added"])?;
    for r in trace {
        out.write_record([
            r.iteration.to_string(),
            r.lower_bound.to_string(),
            r.upper_bound.to_string(),
            r.cuts_added.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
