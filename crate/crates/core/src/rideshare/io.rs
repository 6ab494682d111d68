use std::path::Path;

use serde::Serialize;

use super::{FleetPlan, RequestClass, ShuttleRequest, ShuttleRoute};
use crate::model::NetworkModel;
use crate::Result;

#[derive(Serialize)]
struct RouteRecord<'a> {
    id: usize,
    class: &'static str,
    hub: Option<&'a str>,
    start_time_s: f64,
    end_time_s: f64,
    miles: f64,
    cost: f64,
    stops: Vec<StopRecord<'a>>,
}

#[derive(Serialize)]
struct StopRecord<'a> {
    location: &'a str,
    time_s: f64,
    pickups: Vec<String>,
    dropoffs: Vec<String>,
}

fn request_label(r: &ShuttleRequest) -> String {
    format!("{}/{}/{}", r.trip_id, r.passenger, r.leg)
}

pub fn write_routes(
    path: &Path,
    routes: &[ShuttleRoute],
    requests: &[ShuttleRequest],
    network: &NetworkModel,
) -> Result<()> {
    let name = |i: usize| network.location(i).id.as_str();
    let labels = |ids: &[usize]| ids.iter().map(|&i| request_label(&requests[i])).collect();
    let records: Vec<RouteRecord> = routes
        .iter()
        .enumerate()
        .map(|(id, r)| {
            let (class, hub) = match r.class {
                RequestClass::ToHub(h) => ("to_hub", Some(name(h))),
                RequestClass::FromHub(h) => ("from_hub", Some(name(h))),
                RequestClass::Direct => ("direct", None),
            };
            RouteRecord {
                id,
                class,
                hub,
                start_time_s: r.start_time_s,
                end_time_s: r.end_time_s,
                miles: r.miles,
                cost: r.cost,
                stops: r
                    .stops
                    .iter()
                    .map(|s| StopRecord {
                        location: name(s.location),
                        time_s: s.time_s,
                        pickups: labels(&s.pickups),
                        dropoffs: labels(&s.dropoffs),
                    })
                    .collect(),
            }
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&records)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[derive(Serialize)]
struct FleetRecord<'a> {
    fleet_size: usize,
    routes: usize,
    chains: &'a [Vec<usize>],
}

pub fn write_fleet(path: &Path, plan: &FleetPlan, route_count: usize) -> Result<()> {
    let rec = FleetRecord {
        fleet_size: plan.size,
        routes: route_count,
        chains: &plan.chains,
    };
    let mut text = serde_json::to_string_pretty(&rec)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
