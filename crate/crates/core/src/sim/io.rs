use std::io::Write;

use serde_json::json;

use super::{OccupancySample, PassengerRecord, RoadSegment, SimulationReport};
use crate::model::{Mode, NetworkModel};
use crate::Result;

pub fn write_report<W: Write>(mut w: W, report: &SimulationReport) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, report)?;
    writeln!(w)?;
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_passengers<W: Write>(w: W, records: &[PassengerRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "trip_id",
        "passenger",
        "start_s",
        "end_s",
        "completed",
        "wait_s",
        "in_vehicle_s",
        "total_s",
        "shuttle_wait_s",
        "bus_wait_s",
        "rail_wait_s",
        "legs",
    ])?;
    for r in records {
        let mw = |m: Mode| opt(r.mode_wait_s.get(&m).copied());
        out.write_record([
            r.trip_id.clone(),
            r.passenger.to_string(),
            r.start_s.to_string(),
            opt(r.end_s),
            r.completed.to_string(),
            r.wait_s.to_string(),
            r.in_vehicle_s.to_string(),
            opt(r.total_s()),
            mw(Mode::Shuttle),
            mw(Mode::Bus),
            mw(Mode::Rail),
            r.legs.join("|"),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_occupancy<W: Write>(w: W, samples: &[OccupancySample]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["time_s", "mode", "vehicle", "occupancy_pax", "capacity_pax"])?;
    for s in samples {
        out.write_record([
            s.time_s.to_string(),
            s.mode.to_string(),
            s.vehicle.clone(),
            s.occupancy.to_string(),
            s.capacity.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// One LineString feature per traversed (origin, destination, mode).
pub fn write_road_usage<W: Write>(mut w: W, segments: &[RoadSegment], network: &NetworkModel) -> Result<()> {
    let features: Vec<_> = segments
        .iter()
        .map(|s| {
            let (a, b) = (network.location(s.from), network.location(s.to));
            json!({
                "type": "Feature",
                "geometry": {
                    "type": "LineString",
                    "coordinates": [[a.lon, a.lat], [b.lon, b.lat]],
                },
                "properties": {
                    "from": a.id,
                    "to": b.id,
                    "mode": s.mode,
                    "vehicles": s.vehicles,
                    "miles": s.miles,
                },
            })
        })
        .collect();
    let doc = json!({ "type": "FeatureCollection", "features": features });
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)?;
    Ok(())
}
