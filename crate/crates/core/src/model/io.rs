//! CSV readers and writers for locations, trips and travel matrices.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{LineStop, Location, TravelMatrix, Trip};
use crate::{Error, Result};

/// A CSV source with named-column access and line-numbered errors.
pub(crate) struct CsvTable<R: Read> {
    path: PathBuf,
    reader: csv::Reader<R>,
    columns: HashMap<String, usize>,
}

pub(crate) struct CsvRow<'a> {
    path: &'a Path,
    line: u64,
    record: csv::StringRecord,
}

impl CsvTable<File> {
    pub(crate) fn open(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        Self::from_reader(path, file)
    }
}

impl<R: Read> CsvTable<R> {
    pub(crate) fn from_reader(path: &Path, rdr: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(rdr);
        let columns = reader
            .headers()?
            .iter()
            .enumerate()
            .map(|(i, h)| (h.to_string(), i))
            .collect();
        Ok(CsvTable {
            path: path.to_path_buf(),
            reader,
            columns,
        })
    }

    pub(crate) fn column(&self, name: &str) -> Result<usize> {
        self.columns.get(name).copied().ok_or_else(|| Error::MissingColumn {
            path: self.path.clone(),
            column: name.to_string(),
        })
    }

    pub(crate) fn optional_column(&self, name: &str) -> Option<usize> {
        self.columns.get(name).copied()
    }

    pub(crate) fn for_each(&mut self, mut f: impl FnMut(CsvRow<'_>) -> Result<()>) -> Result<()> {
        let path = self.path.clone();
        for rec in self.reader.records() {
            let record = rec.map_err(|e| Error::Parse {
                path: path.clone(),
                line: e.position().map(|p| p.line()).unwrap_or(0),
                message: e.to_string(),
            })?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            f(CsvRow {
                path: &path,
                line,
                record,
            })?;
        }
        Ok(())
    }
}

impl CsvRow<'_> {
    pub(crate) fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line: self.line,
            message: message.into(),
        }
    }

    pub(crate) fn str(&self, col: usize) -> &str {
        self.record.get(col).unwrap_or("")
    }

    pub(crate) fn parse<T: FromStr>(&self, col: usize, what: &str) -> Result<T> {
        let raw = self.str(col);
        raw.parse()
            .map_err(|_| self.error(format!("cannot parse {what} from `{raw}`")))
    }

    pub(crate) fn flag(&self, col: usize, what: &str) -> Result<bool> {
        match self.str(col).to_ascii_lowercase().as_str() {
            "1" | "true" | "yes" | "y" => Ok(true),
            "0" | "false" | "no" | "n" | "" => Ok(false),
            other => Err(self.error(format!("cannot parse {what} from `{other}`"))),
        }
    }
}

/// `id,lat,lon,is_hub,is_rail_station,rail_line`. The `rail_line` cell holds
/// `line:position` entries separated by `;` (empty for non-stations).
pub fn read_locations(path: &Path) -> Result<Vec<Location>> {
    let mut t = CsvTable::open(path)?;
    let (id, lat, lon, hub, rail) = (
        t.column("id")?,
        t.column("lat")?,
        t.column("lon")?,
        t.column("is_hub")?,
        t.column("is_rail_station")?,
    );
    let line = t.column("rail_line")?;
    let mut out = Vec::new();
    t.for_each(|row| {
        let mut rail_lines = Vec::new();
        for entry in row.str(line).split(';').filter(|s| !s.is_empty()) {
            let (name, pos) = entry
                .split_once(':')
                .ok_or_else(|| row.error(format!("rail_line entry `{entry}` is not line:position")))?;
            let position = pos
                .parse()
                .map_err(|_| row.error(format!("bad rail position `{pos}`")))?;
            rail_lines.push(LineStop {
                line: name.to_string(),
                position,
            });
        }
        out.push(Location {
            id: row.str(id).to_string(),
            lat: row.parse(lat, "lat")?,
            lon: row.parse(lon, "lon")?,
            is_hub: row.flag(hub, "is_hub")?,
            is_rail_station: row.flag(rail, "is_rail_station")?,
            rail_lines,
        });
        Ok(())
    })?;
    Ok(out)
}

pub fn write_locations(path: &Path, locations: &[Location]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["id", "lat", "lon", "is_hub", "is_rail_station", "rail_line"])?;
    for l in locations {
        let lines: Vec<String> = l
            .rail_lines
            .iter()
            .map(|s| format!("{}:{}", s.line, s.position))
            .collect();
        w.write_record([
            l.id.clone(),
            format!("{:.6}", l.lat),
            format!("{:.6}", l.lon),
            l.is_hub.to_string(),
            l.is_rail_station.to_string(),
            lines.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `id,origin,dest,passengers,request_time_s`.
pub fn read_trips(path: &Path) -> Result<Vec<Trip>> {
    read_trips_from(path, File::open(path)?)
}

pub(crate) fn read_trips_from<R: Read>(path: &Path, rdr: R) -> Result<Vec<Trip>> {
    let mut t = CsvTable::from_reader(path, rdr)?;
    let (id, o, d, p, time) = (
        t.column("id")?,
        t.column("origin")?,
        t.column("dest")?,
        t.column("passengers")?,
        t.column("request_time_s")?,
    );
    let mut out = Vec::new();
    t.for_each(|row| {
        let trip = Trip {
            id: row.str(id).to_string(),
            origin: row.str(o).to_string(),
            dest: row.str(d).to_string(),
            passengers: row.parse(p, "passengers")?,
            request_time_s: row.parse(time, "request_time_s")?,
        };
        trip.validate().map_err(|e| row.error(e.to_string()))?;
        out.push(trip);
        Ok(())
    })?;
    Ok(out)
}

pub fn write_trips<W: Write>(w: W, trips: &[Trip]) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["id", "origin", "dest", "passengers", "request_time_s"])?;
    for t in trips {
        w.write_record([
            t.id.clone(),
            t.origin.clone(),
            t.dest.clone(),
            t.passengers.to_string(),
            format_seconds(t.request_time_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `origin,dest,seconds,miles`, indexed against `locations`.
pub fn read_matrix(path: &Path, locations: &[Location]) -> Result<TravelMatrix> {
    let index: HashMap<&str, usize> = locations
        .iter()
        .enumerate()
        .map(|(i, l)| (l.id.as_str(), i))
        .collect();
    let mut m = TravelMatrix::new(locations.iter().map(|l| l.id.clone()).collect());
    let mut t = CsvTable::open(path)?;
    let (o, d, s, mi) = (
        t.column("origin")?,
        t.column("dest")?,
        t.column("seconds")?,
        t.column("miles")?,
    );
    t.for_each(|row| {
        let from = *index
            .get(row.str(o))
            .ok_or_else(|| row.error(format!("unknown location `{}`", row.str(o))))?;
        let to = *index
            .get(row.str(d))
            .ok_or_else(|| row.error(format!("unknown location `{}`", row.str(d))))?;
        let seconds: f64 = row.parse(s, "seconds")?;
        let miles: f64 = row.parse(mi, "miles")?;
        if from != to && (seconds <= 0.0 || miles < 0.0) {
            return Err(row.error("travel time must be positive and distance nonnegative"));
        }
        m.insert(from, to, seconds, miles);
        Ok(())
    })?;
    Ok(m)
}

pub fn write_matrix(path: &Path, locations: &[Location], matrix: &TravelMatrix) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["origin", "dest", "seconds", "miles"])?;
    for (i, a) in locations.iter().enumerate() {
        for (j, b) in locations.iter().enumerate() {
            if i == j {
                continue;
            }
            if let Some((s, mi)) = matrix.get(i, j) {
                w.write_record([a.id.clone(), b.id.clone(), format!("{s:.1}"), format!("{mi:.4}")])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn format_seconds(s: f64) -> String {
    if s.fract() == 0.0 {
        format!("{s:.0}")
    } else {
        format!("{s:.3}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_column_is_named() {
        let data = "id,origin,dest,passengers\n1,a,b,2\n";
        let err = read_trips_from(Path::new("trips.csv"), data.as_bytes()).unwrap_err();
        match err {
            Error::MissingColumn { column, .. } => assert_eq!(column, "request_time_s"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn bad_value_reports_line() {
        let data = "id,origin,dest,passengers,request_time_s\n1,a,b,2,0\n2,a,b,x,5\n";
        let err = read_trips_from(Path::new("trips.csv"), data.as_bytes()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("trips.csv:3"), "{msg}");
        assert!(msg.contains("passengers"), "{msg}");
    }

    #[test]
    fn locations_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("locations.csv");
        let locs = vec![
            Location::new("R1", 33.7, -84.4)
                .rail_station("red", 1)
                .rail_station("gold", 1),
            Location::new("x", 33.8, -84.3),
        ];
        write_locations(&path, &locs).unwrap();
        let back = read_locations(&path).unwrap();
        assert_eq!(back, locs);
    }
}
