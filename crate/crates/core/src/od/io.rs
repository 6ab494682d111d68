use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{ApcRecord, Diagnostics, Transaction, TransactionKind};
use crate::model::io::CsvTable;
use crate::Result;

/// `card_id,timestamp,terminal,kind,route`. `card_id` and `route` are
/// optional columns; `kind` is `bus_board`, `rail_entry` or `rail_exit`.
pub fn read_transactions(path: &Path) -> Result<Vec<Transaction>> {
    read_transactions_from(path, File::open(path)?)
}

pub(crate) fn read_transactions_from<R: Read>(path: &Path, rdr: R) -> Result<Vec<Transaction>> {
    let mut t = CsvTable::from_reader(path, rdr)?;
    let (time, terminal, kind) = (t.column("timestamp")?, t.column("terminal")?, t.column("kind")?);
    let card = t.optional_column("card_id");
    let route = t.optional_column("route");
    let mut out = Vec::new();
    t.for_each(|row| {
        let kind = match row.str(kind).to_ascii_lowercase().as_str() {
            "bus_board" | "busboard" => TransactionKind::BusBoard,
            "rail_entry" | "railentry" => TransactionKind::RailEntry,
            "rail_exit" | "railexit" => TransactionKind::RailExit,
            other => return Err(row.error(format!("unknown transaction kind `{other}`"))),
        };
        let timestamp_s: f64 = row.parse(time, "timestamp")?;
        if !timestamp_s.is_finite() || timestamp_s < 0.0 {
            return Err(row.error(format!("timestamp {timestamp_s} is not a time of day")));
        }
        let text = |c: Option<usize>| c.map(|c| row.str(c)).filter(|s| !s.is_empty()).map(str::to_string);
        out.push(Transaction {
            card_id: text(card),
            timestamp_s,
            terminal: row.str(terminal).to_string(),
            kind,
            route: text(route),
        });
        Ok(())
    })?;
    Ok(out)
}

/// `stop,route,timestamp,boardings,alightings` plus an optional `sequence`
/// column giving the stop order along the route.
pub fn read_apc(path: &Path) -> Result<Vec<ApcRecord>> {
    read_apc_from(path, File::open(path)?)
}

pub(crate) fn read_apc_from<R: Read>(path: &Path, rdr: R) -> Result<Vec<ApcRecord>> {
    let mut t = CsvTable::from_reader(path, rdr)?;
    let (stop, route, time, on, off) = (
        t.column("stop")?,
        t.column("route")?,
        t.column("timestamp")?,
        t.column("boardings")?,
        t.column("alightings")?,
    );
    let seq = t.optional_column("sequence");
    let mut out = Vec::new();
    t.for_each(|row| {
        out.push(ApcRecord {
            stop: row.str(stop).to_string(),
            route: row.str(route).to_string(),
            timestamp_s: row.parse(time, "timestamp")?,
            boardings: row.parse(on, "boardings")?,
            alightings: row.parse(off, "alightings")?,
            sequence: match seq {
                Some(c) if !row.str(c).is_empty() => Some(row.parse(c, "sequence")?),
                _ => None,
            },
        });
        Ok(())
    })?;
    Ok(out)
}

pub fn write_diagnostics<W: Write>(mut w: W, diag: &Diagnostics) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, diag)?;
    writeln!(w)?;
    Ok(())
}
