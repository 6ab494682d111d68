use std::io::Write;

use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct EpochLog {
    pub time_s: f64,
    pub pending: usize,
    pub served: usize,
    pub postponed: usize,
    pub objective: f64,
}

pub fn write_dispatch_log<W: Write>(w: W, log: &[EpochLog]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["time_s", "pending", "served", "postponed", "objective_s"])?;
    for e in log {
        out.write_record([
            e.time_s.to_string(),
            e.pending.to_string(),
            e.served.to_string(),
            e.postponed.to_string(),
            e.objective.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
