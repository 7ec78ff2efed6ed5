//! CSV writers. Floats use the shortest round-trip representation.

use std::io::Write;

use crate::analytic::{SignalRow, Table};
use crate::runner::RecoveryRecord;

pub const RECOVERY_HEADER: [&str; 11] =
    ["graph_type", "k", "d", "s", "n", "method", "rep", "recovered", "seed", "wall_ms", "error"];

pub fn write_recovery_csv<W: Write>(out: W, rows: &[RecoveryRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECOVERY_HEADER)?;
    for r in rows {
        w.write_record([
            r.graph_type.clone(),
            r.k.to_string(),
            r.d.to_string(),
            r.s.to_string(),
            r.n.to_string(),
            r.method.clone(),
            r.rep.to_string(),
            u8::from(r.recovered).to_string(),
            r.seed.to_string(),
            r.wall_ms.to_string(),
            r.error.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_signal_csv<W: Write>(out: W, rows: &[SignalRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r", "delta1", "delta2", "delta2_tilde"])?;
    for r in rows {
        w.write_record([r.r.to_string(), r.delta1.to_string(), r.delta2.to_string(), r.delta2_tilde.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_table_csv<W: Write>(out: W, table: &Table) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row.iter().map(f64::to_string))?;
    }
    w.flush()?;
    Ok(())
}
