//! CSV helpers shared by the training log, simulator traces and run traces.

use std::io;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::sim::Execution;

pub fn write_rows<W: io::Write, T: Serialize>(writer: W, rows: impl IntoIterator<Item = T>) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: io::Read, T: DeserializeOwned>(reader: R) -> Result<Vec<T>, csv::Error> {
    csv::Reader::from_reader(reader).deserialize().collect()
}

pub fn write_rows_to_path<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), csv::Error> {
    let file = std::fs::File::create(path)?;
    write_rows(io::BufWriter::new(file), rows)
}

/// One simulated gait cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimTraceRow {
    pub eval_id: u64,
    pub cycle: u32,
    pub x_m: f64,
    pub y_m: f64,
    pub theta_rad: f64,
    pub sim_time_s: f64,
}

impl SimTraceRow {
    pub fn from_execution(ex: &Execution) -> impl Iterator<Item = SimTraceRow> + '_ {
        ex.cycles.iter().map(move |c| SimTraceRow {
            eval_id: ex.eval_id,
            cycle: c.cycle,
            x_m: c.pose.x,
            y_m: c.pose.y,
            theta_rad: c.pose.theta,
            sim_time_s: c.sim_time,
        })
    }
}
