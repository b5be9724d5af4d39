use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::e2::Connectivity;
use crate::xapp::LoggedEvent;

/// One report tick as seen by the harness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub timestamp_ms: u64,
    pub ue_x: f64,
    pub ue_y: f64,
    pub ue_z: f64,
    pub true_azimuth_deg: f64,
    pub ris_index: usize,
    pub ris_angle_deg: f64,
    pub ue_index: usize,
    /// Measured RSRP, including ticks where the UE was detached and nothing was reported.
    pub rsrp_dbm: f64,
    pub connectivity: Connectivity,
    /// xApp events caused by this report, `;`-separated.
    pub algorithm_event: String,
}

impl TraceRow {
    pub fn events(&self) -> impl Iterator<Item = &str> {
        self.algorithm_event.split(';').filter(|e| !e.is_empty())
    }

    pub fn is_attached(&self) -> bool {
        self.connectivity == Connectivity::Attached
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentTrace {
    pub rows: Vec<TraceRow>,
}

pub(crate) fn write_rows<T: Serialize, W: Write>(rows: &[T], w: W) -> Result<(), HarnessError> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub(crate) fn read_rows<T: serde::de::DeserializeOwned, R: Read>(r: R) -> Result<Vec<T>, HarnessError> {
    let mut rd = csv::Reader::from_reader(r);
    rd.deserialize().map(|row| row.map_err(HarnessError::from)).collect()
}

impl ExperimentTrace {
    pub const HEADER: &'static str = "timestamp_ms,ue_x,ue_y,ue_z,true_azimuth_deg,ris_index,ris_angle_deg,ue_index,rsrp_dbm,connectivity,algorithm_event";

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), HarnessError> {
        if self.rows.is_empty() {
            let mut w = w;
            writeln!(w, "{}", Self::HEADER)?;
            return Ok(());
        }
        write_rows(&self.rows, w)
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>, HarnessError> {
        let mut out = Vec::new();
        self.write_csv(&mut out)?;
        Ok(out)
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self, HarnessError> {
        Ok(ExperimentTrace { rows: read_rows(r)? })
    }

    pub fn save(&self, path: &Path) -> Result<(), HarnessError> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::read_csv(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    /// Rows in `[from_ms, to_ms)`.
    pub fn window(&self, from_ms: u64, to_ms: u64) -> impl Iterator<Item = &TraceRow> {
        self.rows
            .iter()
            .filter(move |r| r.timestamp_ms >= from_ms && r.timestamp_ms < to_ms)
    }
}

/// One line of an xApp event log, as written by a standalone xApp process.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub seq: u64,
    pub timestamp_ms: u64,
    pub event: String,
}

impl EventRecord {
    pub const HEADER: &'static str = "seq,timestamp_ms,event";

    pub fn from_logged(events: &[LoggedEvent]) -> Vec<EventRecord> {
        events
            .iter()
            .map(|e| EventRecord {
                seq: e.seq,
                timestamp_ms: e.timestamp_ms,
                event: e.event.to_string(),
            })
            .collect()
    }

    pub fn save_all(records: &[EventRecord], path: &Path) -> Result<(), HarnessError> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        if records.is_empty() {
            writeln!(w, "{}", Self::HEADER)?;
            return Ok(());
        }
        write_rows(records, w)
    }

    pub fn load_all(path: &Path) -> Result<Vec<EventRecord>, HarnessError> {
        read_rows(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

impl ExperimentTrace {
    /// Fill the event column from a separate log, matching rows by timestamp.
    /// Existing events are kept.
    pub fn merge_events(&mut self, records: &[EventRecord]) {
        let mut by_ts: std::collections::BTreeMap<u64, Vec<&str>> = Default::default();
        for r in records {
            by_ts.entry(r.timestamp_ms).or_default().push(&r.event);
        }
        for row in &mut self.rows {
            if let Some(ev) = by_ts.get(&row.timestamp_ms) {
                let mut all: Vec<&str> = row.algorithm_event.split(';').filter(|e| !e.is_empty()).collect();
                all.extend(ev);
                row.algorithm_event = all.join(";");
            }
        }
    }
}
