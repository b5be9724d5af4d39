use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::coverage::CoverageGrid;
use super::mobility::command_counts;
use super::trace::{ExperimentTrace, TraceRow};
use super::HarnessError;
use crate::e2::Connectivity;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Percentiles {
    pub p5: f64,
    pub p50: f64,
    pub p95: f64,
}

/// Linear-interpolated percentile of sorted data, `q` in [0, 1].
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn percentiles(values: &[f64]) -> Percentiles {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Percentiles {
        p5: percentile(&v, 0.05),
        p50: percentile(&v, 0.5),
        p95: percentile(&v, 0.95),
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population variance.
pub fn variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|x| (x - m).powi(2)).sum::<f64>() / values.len() as f64
}

/// Empirical CDF as (value, P[X <= value]) steps over distinct values.
pub fn empirical_cdf(values: &[f64]) -> Vec<(f64, f64)> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, x) in v.iter().enumerate() {
        let p = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == *x => last.1 = p,
            _ => out.push((*x, p)),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub rows: usize,
    pub duration_ms: u64,
    /// Over all ticks, detached ones included.
    pub mean_rsrp_dbm: f64,
    pub rsrp_variance_db2: f64,
    pub rsrp_percentiles_dbm: Percentiles,
    /// Variance over attached ticks once tracking first starts.
    pub tracked_rsrp_variance_db2: Option<f64>,
    pub tracked_rows: usize,
    pub attached_fraction: f64,
    pub attach_count: u64,
    pub detach_count: u64,
    pub final_connectivity: Connectivity,
    pub ris_command_count: u64,
    pub ue_command_count: u64,
    /// Keyed `target:purpose`.
    pub command_counts: BTreeMap<String, u64>,
    /// Mean |true azimuth - active RIS beam angle| over attached ticks.
    pub mean_tracking_lag_deg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub cells: usize,
    pub mean_gain_db: f64,
    pub min_gain_db: f64,
    pub max_gain_db: f64,
    pub gain_percentiles_db: Percentiles,
    pub fraction_gain_at_least_10db: f64,
    pub mean_rsrp_with_ris_dbm: f64,
    pub mean_rsrp_without_ris_dbm: f64,
    pub gain_cdf: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Summary {
    Trace(TraceSummary),
    Grid(GridSummary),
}

/// Attached rows from the first entry into tracking onward.
pub fn tracked_segment(trace: &ExperimentTrace) -> Vec<&TraceRow> {
    let start = trace
        .rows
        .iter()
        .position(|r| r.events().any(|e| e.ends_with(">TRACKING")));
    match start {
        Some(k) => trace.rows[k..].iter().filter(|r| r.is_attached()).collect(),
        None => Vec::new(),
    }
}

pub fn summarize_trace(trace: &ExperimentTrace) -> Result<TraceSummary, HarnessError> {
    let (first, last) = match (trace.rows.first(), trace.rows.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(HarnessError::Config("cannot summarize an empty trace".into())),
    };
    let rsrp: Vec<f64> = trace.rows.iter().map(|r| r.rsrp_dbm).collect();
    let mut attach_count = 0;
    let mut detach_count = 0;
    let mut prev = Connectivity::Detached;
    for r in &trace.rows {
        match (prev, r.connectivity) {
            (Connectivity::Detached, Connectivity::Attached) => attach_count += 1,
            (Connectivity::Attached, Connectivity::Detached) => detach_count += 1,
            _ => {}
        }
        prev = r.connectivity;
    }
    let lags: Vec<f64> = trace
        .rows
        .iter()
        .filter(|r| r.is_attached())
        .map(|r| (r.true_azimuth_deg - r.ris_angle_deg).abs())
        .collect();
    let tracked: Vec<f64> = tracked_segment(trace).iter().map(|r| r.rsrp_dbm).collect();
    let commands = command_counts(trace);
    let count = |t: &str| {
        commands
            .iter()
            .filter(|(k, _)| k.starts_with(t))
            .map(|(_, v)| v)
            .sum()
    };
    Ok(TraceSummary {
        rows: trace.rows.len(),
        duration_ms: last.timestamp_ms - first.timestamp_ms,
        mean_rsrp_dbm: mean(&rsrp),
        rsrp_variance_db2: variance(&rsrp),
        rsrp_percentiles_dbm: percentiles(&rsrp),
        tracked_rsrp_variance_db2: (!tracked.is_empty()).then(|| variance(&tracked)),
        tracked_rows: tracked.len(),
        attached_fraction: trace.rows.iter().filter(|r| r.is_attached()).count() as f64 / rsrp.len() as f64,
        attach_count,
        detach_count,
        final_connectivity: last.connectivity,
        ris_command_count: count("ris:"),
        ue_command_count: count("ue:"),
        command_counts: commands,
        mean_tracking_lag_deg: (!lags.is_empty()).then(|| mean(&lags)),
    })
}

pub fn summarize_grid(grid: &CoverageGrid) -> Result<GridSummary, HarnessError> {
    if grid.cells.is_empty() {
        return Err(HarnessError::Config("cannot summarize an empty grid".into()));
    }
    let gains: Vec<f64> = grid.cells.iter().map(|c| c.gain_db).collect();
    let with: Vec<f64> = grid.cells.iter().map(|c| c.rsrp_with_ris_dbm).collect();
    let without: Vec<f64> = grid.cells.iter().map(|c| c.rsrp_without_ris_dbm).collect();
    Ok(GridSummary {
        cells: gains.len(),
        mean_gain_db: mean(&gains),
        min_gain_db: gains.iter().copied().fold(f64::INFINITY, f64::min),
        max_gain_db: gains.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        gain_percentiles_db: percentiles(&gains),
        fraction_gain_at_least_10db: gains.iter().filter(|&&g| g >= 10.0).count() as f64 / gains.len() as f64,
        mean_rsrp_with_ris_dbm: mean(&with),
        mean_rsrp_without_ris_dbm: mean(&without),
        gain_cdf: empirical_cdf(&gains),
    })
}
