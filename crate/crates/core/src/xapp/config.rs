use serde::{Deserialize, Serialize};

use super::XappError;

/// Mobility algorithm run after initial access.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Continuous left/center/right probing.
    #[serde(rename = "neighbor")]
    NeighborScan,
    /// Probe only when the RSRP window shows a falling trend.
    #[serde(rename = "trend")]
    TrendTriggered,
    /// Sweep until the first attach, then never command again.
    #[serde(rename = "none")]
    Disabled,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::NeighborScan => "neighbor",
            Algorithm::TrendTriggered => "trend",
            Algorithm::Disabled => "none",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = XappError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "neighbor" => Ok(Algorithm::NeighborScan),
            "trend" => Ok(Algorithm::TrendTriggered),
            "none" => Ok(Algorithm::Disabled),
            other => Err(XappError::Config(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct XappConfig {
    pub algorithm: Algorithm,
    /// Filled in from the built codebook when loading a scenario.
    pub ris_codebook_len: usize,
    pub ue_codebook_len: usize,
    pub probe_dwell_reports: usize,
    pub window_size: usize,
    pub trend_significance: f64,
    /// Reports between UE-beam probe cycles; 0 keeps the UE beam fixed.
    pub ue_adapt_period: usize,
    pub ris_step_deg: f64,
    /// Minimum RSRP that counts as an attach while sweeping.
    pub attach_threshold_dbm: f64,
    pub initial_ris_index: usize,
    pub initial_ue_index: usize,
}

impl Default for XappConfig {
    fn default() -> Self {
        XappConfig {
            algorithm: Algorithm::NeighborScan,
            ris_codebook_len: 21,
            ue_codebook_len: 1,
            probe_dwell_reports: 1,
            window_size: 8,
            trend_significance: 0.05,
            ue_adapt_period: 0,
            ris_step_deg: 2.0,
            attach_threshold_dbm: -95.0,
            initial_ris_index: 0,
            initial_ue_index: 0,
        }
    }
}

impl XappConfig {
    pub fn validate(&self) -> Result<(), XappError> {
        let bad = |m: String| Err(XappError::Config(m));
        if self.window_size < 3 {
            return bad(format!("window_size {} must be >= 3", self.window_size));
        }
        if self.probe_dwell_reports < 1 {
            return bad("probe_dwell_reports must be >= 1".into());
        }
        if !(self.trend_significance > 0.0 && self.trend_significance < 1.0) {
            return bad("trend_significance must be in (0, 1)".into());
        }
        if self.ris_codebook_len == 0 || self.ue_codebook_len == 0 {
            return bad("codebooks must be non-empty".into());
        }
        if self.initial_ris_index >= self.ris_codebook_len {
            return bad("initial_ris_index out of range".into());
        }
        if self.initial_ue_index >= self.ue_codebook_len {
            return bad("initial_ue_index out of range".into());
        }
        if !(self.ris_step_deg > 0.0) {
            return bad("ris_step_deg must be > 0".into());
        }
        Ok(())
    }
}
