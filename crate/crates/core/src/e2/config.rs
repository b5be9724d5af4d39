use serde::{Deserialize, Serialize};

use super::E2Error;

/// RAN emulator settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RanConfig {
    pub report_interval_ms: u64,
    /// Standard deviation of the dB-domain measurement noise.
    pub noise_sigma_db: f64,
    pub detach_threshold_dbm: f64,
    pub attach_threshold_dbm: f64,
    /// Consecutive sub-threshold reports before detaching.
    pub detach_dwell: usize,
    pub rnti: u16,
}

impl Default for RanConfig {
    fn default() -> Self {
        RanConfig {
            report_interval_ms: 50,
            noise_sigma_db: 1.0,
            detach_threshold_dbm: -100.0,
            attach_threshold_dbm: -95.0,
            detach_dwell: 5,
            rnti: 0x4601,
        }
    }
}

impl RanConfig {
    pub fn validate(&self) -> Result<(), E2Error> {
        if self.report_interval_ms == 0 {
            return Err(E2Error::Config("report_interval_ms must be > 0".into()));
        }
        if !(self.attach_threshold_dbm > self.detach_threshold_dbm) {
            return Err(E2Error::Config("attach threshold must exceed detach threshold".into()));
        }
        if self.detach_dwell == 0 {
            return Err(E2Error::Config("detach_dwell must be >= 1".into()));
        }
        if !(self.noise_sigma_db >= 0.0) {
            return Err(E2Error::Config("noise_sigma_db must be >= 0".into()));
        }
        Ok(())
    }
}
