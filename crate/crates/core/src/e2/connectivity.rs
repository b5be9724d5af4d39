use serde::{Deserialize, Serialize};

use super::RanConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Connectivity {
    Attached,
    Detached,
}

impl Connectivity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Connectivity::Attached => "ATTACHED",
            Connectivity::Detached => "DETACHED",
        }
    }
}

impl std::str::FromStr for Connectivity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ATTACHED" => Ok(Connectivity::Attached),
            "DETACHED" => Ok(Connectivity::Detached),
            other => Err(format!("unknown connectivity {other:?}")),
        }
    }
}

/// Attach/detach hysteresis. The UE starts detached.
#[derive(Debug, Clone)]
pub struct ConnectivityMachine {
    state: Connectivity,
    below: usize,
    attach_dbm: f64,
    detach_dbm: f64,
    dwell: usize,
}

impl ConnectivityMachine {
    pub fn new(cfg: &RanConfig) -> Self {
        ConnectivityMachine {
            state: Connectivity::Detached,
            below: 0,
            attach_dbm: cfg.attach_threshold_dbm,
            detach_dbm: cfg.detach_threshold_dbm,
            dwell: cfg.detach_dwell,
        }
    }

    pub fn state(&self) -> Connectivity {
        self.state
    }

    /// Feed one measurement and return the state that applies to it.
    pub fn observe(&mut self, rsrp_dbm: f64) -> Connectivity {
        match self.state {
            Connectivity::Detached => {
                if rsrp_dbm >= self.attach_dbm {
                    self.state = Connectivity::Attached;
                    self.below = 0;
                }
            }
            Connectivity::Attached => {
                // NaN counts as below.
                if rsrp_dbm >= self.detach_dbm {
                    self.below = 0;
                } else {
                    self.below += 1;
                    if self.below >= self.dwell {
                        self.state = Connectivity::Detached;
                        self.below = 0;
                    }
                }
            }
        }
        self.state
    }
}
