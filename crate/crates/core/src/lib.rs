//! RIS-assisted mmWave link simulation and control-loop emulation.
//!
//! * [`phy`]: 1-bit codebooks, array factors, beam metrics.
//! * [`link`]: radar-equation budget, cascaded channels, RSRP.
//! * [`scenario`]: world geometry, trajectories, configuration files.
//! * [`e2`]: framed wire protocol and the RAN / RIS-controller endpoints.
//! * [`xapp`]: beam sweep, refinement and the two mobility trackers.
//! * [`harness`]: coverage and mobility experiments, traces, summaries.

pub mod phy;
pub mod link;
pub mod e2;
pub mod scenario;
pub mod xapp;
pub mod harness;
