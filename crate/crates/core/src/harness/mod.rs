//! Experiment drivers: coverage sweeps, mobility runs, traces and summaries.

mod coverage;
mod mobility;
mod summary;
mod trace;

pub use coverage::{baseline_psi, cell_position, run_coverage, CoverageCell, CoverageGrid};
pub use mobility::{build_trace, command_counts, run_mobility, MobilityOptions, MobilityRun, TransportKind};
pub use summary::{
    empirical_cdf, mean, percentile, summarize_grid, summarize_trace, tracked_segment, variance, GridSummary, Percentiles, Summary,
    TraceSummary,
};
pub use trace::{EventRecord, ExperimentTrace, TraceRow};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Scenario(#[from] crate::scenario::ScenarioError),
    #[error(transparent)]
    Phy(#[from] crate::phy::PhyError),
    #[error(transparent)]
    Link(#[from] crate::link::LinkError),
    #[error(transparent)]
    E2(#[from] crate::e2::E2Error),
    #[error(transparent)]
    Xapp(#[from] crate::xapp::XappError),
}
