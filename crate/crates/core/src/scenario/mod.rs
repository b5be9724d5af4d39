//! World geometry, UE motion and scenario documents.

mod config;
mod trajectory;

pub use crate::link::azimuth_from_ris;
pub use config::{
    Baseline, CoverageSection, GeometrySection, PortsSection, PrePhaseSection, RadioSection,
    RisSection, Scenario, ScenarioConfig, TrajectorySection, UeSection, PRESETS,
};
pub use trajectory::{Trajectory, Waypoint};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("scenario configuration error: {0}")]
    Config(String),
    #[error("cannot parse scenario: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Phy(#[from] crate::phy::PhyError),
    #[error(transparent)]
    Link(#[from] crate::link::LinkError),
    #[error(transparent)]
    E2(#[from] crate::e2::E2Error),
    #[error(transparent)]
    Xapp(#[from] crate::xapp::XappError),
}
