//! RSRP-driven RIS and UE beam management.

mod config;
mod endpoint;
mod tracker;
mod trend;

pub use config::{Algorithm, XappConfig};
pub use endpoint::{LoggedEvent, XappEndpoint};
pub use tracker::{select_best, Command, Event, Mode, Purpose, Step, Tracker};
pub use trend::{classify, mann_kendall_s, mann_kendall_variance, moving_average3, Trend, TrendDetector, TrendResult};

#[derive(Debug, thiserror::Error)]
pub enum XappError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    E2(#[from] crate::e2::E2Error),
}
