//! 1-bit RIS beam synthesis with random pre-phasing.
//!
//! Element phases are computed for a plane-wave illumination and a desired
//! reflection direction, compensated for the fixed pre-phase of each unit
//! cell, and rounded to 0/180 degree states. Far-field behavior is evaluated
//! with the isotropic-element array factor.

mod angles;
mod aperture;
mod codebook;
mod pattern;
mod phase;
mod prephase;

pub use angles::{azimuth_cut, default_cut, Direction, SteeringPair};
pub use aperture::{ApertureParams, RisAperture, SPEED_OF_LIGHT};
pub use codebook::{build_codebook, scan_len, Codebook, HEADER_LEN};
pub use pattern::{
    array_factor, array_factor_from_phase, beam_metrics, codeword_phase_deg, BeamMetrics,
    BeamPattern, Codeword,
};
pub use phase::{
    continuous_phase, progressive_phase, quantize, quantize_value, state_phase_deg, wrap_deg,
};
pub use prephase::{generate_pre_phase, optimize_pre_phase, worst_case_suppression, PrePhaseChoice};

#[derive(Debug, thiserror::Error)]
pub enum PhyError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("beam synthesis failed: {0}")]
    SynthesisFailure(String),
    #[error("malformed codebook file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
