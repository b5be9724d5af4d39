//! Radar-equation link budget and the cascaded gNB-RIS-UE channel.

mod budget;
mod channel;
mod geometry;

pub use budget::{
    bistatic_rcs, db_to_linear, dbm_to_watts, linear_to_db, monostatic_rcs, received_power,
    received_power_linear, throughput_proxy, watts_to_dbm,
};
pub use channel::{
    gnb_boresight_beam, gnb_pose, interaction_vector, joint_beam_search, random_interaction_vector,
    ris_element_positions, rsrp, synthesize_channels, ue_pose, ArrayLayout, ArrayPose, CascadedChannel,
    CombinedLink, JointChoice, LinkEvaluator, RadioConfig, UeLink,
};
pub use geometry::{azimuth_from_ris, spherical, unit_vectors, LinkGeometry, RisFrame, Vec3};

#[derive(Debug, thiserror::Error)]
pub enum LinkError {
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("configuration error: {0}")]
    Config(String),
}
