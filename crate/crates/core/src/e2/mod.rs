//! E2-lite: framed control-plane protocol between RAN, xApp and RIS controller.
//!
//! Frames are a 4-byte big-endian payload length, a 1-byte tag and a JSON object
//! with sorted keys. See `docs/protocol.md` for the byte layout.

mod codec;
mod config;
mod connectivity;
mod messages;
mod ran;
mod ris_controller;
mod transport;

pub use codec::{decode, encode, DecodeError, FrameDecoder, HEADER_LEN, MAX_PAYLOAD};
pub use config::RanConfig;
pub use connectivity::{Connectivity, ConnectivityMachine};
pub use messages::{
    BeamAck, BeamCommand, KpiReport, Message, Target, PROTOCOL_VERSION, TAG_ACK, TAG_COMMAND, TAG_HELLO,
    TAG_KPI,
};
pub use ran::{RanEmulator, RanOptions, RanSample, GNB_CODEBOOK_LEN};
pub use ris_controller::RisController;
pub use transport::{memory_pair, MemoryTransport, TcpTransport, Transport};

#[derive(Debug, thiserror::Error)]
pub enum E2Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error("peer disconnected")]
    Disconnected,
    #[error("a {0:?} command is already in flight")]
    InFlight(Target),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Link(#[from] crate::link::LinkError),
}
