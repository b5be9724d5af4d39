use serde::{Deserialize, Serialize};

/// Protocol version carried by the hello frame.
pub const PROTOCOL_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Target {
    #[serde(rename = "RIS")]
    Ris,
    #[serde(rename = "UE")]
    Ue,
    #[serde(rename = "GNB")]
    Gnb,
}

impl Target {
    pub fn as_str(&self) -> &'static str {
        match self {
            Target::Ris => "RIS",
            Target::Ue => "UE",
            Target::Gnb => "GNB",
        }
    }
}

/// Periodic measurement from the RAN. `rnti` and `rsrp_dbm` are absent while detached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KpiReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rnti: Option<u16>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rsrp_dbm: Option<f64>,
    pub timestamp_ms: u64,
    pub seq: u64,
}

impl KpiReport {
    pub fn attached(rnti: u16, rsrp_dbm: f64, timestamp_ms: u64, seq: u64) -> Self {
        KpiReport {
            rnti: Some(rnti),
            rsrp_dbm: Some(rsrp_dbm),
            timestamp_ms,
            seq,
        }
    }

    pub fn detached(timestamp_ms: u64, seq: u64) -> Self {
        KpiReport {
            rnti: None,
            rsrp_dbm: None,
            timestamp_ms,
            seq,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.rnti.is_some() == self.rsrp_dbm.is_some() && self.rsrp_dbm.is_none_or(f64::is_finite)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamCommand {
    pub target: Target,
    pub beam_index: u32,
    pub seq: u64,
}

/// Answer to a [`BeamCommand`]; `seq` echoes the command. `error` is set when the
/// command was rejected, in which case `applied_index` is the unchanged active index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamAck {
    pub target: Target,
    pub applied_index: u32,
    pub seq: u64,
    pub timestamp_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Hello(String),
    Kpi(KpiReport),
    Command(BeamCommand),
    Ack(BeamAck),
}

impl Message {
    pub fn hello() -> Self {
        Message::Hello(PROTOCOL_VERSION.to_string())
    }

    pub fn tag(&self) -> u8 {
        match self {
            Message::Hello(_) => TAG_HELLO,
            Message::Kpi(_) => TAG_KPI,
            Message::Command(_) => TAG_COMMAND,
            Message::Ack(_) => TAG_ACK,
        }
    }
}

pub const TAG_HELLO: u8 = 0x00;
pub const TAG_KPI: u8 = 0x01;
pub const TAG_COMMAND: u8 = 0x02;
pub const TAG_ACK: u8 = 0x03;
