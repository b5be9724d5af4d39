use serde::de::DeserializeOwned;
use serde::Serialize;

use super::messages::*;

/// Largest accepted payload.
pub const MAX_PAYLOAD: usize = 1 << 20;
/// Length prefix plus tag.
pub const HEADER_LEN: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    /// More input is required; `needed` is the minimum number of additional bytes.
    #[error("incomplete frame, need {needed} more bytes")]
    Incomplete { needed: usize },
    /// The frame is well delimited but its content is invalid. `consumed` bytes can be
    /// skipped to reach the next frame.
    #[error("protocol error at byte {offset}: {reason}")]
    Protocol {
        offset: usize,
        consumed: usize,
        reason: String,
    },
    /// Length prefix exceeds [`MAX_PAYLOAD`]; the stream cannot be resynchronized.
    #[error("frame length {0} exceeds limit")]
    TooLarge(usize),
}

fn canonical<T: Serialize>(v: &T) -> Vec<u8> {
    // Value objects are BTreeMap-backed, so keys come out sorted.
    let value = serde_json::to_value(v).expect("message types always serialize");
    serde_json::to_vec(&value).expect("values always serialize")
}

/// Encode one frame: big-endian payload length, tag, canonical payload.
pub fn encode(message: &Message) -> Vec<u8> {
    let payload = match message {
        Message::Hello(v) => v.as_bytes().to_vec(),
        Message::Kpi(m) => canonical(m),
        Message::Command(m) => canonical(m),
        Message::Ack(m) => canonical(m),
    };
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.extend_from_slice(&(payload.len() as u32).to_be_bytes());
    out.push(message.tag());
    out.extend_from_slice(&payload);
    out
}

fn parse<T: DeserializeOwned>(payload: &[u8], consumed: usize) -> Result<T, DecodeError> {
    serde_json::from_slice(payload).map_err(|e| {
        // Payloads are single-line, so the column locates the byte.
        let col = e.column().max(1);
        DecodeError::Protocol {
            offset: HEADER_LEN + col - 1,
            consumed,
            reason: e.to_string(),
        }
    })
}

/// Decode the first frame of `buf`, returning the message and the bytes consumed.
pub fn decode(buf: &[u8]) -> Result<(Message, usize), DecodeError> {
    if buf.len() < HEADER_LEN {
        return Err(DecodeError::Incomplete {
            needed: HEADER_LEN - buf.len(),
        });
    }
    let len = u32::from_be_bytes([buf[0], buf[1], buf[2], buf[3]]) as usize;
    if len > MAX_PAYLOAD {
        return Err(DecodeError::TooLarge(len));
    }
    let total = HEADER_LEN + len;
    if buf.len() < total {
        return Err(DecodeError::Incomplete {
            needed: total - buf.len(),
        });
    }
    let payload = &buf[HEADER_LEN..total];
    let semantic = |reason: &str| DecodeError::Protocol {
        offset: HEADER_LEN,
        consumed: total,
        reason: reason.to_string(),
    };
    let message = match buf[4] {
        TAG_HELLO => {
            let v = std::str::from_utf8(payload).map_err(|_| semantic("hello payload is not UTF-8"))?;
            Message::Hello(v.to_string())
        }
        TAG_KPI => {
            let m: KpiReport = parse(payload, total)?;
            if !m.is_valid() {
                return Err(semantic("rnti and rsrp_dbm must be both present or both absent"));
            }
            Message::Kpi(m)
        }
        TAG_COMMAND => Message::Command(parse(payload, total)?),
        TAG_ACK => Message::Ack(parse(payload, total)?),
        tag => {
            return Err(DecodeError::Protocol {
                offset: 4,
                consumed: total,
                reason: format!("unknown message tag 0x{tag:02x}"),
            })
        }
    };
    Ok((message, total))
}

/// Buffers a byte stream and yields whole frames.
#[derive(Debug, Default)]
pub struct FrameDecoder {
    buf: Vec<u8>,
}

impl FrameDecoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    pub fn buffered(&self) -> usize {
        self.buf.len()
    }

    /// Next complete frame. `None` when more bytes are needed. Invalid frames are
    /// consumed and reported; an oversized length prefix clears the buffer.
    pub fn next_frame(&mut self) -> Option<Result<Message, DecodeError>> {
        match decode(&self.buf) {
            Ok((m, n)) => {
                self.buf.drain(..n);
                Some(Ok(m))
            }
            Err(DecodeError::Incomplete { .. }) => None,
            Err(e @ DecodeError::Protocol { consumed, .. }) => {
                self.buf.drain(..consumed);
                Some(Err(e))
            }
            Err(e @ DecodeError::TooLarge(_)) => {
                self.buf.clear();
                Some(Err(e))
            }
        }
    }
}
