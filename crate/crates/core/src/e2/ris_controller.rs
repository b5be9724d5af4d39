use std::time::Instant;

use super::messages::{BeamAck, BeamCommand, Message, Target};
use super::transport::Transport;
use super::E2Error;
use crate::phy::{Codebook, Codeword};

/// Holds the loaded codebook and the active codeword.
#[derive(Debug, Clone)]
pub struct RisController {
    codebook: Codebook,
    active: usize,
    applied: u64,
}

impl RisController {
    pub fn new(codebook: Codebook, initial_index: usize) -> Result<Self, E2Error> {
        if initial_index >= codebook.len() {
            return Err(E2Error::Config(format!(
                "initial RIS index {initial_index} outside codebook of {}",
                codebook.len()
            )));
        }
        Ok(RisController {
            codebook,
            active: initial_index,
            applied: 0,
        })
    }

    pub fn active_index(&self) -> usize {
        self.active
    }

    pub fn active_codeword(&self) -> &Codeword {
        &self.codebook.codewords()[self.active]
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    /// Number of commands applied successfully.
    pub fn applied_count(&self) -> u64 {
        self.applied
    }

    /// Apply one command. Commands for other targets and out-of-range indices are
    /// rejected with an error ack and leave the state untouched.
    pub fn apply(&mut self, cmd: &BeamCommand, timestamp_ms: u64) -> BeamAck {
        let error = if cmd.target != Target::Ris {
            Some(format!("controller only drives RIS, got {}", cmd.target.as_str()))
        } else if cmd.beam_index as usize >= self.codebook.len() {
            Some(format!(
                "beam index {} outside codebook of {}",
                cmd.beam_index,
                self.codebook.len()
            ))
        } else {
            self.active = cmd.beam_index as usize;
            self.applied += 1;
            None
        };
        if let Some(e) = &error {
            log::warn!("rejected command seq {}: {e}", cmd.seq);
        }
        BeamAck {
            target: cmd.target,
            applied_index: self.active as u32,
            seq: cmd.seq,
            timestamp_ms,
            error,
        }
    }

    /// Serve commands until the peer disconnects. Ack timestamps are wall-clock
    /// milliseconds since serving began; the controller has no simulated clock.
    pub fn serve<T: Transport>(&mut self, transport: &mut T) -> Result<(), E2Error> {
        let start = Instant::now();
        while let Some(m) = transport.recv()? {
            match m {
                Message::Command(cmd) => {
                    let ack = self.apply(&cmd, start.elapsed().as_millis() as u64);
                    transport.send(&Message::Ack(ack))?;
                }
                Message::Hello(v) => log::debug!("peer hello, version {v}"),
                other => log::warn!("RIS controller ignoring {other:?}"),
            }
        }
        Ok(())
    }
}
