use std::collections::BTreeSet;

use super::config::XappConfig;
use super::tracker::{Event, Tracker};
use super::XappError;
use crate::e2::{BeamAck, BeamCommand, E2Error, Message, Target, Transport};

/// An event stamped with the report that caused it.
#[derive(Debug, Clone, PartialEq)]
pub struct LoggedEvent {
    pub seq: u64,
    pub timestamp_ms: u64,
    pub event: Event,
}

/// The xApp side of the loop: consumes RAN reports, drives the tracker and sends
/// its commands, one in flight per target.
pub struct XappEndpoint {
    tracker: Tracker,
    next_seq: u64,
    in_flight: BTreeSet<Target>,
    applied_ris: usize,
    log: Vec<LoggedEvent>,
}

impl XappEndpoint {
    pub fn new(cfg: XappConfig) -> Result<Self, XappError> {
        let applied_ris = cfg.initial_ris_index;
        Ok(XappEndpoint {
            tracker: Tracker::new(cfg)?,
            next_seq: 0,
            in_flight: BTreeSet::new(),
            applied_ris,
            log: Vec::new(),
        })
    }

    pub fn tracker(&self) -> &Tracker {
        &self.tracker
    }

    pub fn events(&self) -> &[LoggedEvent] {
        &self.log
    }

    pub fn into_events(self) -> Vec<LoggedEvent> {
        self.log
    }

    pub fn in_flight(&self) -> &BTreeSet<Target> {
        &self.in_flight
    }

    /// Send a command. Fails without sending if `target` already has one in flight.
    pub fn issue<T: Transport + ?Sized>(&mut self, link: &mut T, target: Target, index: usize) -> Result<u64, XappError> {
        if self.in_flight.contains(&target) {
            return Err(E2Error::InFlight(target).into());
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        link.send(&Message::Command(BeamCommand {
            target,
            beam_index: index as u32,
            seq,
        }))?;
        self.in_flight.insert(target);
        Ok(seq)
    }

    /// Block until the ack for (`target`, `seq`) arrives.
    pub fn await_ack<T: Transport + ?Sized>(&mut self, link: &mut T, target: Target, seq: u64) -> Result<BeamAck, XappError> {
        loop {
            match link.recv()? {
                None => return Err(E2Error::Disconnected.into()),
                Some(Message::Ack(a)) if a.target == target && a.seq == seq => {
                    self.in_flight.remove(&target);
                    return Ok(a);
                }
                Some(Message::Hello(_)) => {}
                Some(other) => {
                    return Err(E2Error::Protocol(format!("expected ack for {target:?} seq {seq}, got {other:?}")).into())
                }
            }
        }
    }

    /// Serve until the RAN disconnects. `e2` carries reports, UE/gNB commands and the
    /// per-report RIS state echo; `ris` reaches the RIS controller.
    pub fn run<E: Transport + ?Sized, R: Transport + ?Sized>(&mut self, e2: &mut E, ris: &mut R) -> Result<(), XappError> {
        ris.send(&Message::hello())?;
        while let Some(m) = e2.recv()? {
            let report = match m {
                Message::Kpi(r) => r,
                Message::Hello(v) => {
                    log::debug!("RAN hello, version {v}");
                    continue;
                }
                other => {
                    log::warn!("xApp ignoring {other:?}");
                    continue;
                }
            };
            let step = self.tracker.on_report(&report);
            let stamp = |event| LoggedEvent {
                seq: report.seq,
                timestamp_ms: report.timestamp_ms,
                event,
            };
            self.log.extend(step.events.into_iter().map(stamp));
            if let Some(cmd) = step.command {
                let ack = if cmd.target == Target::Ris {
                    let seq = self.issue(ris, cmd.target, cmd.index)?;
                    self.await_ack(ris, cmd.target, seq)?
                } else {
                    let seq = self.issue(e2, cmd.target, cmd.index)?;
                    self.await_ack(e2, cmd.target, seq)?
                };
                if let Some(message) = ack.error {
                    self.log.push(stamp(Event::AckError {
                        target: cmd.target,
                        message,
                    }));
                }
                self.tracker.resync(cmd.target, ack.applied_index as usize);
                if cmd.target == Target::Ris {
                    self.applied_ris = ack.applied_index as usize;
                }
            }
            // Tell the RAN which codeword the surface shows for the next tick.
            e2.send(&Message::Ack(BeamAck {
                target: Target::Ris,
                applied_index: self.applied_ris as u32,
                seq: report.seq,
                timestamp_ms: report.timestamp_ms,
                error: None,
            }))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::e2::{memory_pair, KpiReport};

    #[test]
    fn second_command_for_busy_target_is_refused() {
        let mut x = XappEndpoint::new(XappConfig::default()).unwrap();
        let (mut a, mut b) = memory_pair();
        let s = x.issue(&mut a, Target::Ris, 3).unwrap();
        assert!(matches!(x.issue(&mut a, Target::Ris, 4), Err(XappError::E2(E2Error::InFlight(Target::Ris)))));
        // Other targets are independent.
        let u = x.issue(&mut a, Target::Ue, 0).unwrap();
        b.send(&Message::Ack(BeamAck {
            target: Target::Ris,
            applied_index: 3,
            seq: s,
            timestamp_ms: 0,
            error: None,
        }))
        .unwrap();
        x.await_ack(&mut a, Target::Ris, s).unwrap();
        assert!(x.issue(&mut a, Target::Ris, 4).is_ok());
        assert!(x.in_flight().contains(&Target::Ue));
        let _ = u;
    }

    #[test]
    fn echoes_state_after_each_report() {
        let mut x = XappEndpoint::new(XappConfig::default()).unwrap();
        let (mut ran, mut e2) = memory_pair();
        let (mut xr, mut ctrl) = memory_pair();
        let h = std::thread::spawn(move || {
            x.run(&mut e2, &mut xr).unwrap();
            x
        });
        // Fake RIS controller: ack everything.
        let c = std::thread::spawn(move || {
            while let Some(m) = ctrl.recv().unwrap() {
                if let Message::Command(c) = m {
                    ctrl.send(&Message::Ack(BeamAck {
                        target: c.target,
                        applied_index: c.beam_index,
                        seq: c.seq,
                        timestamp_ms: 0,
                        error: None,
                    }))
                    .unwrap();
                }
            }
        });
        for k in 0..5 {
            ran.send(&Message::Kpi(KpiReport::detached(k * 50, k))).unwrap();
            let Some(Message::Ack(a)) = ran.recv().unwrap() else { panic!() };
            // Detached reports drive the sweep: index k after report k.
            assert_eq!((a.target, a.seq, a.applied_index), (Target::Ris, k, k as u32));
        }
        drop(ran);
        let x = h.join().unwrap();
        c.join().unwrap();
        assert_eq!(x.events().len(), 5);
        assert!(x.in_flight().is_empty());
    }
}
