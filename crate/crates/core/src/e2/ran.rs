use ndarray::Array1;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::connectivity::{Connectivity, ConnectivityMachine};
use super::messages::{BeamAck, BeamCommand, KpiReport, Message, Target};
use super::transport::Transport;
use super::{E2Error, RanConfig};
use crate::link::{azimuth_from_ris, interaction_vector, LinkEvaluator, LinkGeometry, Vec3};
use crate::scenario::{Scenario, Trajectory};

/// Number of gNB beams. The gNB keeps one beam pointed at the surface.
pub const GNB_CODEBOOK_LEN: usize = 1;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RanOptions {
    /// Hold the UE at the first waypoint instead of playing the trajectory.
    pub static_ue: bool,
}

/// What the RAN saw on one tick.
#[derive(Debug, Clone, PartialEq)]
pub struct RanSample {
    pub seq: u64,
    pub timestamp_ms: u64,
    pub ue_position: Vec3,
    pub true_azimuth_deg: f64,
    /// Beams in effect during the measurement.
    pub ris_index: usize,
    pub ue_index: usize,
    /// Measured RSRP including noise, whether or not it was reported.
    pub rsrp_dbm: f64,
    pub connectivity: Connectivity,
}

/// Emulated gNB + UE: plays the trajectory on the simulated clock, evaluates the
/// link for the active beams and reports RSRP.
pub struct RanEmulator {
    evaluator: LinkEvaluator,
    geometry: LinkGeometry,
    psis: Vec<Array1<Complex64>>,
    ue_angles: Vec<f64>,
    ue_boresight: Option<Vec3>,
    trajectory: Trajectory,
    cfg: RanConfig,
    report_count: u64,
    ris_index: usize,
    ue_index: usize,
    conn: ConnectivityMachine,
    rng: ChaCha8Rng,
    noise: Normal<f64>,
    options: RanOptions,
    samples: Vec<RanSample>,
}

impl RanEmulator {
    pub fn new(scenario: &Scenario, options: RanOptions) -> Result<Self, E2Error> {
        let cfg = scenario.ran().clone();
        cfg.validate()?;
        let evaluator = LinkEvaluator::new(&scenario.aperture, &scenario.geometry, &scenario.radio)?;
        let psis = scenario
            .codebook
            .codewords()
            .iter()
            .map(|c| interaction_vector(&scenario.aperture, &c.states))
            .collect();
        let noise = Normal::new(0.0, cfg.noise_sigma_db).map_err(|e| E2Error::Config(e.to_string()))?;
        Ok(RanEmulator {
            evaluator,
            geometry: scenario.geometry.clone(),
            psis,
            ue_angles: scenario.ue_codebook_deg().to_vec(),
            ue_boresight: scenario.ue_boresight(),
            trajectory: scenario.trajectory.clone(),
            report_count: scenario.report_count(),
            ris_index: scenario.xapp.initial_ris_index,
            ue_index: scenario.xapp.initial_ue_index,
            conn: ConnectivityMachine::new(&cfg),
            rng: ChaCha8Rng::seed_from_u64(scenario.seed()),
            noise,
            cfg,
            options,
            samples: Vec::new(),
        })
    }

    pub fn report_count(&self) -> u64 {
        self.report_count
    }

    pub fn ris_index(&self) -> usize {
        self.ris_index
    }

    pub fn ue_index(&self) -> usize {
        self.ue_index
    }

    pub fn set_ris_index(&mut self, index: usize) -> Result<(), E2Error> {
        if index >= self.psis.len() {
            return Err(E2Error::Protocol(format!("RIS index {index} outside codebook")));
        }
        self.ris_index = index;
        Ok(())
    }

    pub fn samples(&self) -> &[RanSample] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<RanSample> {
        self.samples
    }

    pub fn ue_position(&self, timestamp_ms: u64) -> Vec3 {
        let t = if self.options.static_ue {
            0.0
        } else {
            timestamp_ms as f64 / 1000.0
        };
        self.trajectory.position_at(t)
    }

    /// Noiseless RSRP for arbitrary beams at the UE position of `timestamp_ms`.
    pub fn true_rsrp(&self, timestamp_ms: u64, ris_index: usize, ue_index: usize) -> Result<f64, E2Error> {
        let ue = self.evaluator.at(self.ue_position(timestamp_ms), self.ue_boresight)?;
        let w = ue.ue_beam(self.ue_angles[ue_index]);
        Ok(ue.rsrp_dbm(&w, &self.psis[ris_index]))
    }

    /// Noiseless RSRP of every RIS codeword for one UE beam.
    pub fn true_rsrp_profile(&self, timestamp_ms: u64, ue_index: usize) -> Result<Vec<f64>, E2Error> {
        let ue = self.evaluator.at(self.ue_position(timestamp_ms), self.ue_boresight)?;
        let link = ue.combine(&ue.ue_beam(self.ue_angles[ue_index]));
        Ok(self.psis.iter().map(|p| link.rsrp_dbm(p, self.evaluator.radio())).collect())
    }

    /// Take measurement `seq` with the current beams and record it.
    pub fn measure(&mut self, seq: u64) -> Result<KpiReport, E2Error> {
        let timestamp_ms = seq * self.cfg.report_interval_ms;
        let position = self.ue_position(timestamp_ms);
        let truth = self.true_rsrp(timestamp_ms, self.ris_index, self.ue_index)?;
        // Always draw, so the noise stream does not depend on connectivity.
        let rsrp = truth + self.noise.sample(&mut self.rng);
        let connectivity = self.conn.observe(rsrp);
        self.samples.push(RanSample {
            seq,
            timestamp_ms,
            ue_position: position,
            true_azimuth_deg: azimuth_from_ris(&self.geometry, position)?,
            ris_index: self.ris_index,
            ue_index: self.ue_index,
            rsrp_dbm: rsrp,
            connectivity,
        });
        Ok(match connectivity {
            Connectivity::Attached => KpiReport::attached(self.cfg.rnti, rsrp, timestamp_ms, seq),
            Connectivity::Detached => KpiReport::detached(timestamp_ms, seq),
        })
    }

    /// Apply a UE or gNB beam command. RIS commands belong to the RIS controller.
    pub fn apply(&mut self, cmd: &BeamCommand, timestamp_ms: u64) -> BeamAck {
        let i = cmd.beam_index as usize;
        let (error, applied) = match cmd.target {
            Target::Ue if i < self.ue_angles.len() => {
                self.ue_index = i;
                (None, i)
            }
            Target::Ue => (
                Some(format!("UE beam {i} outside codebook of {}", self.ue_angles.len())),
                self.ue_index,
            ),
            Target::Gnb if i < GNB_CODEBOOK_LEN => (None, 0),
            Target::Gnb => (Some(format!("gNB beam {i} outside codebook of {GNB_CODEBOOK_LEN}")), 0),
            Target::Ris => (Some("RAN does not drive the RIS".to_string()), self.ris_index),
        };
        BeamAck {
            target: cmd.target,
            applied_index: applied as u32,
            seq: cmd.seq,
            timestamp_ms,
            error,
        }
    }

    /// Lockstep report loop: send report k, serve UE/gNB commands, and close the tick
    /// on the xApp's RIS state echo for k. Samples taken before a failure are kept.
    pub fn run<T: Transport>(&mut self, transport: &mut T) -> Result<(), E2Error> {
        transport.send(&Message::hello())?;
        for seq in 0..self.report_count {
            let report = self.measure(seq)?;
            let ts = report.timestamp_ms;
            transport.send(&Message::Kpi(report))?;
            loop {
                match transport.recv()? {
                    None => return Err(E2Error::Disconnected),
                    Some(Message::Command(cmd)) => {
                        let ack = self.apply(&cmd, ts);
                        transport.send(&Message::Ack(ack))?;
                    }
                    Some(Message::Ack(a)) if a.target == Target::Ris && a.seq == seq => {
                        self.set_ris_index(a.applied_index as usize)?;
                        break;
                    }
                    Some(Message::Hello(_)) => {}
                    Some(other) => log::warn!("RAN ignoring {other:?}"),
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ScenarioConfig;

    fn scenario(sigma: f64) -> Scenario {
        let mut cfg = ScenarioConfig::preset("outdoor").unwrap();
        cfg.ran.noise_sigma_db = sigma;
        cfg.ris.pre_phase.candidates = 1;
        cfg.build().unwrap()
    }

    #[test]
    fn noiseless_reports_equal_link_model() {
        let sc = scenario(0.0);
        let mut ran = RanEmulator::new(&sc, RanOptions::default()).unwrap();
        let best = (0..sc.codebook.len())
            .max_by(|&a, &b| {
                let fa = ran.true_rsrp(0, a, sc.xapp.initial_ue_index).unwrap();
                let fb = ran.true_rsrp(0, b, sc.xapp.initial_ue_index).unwrap();
                fa.total_cmp(&fb)
            })
            .unwrap();
        ran.set_ris_index(best).unwrap();
        let r = ran.measure(0).unwrap();
        let truth = ran.true_rsrp(0, best, sc.xapp.initial_ue_index).unwrap();
        assert_eq!(r.rsrp_dbm, Some(truth));
        assert_eq!(r.rnti, Some(sc.ran().rnti));
    }

    #[test]
    fn timestamps_follow_the_clock() {
        let sc = scenario(1.0);
        let mut ran = RanEmulator::new(&sc, RanOptions::default()).unwrap();
        for k in 0..10 {
            assert_eq!(ran.measure(k).unwrap().timestamp_ms, k * 50);
        }
    }

    #[test]
    fn sustained_low_signal_detaches() {
        let sc = scenario(0.0);
        let mut ran = RanEmulator::new(&sc, RanOptions::default()).unwrap();
        let n = sc.codebook.len();
        let ue = sc.xapp.initial_ue_index;
        let rank: Vec<f64> = (0..n).map(|i| ran.true_rsrp(0, i, ue).unwrap()).collect();
        let best = (0..n).max_by(|&a, &b| rank[a].total_cmp(&rank[b])).unwrap();
        let worst = (0..n).min_by(|&a, &b| rank[a].total_cmp(&rank[b])).unwrap();
        assert!(rank[worst] < -100.0, "{}", rank[worst]);
        ran.set_ris_index(best).unwrap();
        assert!(ran.measure(0).unwrap().rnti.is_some());
        ran.set_ris_index(worst).unwrap();
        for k in 1..5 {
            assert!(ran.measure(k).unwrap().rnti.is_some());
        }
        for k in 5..9 {
            let r = ran.measure(k).unwrap();
            assert_eq!((r.rnti, r.rsrp_dbm), (None, None));
        }
    }

    #[test]
    fn ue_and_gnb_commands() {
        let sc = scenario(0.0);
        let mut ran = RanEmulator::new(&sc, RanOptions::default()).unwrap();
        let cmd = |target, beam_index| BeamCommand {
            target,
            beam_index,
            seq: 9,
        };
        assert_eq!(ran.apply(&cmd(Target::Ue, 5), 0).error, None);
        assert_eq!(ran.ue_index(), 5);
        let bad = ran.apply(&cmd(Target::Ue, 7), 0);
        assert!(bad.error.is_some());
        assert_eq!((bad.applied_index, ran.ue_index()), (5, 5));
        assert_eq!(ran.apply(&cmd(Target::Gnb, 0), 0).error, None);
        assert!(ran.apply(&cmd(Target::Gnb, 1), 0).error.is_some());
        assert!(ran.apply(&cmd(Target::Ris, 1), 0).error.is_some());
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let sc = scenario(1.0);
        let run = || {
            let mut ran = RanEmulator::new(&sc, RanOptions::default()).unwrap();
            (0..20).map(|k| ran.measure(k).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }
}
