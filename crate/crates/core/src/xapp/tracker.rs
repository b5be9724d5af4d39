use std::collections::BTreeMap;
use std::fmt;

use super::config::{Algorithm, XappConfig};
use super::trend::{Trend, TrendDetector};
use super::XappError;
use crate::e2::{KpiReport, Target};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Sweeping,
    Refining,
    Tracking,
    Probing,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Sweeping => "SWEEPING",
            Mode::Refining => "REFINING",
            Mode::Tracking => "TRACKING",
            Mode::Probing => "PROBING",
        }
    }
}

/// Why a command was issued.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    Sweep,
    Refine,
    Probe,
    Select,
    Revert,
}

impl Purpose {
    pub fn as_str(&self) -> &'static str {
        match self {
            Purpose::Sweep => "sweep",
            Purpose::Refine => "refine",
            Purpose::Probe => "probe",
            Purpose::Select => "select",
            Purpose::Revert => "revert",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Command {
    pub target: Target,
    pub index: usize,
    pub purpose: Purpose,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Mode { from: Mode, to: Mode },
    Attach { ris_index: usize },
    Detach,
    Command(Command),
    ProbeDone { target: Target, center: usize, winner: usize },
    TrendFalling { s: i64 },
    AckError { target: Target, message: String },
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Mode { from, to } => write!(f, "mode:{}>{}", from.as_str(), to.as_str()),
            Event::Attach { ris_index } => write!(f, "attach:{ris_index}"),
            Event::Detach => write!(f, "detach"),
            Event::Command(c) => write!(
                f,
                "{}_cmd:{}:{}",
                c.target.as_str().to_lowercase(),
                c.purpose.as_str(),
                c.index
            ),
            Event::ProbeDone { target, center, winner } => {
                write!(f, "probe_done:{}:{center}>{winner}", target.as_str().to_lowercase())
            }
            Event::TrendFalling { s } => write!(f, "trend:FALLING:S={s}"),
            Event::AckError { target, message } => {
                // Keep the log single-field friendly.
                let m: String = message.chars().map(|c| if c == ';' { ',' } else { c }).collect();
                write!(f, "ack_error:{}:{m}", target.as_str().to_lowercase())
            }
        }
    }
}

/// Result of consuming one report.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Step {
    pub command: Option<Command>,
    pub events: Vec<Event>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CycleKind {
    Refine,
    Neighbor,
    Ue,
}

/// One left/center/right probe cycle.
#[derive(Debug, Clone)]
struct Cycle {
    kind: CycleKind,
    center: usize,
    candidates: Vec<usize>,
    pos: usize,
    dwell: usize,
    results: BTreeMap<usize, (f64, usize)>,
}

impl Cycle {
    fn new(kind: CycleKind, center: usize, len: usize) -> Self {
        let mut candidates = Vec::with_capacity(3);
        if center > 0 {
            candidates.push(center - 1);
        }
        candidates.push(center);
        if center + 1 < len {
            candidates.push(center + 1);
        }
        Cycle {
            kind,
            center,
            candidates,
            pos: 0,
            dwell: 0,
            results: BTreeMap::new(),
        }
    }

    fn target(&self) -> Target {
        match self.kind {
            CycleKind::Ue => Target::Ue,
            _ => Target::Ris,
        }
    }

    fn current(&self) -> usize {
        self.candidates[self.pos]
    }
}

/// Argmax over measured candidates; the incumbent wins ties, then the lower index.
pub fn select_best(results: &BTreeMap<usize, f64>, incumbent: usize) -> usize {
    let mut best = results.get(&incumbent).map(|&v| (incumbent, v));
    for (&i, &v) in results {
        match best {
            Some((_, b)) if !(v > b) => {}
            _ => best = Some((i, v)),
        }
    }
    best.map_or(incumbent, |(i, _)| i)
}

/// RSRP-driven beam management state machine. Consumes one report at a time and
/// emits at most one command per report. Commands are assumed applied before the
/// next report; [`Tracker::resync`] corrects that belief from acks.
#[derive(Debug, Clone)]
pub struct Tracker {
    cfg: XappConfig,
    mode: Mode,
    ris: usize,
    ue: usize,
    center: usize,
    attached: bool,
    frozen: bool,
    sweep_next: usize,
    sweep_best: Option<(usize, f64)>,
    /// Beam under measurement by the sweep, if the last command was a sweep step.
    sweep_last: Option<usize>,
    /// Connectivity was seen during the current sweep cycle.
    sweep_attached: bool,
    /// Anchor commanded, waiting one report before refining.
    settling: bool,
    cycle: Option<Cycle>,
    refine_rounds: usize,
    detector: TrendDetector,
    since_ue_adapt: usize,
}

impl Tracker {
    pub fn new(cfg: XappConfig) -> Result<Self, XappError> {
        cfg.validate()?;
        Ok(Tracker {
            mode: Mode::Sweeping,
            ris: cfg.initial_ris_index,
            ue: cfg.initial_ue_index,
            center: cfg.initial_ris_index,
            attached: false,
            frozen: false,
            sweep_next: 0,
            sweep_best: None,
            sweep_last: None,
            sweep_attached: false,
            settling: false,
            cycle: None,
            refine_rounds: 0,
            detector: TrendDetector::new(cfg.window_size, cfg.trend_significance),
            since_ue_adapt: 0,
            cfg,
        })
    }

    pub fn config(&self) -> &XappConfig {
        &self.cfg
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// RIS beam believed active.
    pub fn ris_index(&self) -> usize {
        self.ris
    }

    pub fn ue_index(&self) -> usize {
        self.ue
    }

    /// Tracked RIS center (the selected beam, as opposed to a probe).
    pub fn center(&self) -> usize {
        self.center
    }

    pub fn is_attached(&self) -> bool {
        self.attached
    }

    /// Candidates measured so far in the running probe cycle.
    pub fn probe_results(&self) -> BTreeMap<usize, f64> {
        self.cycle
            .as_ref()
            .map(|c| c.results.iter().map(|(&k, &(s, n))| (k, s / n as f64)).collect())
            .unwrap_or_default()
    }

    /// Target of the running probe cycle, if any.
    pub fn probing(&self) -> Option<Target> {
        self.cycle.as_ref().map(Cycle::target)
    }

    /// Align with the state a controller reports as applied.
    pub fn resync(&mut self, target: Target, applied_index: usize) {
        match target {
            Target::Ris if applied_index < self.cfg.ris_codebook_len => self.ris = applied_index,
            Target::Ue if applied_index < self.cfg.ue_codebook_len => self.ue = applied_index,
            _ => {}
        }
    }

    pub fn on_report(&mut self, report: &KpiReport) -> Step {
        let mut step = Step::default();
        let rsrp = match (report.rnti, report.rsrp_dbm) {
            (Some(_), Some(x)) if x.is_finite() => Some(x),
            _ => None,
        };
        if self.frozen {
            self.note_connectivity(rsrp, &mut step);
            return step;
        }
        match (self.mode, rsrp) {
            (Mode::Sweeping, _) => self.sweep_report(rsrp, &mut step),
            (_, None) => self.on_detach(&mut step),
            (mode, Some(x)) => {
                if !self.attached {
                    self.attached = true;
                    step.events.push(Event::Attach { ris_index: self.ris });
                }
                match mode {
                    Mode::Refining if self.settling => {
                        self.settling = false;
                        self.start_cycle(CycleKind::Refine, self.center, &mut step);
                    }
                    Mode::Tracking => self.tracking_report(x, &mut step),
                    _ => self.cycle_report(x, &mut step),
                }
            }
        }
        step
    }

    fn note_connectivity(&mut self, rsrp: Option<f64>, step: &mut Step) {
        match (self.attached, rsrp) {
            (true, None) => {
                self.attached = false;
                step.events.push(Event::Detach);
            }
            (false, Some(x)) if x >= self.cfg.attach_threshold_dbm => {
                self.attached = true;
                step.events.push(Event::Attach { ris_index: self.ris });
            }
            _ => {}
        }
    }

    fn set_mode(&mut self, to: Mode, step: &mut Step) {
        if self.mode != to {
            step.events.push(Event::Mode { from: self.mode, to });
            self.mode = to;
        }
    }

    fn command(&mut self, target: Target, index: usize, purpose: Purpose, step: &mut Step) {
        debug_assert!(step.command.is_none());
        match target {
            Target::Ris => self.ris = index,
            Target::Ue => self.ue = index,
            Target::Gnb => {}
        }
        let c = Command { target, index, purpose };
        step.events.push(Event::Command(c));
        step.command = Some(c);
    }

    /// The sweep always completes its cycle; if the UE was connected at any point
    /// the tracker anchors at the strongest beam of that cycle.
    fn sweep_report(&mut self, rsrp: Option<f64>, step: &mut Step) {
        self.note_connectivity(rsrp, step);
        if let (Some(x), true) = (rsrp, self.attached) {
            self.sweep_attached = true;
            if self.sweep_best.is_none_or(|(_, b)| x > b) {
                self.sweep_best = Some((self.ris, x));
            }
        }
        let done = self.sweep_last == Some(self.cfg.ris_codebook_len - 1);
        let anchor = match self.sweep_best {
            Some((i, _)) if done && self.sweep_attached => i,
            _ => return self.sweep_advance(step),
        };
        self.sweep_last = None;
        self.sweep_best = None;
        self.center = anchor;
        if self.cfg.algorithm == Algorithm::Disabled {
            self.frozen = true;
            self.set_mode(Mode::Tracking, step);
        } else {
            self.refine_rounds = 0;
            self.settling = true;
            self.set_mode(Mode::Refining, step);
        }
        if self.ris != anchor {
            self.command(Target::Ris, anchor, Purpose::Select, step);
        }
    }

    fn sweep_advance(&mut self, step: &mut Step) {
        let i = self.sweep_next;
        if i == 0 {
            self.sweep_best = None;
            self.sweep_attached = false;
        }
        self.sweep_next = (i + 1) % self.cfg.ris_codebook_len;
        self.sweep_last = Some(i);
        self.command(Target::Ris, i, Purpose::Sweep, step);
    }

    fn on_detach(&mut self, step: &mut Step) {
        if self.attached {
            self.attached = false;
            step.events.push(Event::Detach);
        }
        let interrupted = self.cycle.take();
        self.detector.clear();
        self.settling = false;
        self.sweep_next = 0;
        self.sweep_best = None;
        self.sweep_last = None;
        self.set_mode(Mode::Sweeping, step);
        // Fall back to the best-known beam first; the sweep resumes on the next report.
        match interrupted {
            Some(c) if c.kind == CycleKind::Ue && self.ue != c.center => {
                self.command(Target::Ue, c.center, Purpose::Revert, step)
            }
            Some(c) if c.kind != CycleKind::Ue && self.ris != c.center => {
                self.center = c.center;
                self.command(Target::Ris, c.center, Purpose::Revert, step)
            }
            _ => self.sweep_advance(step),
        }
    }

    fn start_cycle(&mut self, kind: CycleKind, center: usize, step: &mut Step) {
        let len = match kind {
            CycleKind::Ue => self.cfg.ue_codebook_len,
            _ => self.cfg.ris_codebook_len,
        };
        let cycle = Cycle::new(kind, center, len);
        let first = cycle.current();
        let target = cycle.target();
        self.cycle = Some(cycle);
        if kind != CycleKind::Refine {
            self.set_mode(Mode::Probing, step);
        }
        self.move_to(target, first, kind, step);
    }

    fn move_to(&mut self, target: Target, index: usize, kind: CycleKind, step: &mut Step) {
        let active = if target == Target::Ue { self.ue } else { self.ris };
        if active != index {
            let purpose = if kind == CycleKind::Refine {
                Purpose::Refine
            } else {
                Purpose::Probe
            };
            self.command(target, index, purpose, step);
        }
    }

    fn cycle_report(&mut self, rsrp: f64, step: &mut Step) {
        let Some(c) = self.cycle.as_mut() else {
            // No cycle while refining or probing cannot happen; recover by tracking.
            self.set_mode(Mode::Tracking, step);
            return;
        };
        let e = c.results.entry(c.current()).or_insert((0.0, 0));
        e.0 += rsrp;
        e.1 += 1;
        c.dwell += 1;
        if c.dwell < self.cfg.probe_dwell_reports {
            return;
        }
        c.dwell = 0;
        c.pos += 1;
        if c.pos < c.candidates.len() {
            let (target, next, kind) = (c.target(), c.current(), c.kind);
            return self.move_to(target, next, kind, step);
        }
        let c = self.cycle.take().expect("cycle present");
        let means: BTreeMap<usize, f64> = c.results.iter().map(|(&k, &(s, n))| (k, s / n as f64)).collect();
        let winner = select_best(&means, c.center);
        step.events.push(Event::ProbeDone {
            target: c.target(),
            center: c.center,
            winner,
        });
        match c.kind {
            CycleKind::Refine => {
                self.center = winner;
                if winner != c.center && self.refine_rounds + 1 < self.cfg.ris_codebook_len {
                    self.refine_rounds += 1;
                    return self.start_cycle(CycleKind::Refine, winner, step);
                }
                self.enter_tracking(step);
                if self.ris != winner {
                    self.command(Target::Ris, winner, Purpose::Select, step);
                }
            }
            CycleKind::Neighbor => {
                self.center = winner;
                self.enter_tracking(step);
                if self.ris != winner {
                    self.command(Target::Ris, winner, Purpose::Select, step);
                }
            }
            CycleKind::Ue => {
                self.enter_tracking(step);
                if self.ue != winner {
                    self.command(Target::Ue, winner, Purpose::Select, step);
                }
            }
        }
    }

    fn enter_tracking(&mut self, step: &mut Step) {
        self.detector.clear();
        self.set_mode(Mode::Tracking, step);
    }

    fn tracking_report(&mut self, rsrp: f64, step: &mut Step) {
        self.since_ue_adapt += 1;
        let period = self.cfg.ue_adapt_period;
        if period > 0 && self.since_ue_adapt >= period && self.cfg.ue_codebook_len > 1 {
            self.since_ue_adapt = 0;
            return self.start_cycle(CycleKind::Ue, self.ue, step);
        }
        match self.cfg.algorithm {
            Algorithm::NeighborScan => self.start_cycle(CycleKind::Neighbor, self.center, step),
            Algorithm::TrendTriggered => {
                if let Some(r) = self.detector.push(rsrp) {
                    if r.trend == Trend::Falling {
                        step.events.push(Event::TrendFalling { s: r.s });
                        self.detector.clear();
                        self.start_cycle(CycleKind::Neighbor, self.center, step);
                    }
                }
            }
            Algorithm::Disabled => {}
        }
    }
}
