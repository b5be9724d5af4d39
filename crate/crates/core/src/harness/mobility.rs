use std::collections::BTreeMap;
use std::net::TcpListener;

use super::trace::{ExperimentTrace, TraceRow};
use super::HarnessError;
use crate::e2::{memory_pair, E2Error, RanEmulator, RanOptions, RanSample, RisController, TcpTransport, Transport};
use crate::phy::Codebook;
use crate::scenario::Scenario;
use crate::xapp::{LoggedEvent, XappEndpoint, XappError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransportKind {
    #[default]
    Memory,
    Tcp,
}

impl std::str::FromStr for TransportKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "memory" => Ok(TransportKind::Memory),
            "tcp" => Ok(TransportKind::Tcp),
            other => Err(HarnessError::Config(format!("unknown transport {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MobilityOptions {
    pub transport: TransportKind,
    pub ran: RanOptions,
}

/// Outcome of a mobility run. `error` is set when an endpoint failed; the trace
/// then holds every tick measured before the failure.
#[derive(Debug, Clone)]
pub struct MobilityRun {
    pub trace: ExperimentTrace,
    pub events: Vec<LoggedEvent>,
    pub error: Option<String>,
}

/// Merge RAN samples with the xApp log into trace rows.
pub fn build_trace(codebook: &Codebook, samples: &[RanSample], events: &[LoggedEvent]) -> ExperimentTrace {
    let mut by_seq: BTreeMap<u64, Vec<String>> = BTreeMap::new();
    for e in events {
        by_seq.entry(e.seq).or_default().push(e.event.to_string());
    }
    let rows = samples
        .iter()
        .map(|s| TraceRow {
            timestamp_ms: s.timestamp_ms,
            ue_x: s.ue_position.x,
            ue_y: s.ue_position.y,
            ue_z: s.ue_position.z,
            true_azimuth_deg: s.true_azimuth_deg,
            ris_index: s.ris_index,
            ris_angle_deg: codebook.angle_of(s.ris_index),
            ue_index: s.ue_index,
            rsrp_dbm: s.rsrp_dbm,
            connectivity: s.connectivity,
            algorithm_event: by_seq.get(&s.seq).map(|v| v.join(";")).unwrap_or_default(),
        })
        .collect();
    ExperimentTrace { rows }
}

type XappResult = (Vec<LoggedEvent>, Result<(), XappError>);

fn xapp_thread<E: Transport, R: Transport>(scenario: &Scenario, mut e2: E, mut ris: R) -> XappResult {
    let mut x = match XappEndpoint::new(scenario.xapp.clone()) {
        Ok(x) => x,
        Err(e) => return (Vec::new(), Err(e)),
    };
    let r = x.run(&mut e2, &mut ris);
    // Transports drop here, which releases the RIS controller.
    (x.into_events(), r)
}

fn controller_thread<T: Transport>(scenario: &Scenario, mut link: T) -> Result<(), E2Error> {
    let mut c = RisController::new(scenario.codebook.clone(), scenario.xapp.initial_ris_index)?;
    c.serve(&mut link)
}

/// Boot RAN, xApp and RIS controller on the chosen transport and play the whole
/// trajectory. The RAN drives simulated time; the call returns once every
/// endpoint has drained.
pub fn run_mobility(scenario: &Scenario, options: MobilityOptions) -> Result<MobilityRun, HarnessError> {
    let mut ran = RanEmulator::new(scenario, options.ran)?;
    let (ran_result, xapp_result, ctrl_result) = match options.transport {
        TransportKind::Memory => {
            let (mut ran_link, xapp_e2) = memory_pair();
            let (xapp_ris, ctrl_link) = memory_pair();
            std::thread::scope(|s| {
                let ctrl = s.spawn(|| controller_thread(scenario, ctrl_link));
                let xapp = s.spawn(|| xapp_thread(scenario, xapp_e2, xapp_ris));
                let r = ran.run(&mut ran_link);
                drop(ran_link);
                (r, join(xapp), join(ctrl))
            })
        }
        TransportKind::Tcp => {
            let ris_listener = TcpListener::bind("127.0.0.1:0")?;
            let e2_listener = TcpListener::bind("127.0.0.1:0")?;
            let (ris_addr, e2_addr) = (ris_listener.local_addr()?, e2_listener.local_addr()?);
            std::thread::scope(|s| {
                let ctrl = s.spawn(move || controller_thread(scenario, TcpTransport::accept(&ris_listener)?));
                let xapp = s.spawn(move || {
                    let links = TcpTransport::connect(ris_addr)
                        .and_then(|ris| Ok((TcpTransport::accept(&e2_listener)?, ris)));
                    match links {
                        Ok((e2, ris)) => xapp_thread(scenario, e2, ris),
                        Err(e) => (Vec::new(), Err(e.into())),
                    }
                });
                let r = TcpTransport::connect(e2_addr).and_then(|mut link| ran.run(&mut link));
                (r, join(xapp), join(ctrl))
            })
        }
    };
    let (events, xapp_result) = xapp_result;
    let error = [
        ran_result.err().map(|e| format!("RAN: {e}")),
        xapp_result.err().map(|e| format!("xApp: {e}")),
        ctrl_result.err().map(|e| format!("RIS controller: {e}")),
    ]
    .into_iter()
    .flatten()
    .reduce(|a, b| format!("{a}; {b}"));
    if let Some(e) = &error {
        log::error!("mobility run aborted: {e}");
    }
    Ok(MobilityRun {
        trace: build_trace(&scenario.codebook, ran.samples(), &events),
        events,
        error,
    })
}

fn join<T>(h: std::thread::ScopedJoinHandle<'_, T>) -> T {
    h.join().unwrap_or_else(|p| std::panic::resume_unwind(p))
}

/// Command counts taken from a trace's event column.
pub fn command_counts(trace: &ExperimentTrace) -> BTreeMap<String, u64> {
    let mut out = BTreeMap::new();
    for e in trace.rows.iter().flat_map(TraceRow::events) {
        if let Some((target, rest)) = e.split_once("_cmd:") {
            let purpose = rest.split(':').next().unwrap_or_default();
            *out.entry(format!("{target}:{purpose}")).or_default() += 1;
        }
    }
    out
}
