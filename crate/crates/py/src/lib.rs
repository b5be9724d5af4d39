//! Python module `risoran`. Structured results cross the boundary as JSON text
//! or plain Python values.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use ::risoran::e2::{self, BeamAck, BeamCommand, KpiReport, Message, RanOptions};
use ::risoran::harness::{self, MobilityOptions, Summary};
use ::risoran::phy::Codebook;
use ::risoran::scenario::{Scenario, ScenarioConfig};
use ::risoran::xapp::{self, Algorithm};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn scenario(config: &str, seed: Option<u64>, algorithm: Option<&str>) -> PyResult<Scenario> {
    let mut c = ScenarioConfig::resolve(config).map_err(value_err)?;
    if let Some(s) = seed {
        c.seed = s;
    }
    if let Some(a) = algorithm {
        c.xapp.algorithm = a.parse::<Algorithm>().map_err(value_err)?;
    }
    c.build().map_err(value_err)
}

/// Scenario TOML for a preset name or file path.
#[pyfunction]
fn scenario_toml(config: &str) -> PyResult<String> {
    ScenarioConfig::resolve(config).map_err(value_err)?.to_toml_string().map_err(value_err)
}

/// The scenario's RIS codebook in the binary codebook format.
#[pyfunction]
#[pyo3(signature = (config, seed=None))]
fn codebook_bytes<'py>(py: Python<'py>, config: &str, seed: Option<u64>) -> PyResult<Bound<'py, PyBytes>> {
    let sc = scenario(config, seed, None)?;
    Ok(PyBytes::new(py, &sc.codebook.to_bytes().map_err(value_err)?))
}

/// Per-codeword element states, one row of 0/1 values per surface row.
type States = Vec<Vec<Vec<u8>>>;

/// Parse a codebook file: (side length, steering angles, states).
#[pyfunction]
fn parse_codebook(data: &[u8]) -> PyResult<(usize, Vec<f64>, States)> {
    let cb = Codebook::from_bytes(data).map_err(value_err)?;
    let angles = (0..cb.len()).map(|i| cb.angle_of(i)).collect();
    let states = cb
        .codewords()
        .iter()
        .map(|cw| cw.states.rows().into_iter().map(|r| r.iter().map(|&s| s as u8).collect()).collect())
        .collect();
    Ok((cb.aperture().params().n, angles, states))
}

/// Coverage grid summary as JSON.
#[pyfunction]
#[pyo3(signature = (config, seed=None))]
fn coverage_summary(config: &str, seed: Option<u64>) -> PyResult<String> {
    let sc = scenario(config, seed, None)?;
    let grid = harness::run_coverage(&sc).map_err(value_err)?;
    let s = Summary::Grid(harness::summarize_grid(&grid).map_err(value_err)?);
    serde_json::to_string(&s).map_err(value_err)
}

/// Closed-loop mobility run over in-memory links: (trace CSV text, summary JSON).
#[pyfunction]
#[pyo3(signature = (config, seed=None, algorithm=None, static_ue=false))]
fn run_mobility(
    py: Python<'_>,
    config: &str,
    seed: Option<u64>,
    algorithm: Option<&str>,
    static_ue: bool,
) -> PyResult<(String, String)> {
    let sc = scenario(config, seed, algorithm)?;
    let opts = MobilityOptions {
        ran: RanOptions { static_ue },
        ..Default::default()
    };
    let run = py.detach(|| harness::run_mobility(&sc, opts)).map_err(value_err)?;
    if let Some(e) = run.error {
        return Err(PyRuntimeError::new_err(e.to_string()));
    }
    let csv = String::from_utf8(run.trace.to_csv_bytes().map_err(value_err)?).map_err(value_err)?;
    let s = Summary::Trace(harness::summarize_trace(&run.trace).map_err(value_err)?);
    Ok((csv, serde_json::to_string(&s).map_err(value_err)?))
}

/// Encode one wire frame. `kind` is hello, kpi, command or ack; `body` is the
/// JSON payload (the version string for hello).
#[pyfunction]
fn encode_frame<'py>(py: Python<'py>, kind: &str, body: &str) -> PyResult<Bound<'py, PyBytes>> {
    let m = match kind {
        "hello" => Message::Hello(body.to_string()),
        "kpi" => Message::Kpi(serde_json::from_str::<KpiReport>(body).map_err(value_err)?),
        "command" => Message::Command(serde_json::from_str::<BeamCommand>(body).map_err(value_err)?),
        "ack" => Message::Ack(serde_json::from_str::<BeamAck>(body).map_err(value_err)?),
        _ => return Err(PyValueError::new_err(format!("unknown frame kind {kind:?}"))),
    };
    Ok(PyBytes::new(py, &e2::encode(&m)))
}

/// Decode every complete frame in `data` into (kind, body) pairs. Malformed
/// frames are skipped; a trailing partial frame is ignored.
#[pyfunction]
fn decode_frames(data: &[u8]) -> PyResult<Vec<(String, String)>> {
    let mut dec = e2::FrameDecoder::new();
    dec.push(data);
    let mut out = Vec::new();
    while let Some(r) = dec.next_frame() {
        let Ok(m) = r else { continue };
        out.push(match m {
            Message::Hello(v) => ("hello".to_string(), v),
            Message::Kpi(k) => ("kpi".to_string(), serde_json::to_string(&k).map_err(value_err)?),
            Message::Command(c) => ("command".to_string(), serde_json::to_string(&c).map_err(value_err)?),
            Message::Ack(a) => ("ack".to_string(), serde_json::to_string(&a).map_err(value_err)?),
        });
    }
    Ok(out)
}

/// Trend test on an RSRP window: (S, variance, p-value, "FALLING" | "STABLE").
#[pyfunction]
#[pyo3(signature = (window, alpha=0.05))]
fn classify_trend(window: Vec<f64>, alpha: f64) -> (i64, f64, f64, &'static str) {
    let r = xapp::classify(&window, alpha);
    (r.s, r.variance, r.p_value, r.trend.as_str())
}

#[pymodule]
fn risoran(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(scenario_toml, m)?)?;
    m.add_function(wrap_pyfunction!(codebook_bytes, m)?)?;
    m.add_function(wrap_pyfunction!(parse_codebook, m)?)?;
    m.add_function(wrap_pyfunction!(coverage_summary, m)?)?;
    m.add_function(wrap_pyfunction!(run_mobility, m)?)?;
    m.add_function(wrap_pyfunction!(encode_frame, m)?)?;
    m.add_function(wrap_pyfunction!(decode_frames, m)?)?;
    m.add_function(wrap_pyfunction!(classify_trend, m)?)?;
    Ok(())
}
