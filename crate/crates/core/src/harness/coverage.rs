use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array1;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::trace::{read_rows, write_rows};
use super::HarnessError;
use crate::link::{
    interaction_vector, joint_beam_search, random_interaction_vector, throughput_proxy, CombinedLink, LinkEvaluator,
    Vec3,
};
use crate::phy::azimuth_cut;
use crate::scenario::{Baseline, Scenario};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageCell {
    pub range_m: f64,
    pub azimuth_deg: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub rsrp_with_ris_dbm: f64,
    pub rsrp_without_ris_dbm: f64,
    pub gain_db: f64,
    pub best_ris_index: usize,
    pub best_ue_index: usize,
    /// Shannon-style proxy from the with-RIS SNR, not a stack measurement.
    pub throughput_proxy_bps: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoverageGrid {
    pub cells: Vec<CoverageCell>,
}

impl CoverageGrid {
    pub const HEADER: &'static str = "range_m,azimuth_deg,x,y,z,rsrp_with_ris_dbm,rsrp_without_ris_dbm,gain_db,best_ris_index,best_ue_index,throughput_proxy_bps";

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), HarnessError> {
        if self.cells.is_empty() {
            writeln!(w, "{}", Self::HEADER)?;
            return Ok(());
        }
        write_rows(&self.cells, w)
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>, HarnessError> {
        let mut out = Vec::new();
        self.write_csv(&mut out)?;
        Ok(out)
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self, HarnessError> {
        Ok(CoverageGrid { cells: read_rows(r)? })
    }

    pub fn save(&self, path: &Path) -> Result<(), HarnessError> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::read_csv(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    /// Cells at one range, in azimuth order.
    pub fn arc(&self, range_m: f64) -> Vec<&CoverageCell> {
        let mut v: Vec<_> = self.cells.iter().filter(|c| c.range_m == range_m).collect();
        v.sort_by(|a, b| a.azimuth_deg.total_cmp(&b.azimuth_deg));
        v
    }
}

/// Interaction vector standing in for a surface that is off.
pub fn baseline_psi(scenario: &Scenario) -> Array1<Complex64> {
    let m = scenario.aperture.params().n.pow(2);
    match scenario.config.coverage.baseline {
        Baseline::Random => random_interaction_vector(m, scenario.config.coverage.baseline_seed),
        Baseline::Zero => Array1::zeros(m),
    }
}

/// UE position at `azimuth_deg` and `range_m` in the surface frame.
pub fn cell_position(scenario: &Scenario, azimuth_deg: f64, range_m: f64) -> Vec3 {
    let a = azimuth_deg.to_radians();
    let height = scenario.config.coverage.height_m;
    scenario
        .geometry
        .frame()
        .to_world(Vec3::new(range_m * a.sin(), height, range_m * a.cos()))
}

/// Joint RIS/UE beam search on every cell of the configured arc, against the
/// RIS-off baseline. The UE array faces the surface in every cell.
pub fn run_coverage(scenario: &Scenario) -> Result<CoverageGrid, HarnessError> {
    let cov = &scenario.config.coverage;
    if cov.ranges_m.is_empty() || !(cov.azimuth_step_deg > 0.0) || cov.azimuth_end_deg < cov.azimuth_start_deg {
        return Err(HarnessError::Config("coverage arc is empty".into()));
    }
    let radio = &scenario.radio;
    let evaluator = LinkEvaluator::new(&scenario.aperture, &scenario.geometry, radio)?;
    let psis: Vec<_> = scenario
        .codebook
        .codewords()
        .iter()
        .map(|c| interaction_vector(&scenario.aperture, &c.states))
        .collect();
    let off = baseline_psi(scenario);
    let azimuths: Vec<f64> = azimuth_cut(cov.azimuth_start_deg, cov.azimuth_end_deg, cov.azimuth_step_deg)
        .iter()
        .map(|d| d.cut_angle_deg())
        .collect();
    let mut cells = Vec::with_capacity(azimuths.len() * cov.ranges_m.len());
    for &range_m in &cov.ranges_m {
        for &azimuth_deg in &azimuths {
            let p = cell_position(scenario, azimuth_deg, range_m);
            let facing = (scenario.geometry.ris_position - p).normalize();
            let ue = evaluator.at(p, Some(facing))?;
            let links: Vec<CombinedLink> = scenario
                .ue_codebook_deg()
                .iter()
                .map(|&a| ue.combine(&ue.ue_beam(a)))
                .collect();
            let best = joint_beam_search(&psis, &links, |l, psi| l.rsrp_dbm(psi, radio))?;
            let without = links
                .iter()
                .map(|l| l.rsrp_dbm(&off, radio))
                .fold(f64::NEG_INFINITY, f64::max);
            let snr_db = best.rsrp_dbm - radio.noise_power_dbm;
            cells.push(CoverageCell {
                range_m,
                azimuth_deg,
                x: p.x,
                y: p.y,
                z: p.z,
                rsrp_with_ris_dbm: best.rsrp_dbm,
                rsrp_without_ris_dbm: without,
                gain_db: best.rsrp_dbm - without,
                best_ris_index: best.ris_index,
                best_ue_index: best.ue_index,
                throughput_proxy_bps: throughput_proxy(snr_db, radio.bandwidth_hz, cov.throughput_efficiency)?,
            });
        }
    }
    Ok(CoverageGrid { cells })
}
