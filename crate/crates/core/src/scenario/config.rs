use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ScenarioError, Trajectory, Waypoint};
use crate::e2::RanConfig;
use crate::link::{azimuth_from_ris, ArrayLayout, LinkGeometry, RadioConfig, Vec3};
use crate::phy::{
    build_codebook, optimize_pre_phase, ApertureParams, Codebook, Direction, RisAperture,
    SteeringPair,
};
use crate::xapp::XappConfig;

const INDOOR: &str = include_str!("../../presets/indoor.toml");
const OUTDOOR: &str = include_str!("../../presets/outdoor.toml");

pub const PRESETS: [&str; 2] = ["indoor", "outdoor"];

/// Scenario document as written on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub ris: RisSection,
    pub geometry: GeometrySection,
    #[serde(default)]
    pub radio: RadioSection,
    pub ue: UeSection,
    pub trajectory: TrajectorySection,
    #[serde(default)]
    pub ran: RanConfig,
    #[serde(default)]
    pub xapp: XappConfig,
    #[serde(default)]
    pub coverage: CoverageSection,
    #[serde(default)]
    pub ports: PortsSection,
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RisSection {
    pub n: usize,
    pub element_spacing_m: f64,
    pub carrier_frequency_hz: f64,
    #[serde(default = "one")]
    pub efficiency: f64,
    pub scan_start_deg: f64,
    pub scan_end_deg: f64,
    #[serde(default)]
    pub pre_phase: PrePhaseSection,
}

fn one() -> f64 {
    1.0
}

/// `candidates = 0` disables pre-phasing, `1` uses `seed` directly, more runs
/// the worst-case mirror-lobe search over seeds `seed, seed + 1, ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrePhaseSection {
    pub seed: u64,
    pub candidates: usize,
    /// Spacing of the steering set the search scores against.
    #[serde(default = "ten")]
    pub steering_step_deg: f64,
}

fn ten() -> f64 {
    10.0
}

impl Default for PrePhaseSection {
    fn default() -> Self {
        PrePhaseSection {
            seed: 1,
            candidates: 50,
            steering_step_deg: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    #[serde(default)]
    pub ris_position: [f64; 3],
    #[serde(default = "z_axis")]
    pub ris_normal: [f64; 3],
    #[serde(default = "x_axis")]
    pub ris_x_axis: [f64; 3],
    pub gnb_position: [f64; 3],
    #[serde(default = "yes")]
    pub direct_path_blocked: bool,
    #[serde(default)]
    pub multipath_gain_db: Option<f64>,
}

fn z_axis() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

fn x_axis() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioSection {
    pub tx_power_dbm: f64,
    pub gnb_gain_dbi: f64,
    pub ue_gain_dbi: f64,
    pub noise_power_dbm: f64,
    pub bandwidth_hz: f64,
    pub n_subcarriers: usize,
    pub rsrp_offset_db: f64,
    pub gnb_array: ArrayLayout,
    pub ue_array: ArrayLayout,
}

impl Default for RadioSection {
    fn default() -> Self {
        let r = RadioConfig::default();
        RadioSection {
            tx_power_dbm: r.tx_power_dbm,
            gnb_gain_dbi: r.gnb_gain_dbi,
            ue_gain_dbi: r.ue_gain_dbi,
            noise_power_dbm: r.noise_power_dbm,
            bandwidth_hz: r.bandwidth_hz,
            n_subcarriers: r.n_subcarriers,
            rsrp_offset_db: r.rsrp_offset_db,
            gnb_array: r.gnb_array,
            ue_array: r.ue_array,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UeSection {
    /// Array boresight held fixed as if looking at the RIS from this azimuth.
    /// Absent: the array always points at the RIS.
    #[serde(default)]
    pub facing_azimuth_deg: Option<f64>,
    /// Receive beam angles off boresight, ordered.
    pub codebook_deg: Vec<f64>,
    #[serde(default)]
    pub initial_beam: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySection {
    pub speed_mps: f64,
    #[serde(default, rename = "loop")]
    pub looped: bool,
    /// Run length; defaults to one traversal.
    #[serde(default)]
    pub duration_s: Option<f64>,
    pub waypoints: Vec<Waypoint>,
}

/// Arc of UE cells evaluated by the coverage experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoverageSection {
    pub azimuth_start_deg: f64,
    pub azimuth_end_deg: f64,
    pub azimuth_step_deg: f64,
    pub ranges_m: Vec<f64>,
    /// Offset of the cell plane along the RIS local y axis.
    pub height_m: f64,
    pub baseline: Baseline,
    pub baseline_seed: u64,
    pub throughput_efficiency: f64,
}

impl Default for CoverageSection {
    fn default() -> Self {
        CoverageSection {
            azimuth_start_deg: 20.0,
            azimuth_end_deg: 60.0,
            azimuth_step_deg: 5.0,
            ranges_m: vec![3.0, 4.0, 5.0],
            height_m: 0.0,
            baseline: Baseline::Random,
            baseline_seed: 99,
            throughput_efficiency: 0.65,
        }
    }
}

/// RIS-off reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Baseline {
    /// Unconfigured surface: seeded random element phases.
    Random,
    /// No RIS contribution at all.
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PortsSection {
    pub host: String,
    pub e2: u16,
    pub ris: u16,
}

impl Default for PortsSection {
    fn default() -> Self {
        PortsSection {
            host: "127.0.0.1".into(),
            e2: 36421,
            ris: 36422,
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, ScenarioError> {
        toml::from_str(s).map_err(|e| ScenarioError::Parse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String, ScenarioError> {
        toml::to_string(self).map_err(|e| ScenarioError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    /// A shipped preset by name (`indoor` or `outdoor`).
    pub fn preset(name: &str) -> Result<Self, ScenarioError> {
        match name {
            "indoor" => Self::from_toml_str(INDOOR),
            "outdoor" => Self::from_toml_str(OUTDOOR),
            other => Err(ScenarioError::Config(format!("unknown preset {other:?}"))),
        }
    }

    /// Load a file path, or a preset when `spec` names one.
    pub fn resolve(spec: &str) -> Result<Self, ScenarioError> {
        if PRESETS.contains(&spec) && !Path::new(spec).exists() {
            Self::preset(spec)
        } else {
            Self::load(Path::new(spec))
        }
    }

    pub fn aperture_params(&self) -> ApertureParams {
        ApertureParams {
            n: self.ris.n,
            element_spacing: self.ris.element_spacing_m,
            carrier_frequency: self.ris.carrier_frequency_hz,
            efficiency: self.ris.efficiency,
        }
    }

    pub fn radio(&self) -> RadioConfig {
        let r = &self.radio;
        RadioConfig {
            tx_power_dbm: r.tx_power_dbm,
            gnb_gain_dbi: r.gnb_gain_dbi,
            ue_gain_dbi: r.ue_gain_dbi,
            wavelength: self.aperture_params().wavelength(),
            noise_power_dbm: r.noise_power_dbm,
            bandwidth_hz: r.bandwidth_hz,
            n_subcarriers: r.n_subcarriers,
            rsrp_offset_db: r.rsrp_offset_db,
            gnb_array: r.gnb_array,
            ue_array: r.ue_array,
        }
    }

    pub fn trajectory(&self) -> Result<Trajectory, ScenarioError> {
        let t = &self.trajectory;
        Trajectory::new(t.waypoints.clone(), t.speed_mps, t.looped)
    }

    /// Geometry with the UE at the first waypoint.
    pub fn geometry(&self) -> Result<LinkGeometry, ScenarioError> {
        let g = &self.geometry;
        let first = self
            .trajectory
            .waypoints
            .first()
            .ok_or_else(|| ScenarioError::Config("trajectory has no waypoints".into()))?;
        let normal = Vec3::from(g.ris_normal);
        let x = Vec3::from(g.ris_x_axis);
        let mut geometry = LinkGeometry {
            gnb_position: Vec3::from(g.gnb_position),
            ris_position: Vec3::from(g.ris_position),
            ue_position: first.vec(),
            ris_normal: normal.normalize(),
            ris_x_axis: (x - normal.normalize() * normal.normalize().dot(&x)).normalize(),
            ue_boresight: None,
            direct_path_blocked: g.direct_path_blocked,
            multipath_gain_db: g.multipath_gain_db,
        };
        geometry.ue_boresight = self.ue_boresight(&geometry);
        geometry.validate()?;
        Ok(geometry)
    }

    /// Fixed UE boresight from `facing_azimuth_deg`.
    pub fn ue_boresight(&self, geometry: &LinkGeometry) -> Option<Vec3> {
        self.ue.facing_azimuth_deg.map(|a| {
            let f = geometry.frame();
            let (s, c) = a.to_radians().sin_cos();
            -(f.x * s + f.z * c)
        })
    }

    pub fn run_duration_s(&self) -> Result<f64, ScenarioError> {
        match self.trajectory.duration_s {
            Some(d) if d > 0.0 => Ok(d),
            Some(_) => Err(ScenarioError::Config("duration_s must be > 0".into())),
            None if self.trajectory.looped => Err(ScenarioError::Config(
                "looped trajectories need an explicit duration_s".into(),
            )),
            None => Ok(self.trajectory()?.duration_s()),
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.aperture_params().validate()?;
        self.radio().validate()?;
        self.geometry()?;
        self.trajectory()?;
        self.ran.validate()?;
        if self.ue.codebook_deg.is_empty() {
            return Err(ScenarioError::Config("ue.codebook_deg must not be empty".into()));
        }
        if self.ue.initial_beam >= self.ue.codebook_deg.len() {
            return Err(ScenarioError::Config("ue.initial_beam out of range".into()));
        }
        if !(self.xapp.ris_step_deg > 0.0) {
            return Err(ScenarioError::Config("xapp.ris_step_deg must be > 0".into()));
        }
        if !(self.coverage.azimuth_step_deg > 0.0) || self.coverage.ranges_m.iter().any(|r| !(*r > 0.0)) {
            return Err(ScenarioError::Config("coverage grid is malformed".into()));
        }
        self.run_duration_s()?;
        Ok(())
    }

    /// Resolve everything derived: pre-phase, codebook, geometry, radio, trajectory.
    pub fn build(&self) -> Result<Scenario, ScenarioError> {
        self.validate()?;
        let params = self.aperture_params();
        let geometry = self.geometry()?;
        let incident = geometry.incident_direction()?;
        let pp = &self.ris.pre_phase;
        let (aperture, suppression) = match pp.candidates {
            0 => (RisAperture::without_pre_phase(params)?, None),
            1 => (RisAperture::seeded(params, pp.seed)?, None),
            k => {
                let set = self.steering_set(incident)?;
                let choice = optimize_pre_phase(&params, k, &set, pp.seed)?;
                (
                    RisAperture::seeded(params, choice.seed)?,
                    Some(choice.worst_suppression_db),
                )
            }
        };
        let codebook = build_codebook(
            &aperture,
            incident,
            self.ris.scan_start_deg,
            self.ris.scan_end_deg,
            self.xapp.ris_step_deg,
        )?;
        let mut xapp = self.xapp.clone();
        xapp.ris_codebook_len = codebook.len();
        xapp.ue_codebook_len = self.ue.codebook_deg.len();
        xapp.initial_ue_index = self.ue.initial_beam;
        xapp.initial_ris_index = xapp.initial_ris_index.min(codebook.len() - 1);
        xapp.attach_threshold_dbm = self.ran.attach_threshold_dbm;
        xapp.validate()?;
        Ok(Scenario {
            config: self.clone(),
            aperture,
            pre_phase_suppression_db: suppression,
            codebook,
            geometry,
            radio: self.radio(),
            trajectory: self.trajectory()?,
            xapp,
            duration_s: self.run_duration_s()?,
        })
    }

    fn steering_set(&self, incident: Direction) -> Result<Vec<SteeringPair>, ScenarioError> {
        let step = self.ris.pre_phase.steering_step_deg;
        let (a, b) = (self.ris.scan_start_deg, self.ris.scan_end_deg);
        let mut angles: Vec<f64> = crate::phy::azimuth_cut(a, b, step)
            .iter()
            .map(|d| d.cut_angle_deg())
            .collect();
        if angles.last().is_none_or(|&l| (l - b).abs() > 1e-9) {
            angles.push(b);
        }
        angles
            .into_iter()
            .map(|x| SteeringPair::new(incident, Direction::azimuth(x)).map_err(Into::into))
            .collect()
    }
}

/// A fully resolved scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub aperture: RisAperture,
    /// Worst-case mirror-lobe suppression of the chosen pre-phase, when searched.
    pub pre_phase_suppression_db: Option<f64>,
    pub codebook: Codebook,
    /// Geometry with the UE at the first waypoint.
    pub geometry: LinkGeometry,
    pub radio: RadioConfig,
    pub trajectory: Trajectory,
    /// xApp settings with codebook sizes filled in.
    pub xapp: XappConfig,
    pub duration_s: f64,
}

impl Scenario {
    pub fn ue_codebook_deg(&self) -> &[f64] {
        &self.config.ue.codebook_deg
    }

    pub fn ran(&self) -> &RanConfig {
        &self.config.ran
    }

    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    /// UE boresight for the configured facing, independent of position.
    pub fn ue_boresight(&self) -> Option<Vec3> {
        self.config.ue_boresight(&self.geometry)
    }

    pub fn azimuth_of(&self, ue_position: Vec3) -> Result<f64, ScenarioError> {
        Ok(azimuth_from_ris(&self.geometry, ue_position)?)
    }

    pub fn tick_interval_s(&self) -> f64 {
        self.config.ran.report_interval_ms as f64 / 1000.0
    }

    /// Number of reports in the run, including the one at t = 0.
    pub fn report_count(&self) -> u64 {
        let ms = (self.duration_s * 1000.0).round() as u64;
        ms / self.config.ran.report_interval_ms + 1
    }
}
