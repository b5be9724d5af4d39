use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::budget::{db_to_linear, dbm_to_watts, watts_to_dbm};
use super::{LinkError, LinkGeometry, Vec3};
use crate::phy::{RisAperture, SPEED_OF_LIGHT};

const NORM_TOL: f64 = 1e-9;

/// Uniform planar array, half-wavelength spacing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrayLayout {
    pub cols: usize,
    pub rows: usize,
}

impl ArrayLayout {
    pub const SINGLE: ArrayLayout = ArrayLayout { cols: 1, rows: 1 };

    pub fn new(cols: usize, rows: usize) -> Self {
        ArrayLayout { cols, rows }
    }

    pub fn len(&self) -> usize {
        self.cols * self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Radio parameters of the link. Antenna gains are per element; the
/// array gain adds `10 log10(M)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioConfig {
    /// Total gNB transmit power, shared evenly by a unit-norm precoder.
    pub tx_power_dbm: f64,
    pub gnb_gain_dbi: f64,
    pub ue_gain_dbi: f64,
    pub wavelength: f64,
    /// Noise power over the measurement bandwidth; also the RSRP floor.
    pub noise_power_dbm: f64,
    pub bandwidth_hz: f64,
    pub n_subcarriers: usize,
    /// Calibration offset added to cascaded power to form RSRP.
    pub rsrp_offset_db: f64,
    pub gnb_array: ArrayLayout,
    pub ue_array: ArrayLayout,
}

impl Default for RadioConfig {
    fn default() -> Self {
        RadioConfig {
            tx_power_dbm: 20.0,
            gnb_gain_dbi: 5.0,
            ue_gain_dbi: 5.0,
            wavelength: SPEED_OF_LIGHT / 27.2e9,
            noise_power_dbm: -122.0,
            bandwidth_hz: 40e6,
            n_subcarriers: 1272,
            rsrp_offset_db: 0.0,
            gnb_array: ArrayLayout::new(4, 4),
            ue_array: ArrayLayout::new(4, 4),
        }
    }
}

impl RadioConfig {
    pub fn validate(&self) -> Result<(), LinkError> {
        let bad = |m: &str| Err(LinkError::Config(m.to_string()));
        if !(self.bandwidth_hz > 0.0) {
            return bad("bandwidth must be > 0");
        }
        if !(self.wavelength > 0.0) {
            return bad("wavelength must be > 0");
        }
        if self.n_subcarriers == 0 {
            return bad("n_subcarriers must be >= 1");
        }
        if self.gnb_array.is_empty() || self.ue_array.is_empty() {
            return bad("antenna arrays need at least one element");
        }
        let finite = [
            self.tx_power_dbm,
            self.gnb_gain_dbi,
            self.ue_gain_dbi,
            self.noise_power_dbm,
            self.rsrp_offset_db,
        ];
        if finite.iter().any(|x| !x.is_finite()) {
            return bad("power and gain values must be finite");
        }
        Ok(())
    }

    pub fn gnb_elements(&self) -> usize {
        self.gnb_array.len()
    }

    pub fn ue_elements(&self) -> usize {
        self.ue_array.len()
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Element gain plus full coherent array gain.
    pub fn gnb_array_gain_dbi(&self) -> f64 {
        self.gnb_gain_dbi + 10.0 * (self.gnb_elements() as f64).log10()
    }

    pub fn ue_array_gain_dbi(&self) -> f64 {
        self.ue_gain_dbi + 10.0 * (self.ue_elements() as f64).log10()
    }

    /// Power radiated per gNB antenna under a uniform-magnitude precoder.
    pub fn per_antenna_power_dbm(&self) -> f64 {
        self.tx_power_dbm - 10.0 * (self.gnb_elements() as f64).log10()
    }
}

/// Position and orientation of a planar antenna array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayPose {
    pub center: Vec3,
    pub boresight: Vec3,
    /// In-plane horizontal axis; positive beam angles lean toward it.
    pub x_axis: Vec3,
    pub y_axis: Vec3,
}

impl ArrayPose {
    /// Pose with `boresight`, horizontal axis chosen orthogonal to `up`.
    pub fn facing(center: Vec3, boresight: Vec3, up: Vec3) -> Self {
        let b = boresight.normalize();
        let mut x = b.cross(&up);
        if x.norm() < 1e-9 {
            x = b.cross(&Vec3::x());
            if x.norm() < 1e-9 {
                x = b.cross(&Vec3::y());
            }
        }
        let x = x.normalize();
        ArrayPose {
            center,
            boresight: b,
            x_axis: x,
            y_axis: x.cross(&b),
        }
    }

    pub fn element_positions(&self, layout: ArrayLayout, wavelength: f64) -> Vec<Vec3> {
        let d = wavelength / 2.0;
        let off = |i: usize, n: usize| (i as f64 - (n as f64 - 1.0) / 2.0) * d;
        let mut out = Vec::with_capacity(layout.len());
        for r in 0..layout.rows {
            for c in 0..layout.cols {
                out.push(self.center + self.x_axis * off(c, layout.cols) + self.y_axis * off(r, layout.rows));
            }
        }
        out
    }

    /// World direction at `angle_deg` in the array's horizontal plane.
    pub fn beam_direction(&self, angle_deg: f64) -> Vec3 {
        let (s, c) = angle_deg.to_radians().sin_cos();
        self.boresight * c + self.x_axis * s
    }

    /// Unit-norm receive steering vector `exp(j k0 (e - c).d) / sqrt(M)`.
    pub fn steering(&self, layout: ArrayLayout, wavelength: f64, direction: Vec3) -> Array1<Complex64> {
        let k0 = 2.0 * PI / wavelength;
        let pos = self.element_positions(layout, wavelength);
        let scale = 1.0 / (pos.len() as f64).sqrt();
        pos.iter()
            .map(|p| Complex64::from_polar(scale, k0 * (p - self.center).dot(&direction)))
            .collect()
    }

    /// Combiner for a receive beam at `angle_deg` off boresight.
    pub fn beam(&self, layout: ArrayLayout, wavelength: f64, angle_deg: f64) -> Array1<Complex64> {
        self.steering(layout, wavelength, self.beam_direction(angle_deg))
    }
}

/// gNB pose: boresight on the RIS.
pub fn gnb_pose(geometry: &LinkGeometry) -> ArrayPose {
    let up = geometry.frame().y;
    ArrayPose::facing(
        geometry.gnb_position,
        geometry.ris_position - geometry.gnb_position,
        up,
    )
}

pub fn ue_pose(geometry: &LinkGeometry) -> ArrayPose {
    ArrayPose::facing(geometry.ue_position, geometry.ue_boresight_vector(), geometry.frame().y)
}

/// Fixed transmit beam pointed at the RIS center.
pub fn gnb_boresight_beam(geometry: &LinkGeometry, radio: &RadioConfig) -> Array1<Complex64> {
    let pose = gnb_pose(geometry);
    pose.steering(radio.gnb_array, radio.wavelength, pose.boresight).mapv(|z| z.conj())
}

/// Narrowband MIMO channel through the RIS.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadedChannel {
    /// `N^2 x M_gNB`.
    pub h_gnb_ris: Array2<Complex64>,
    /// `M_UE x N^2`.
    pub h_ris_ue: Array2<Complex64>,
    /// `M_UE x M_gNB`; zero when the direct path is blocked and no multipath ray is set.
    pub h_gnb_ue: Array2<Complex64>,
    /// Unit-modulus RIS interaction vector, length `N^2`.
    pub psi: Array1<Complex64>,
}

impl CascadedChannel {
    pub fn with_psi(mut self, psi: Array1<Complex64>) -> Result<Self, LinkError> {
        check_psi(&psi, self.h_gnb_ris.nrows())?;
        self.psi = psi;
        Ok(self)
    }

    /// `H_RIS,UE diag(psi) H_gNB,RIS + H_gNB,UE`.
    pub fn effective(&self) -> Array2<Complex64> {
        let mut scaled = self.h_gnb_ris.clone();
        for (mut row, p) in scaled.rows_mut().into_iter().zip(self.psi.iter()) {
            row.mapv_inplace(|z| z * p);
        }
        self.h_ris_ue.dot(&scaled) + &self.h_gnb_ue
    }
}

fn check_psi(psi: &Array1<Complex64>, len: usize) -> Result<(), LinkError> {
    if psi.len() != len {
        return Err(LinkError::Argument(format!("psi has {} entries, expected {len}", psi.len())));
    }
    if psi.iter().any(|z| (z.norm() - 1.0).abs() > NORM_TOL) {
        return Err(LinkError::Argument("psi entries must have unit modulus".into()));
    }
    Ok(())
}

/// Per-element free-space hop between antenna `a` and RIS element `k`.
///
/// Each element acts as an aperture of area `d^2` with gain `4 pi d^2 cos(theta) / lambda^2`
/// toward the antenna; spreading is `lambda / (4 pi r)`; `sqrt(eta)` is split evenly across
/// the two hops so the construction stays reciprocal.
fn element_hop(
    antenna: Vec3,
    element: Vec3,
    normal: Vec3,
    cell_area: f64,
    antenna_gain: f64,
    eta_quarter: f64,
    wavelength: f64,
) -> Complex64 {
    let delta = antenna - element;
    let r = delta.norm();
    let cos = normal.dot(&delta) / r;
    if cos <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let elem_gain = 4.0 * PI * cell_area * cos / (wavelength * wavelength);
    let amp = antenna_gain.sqrt() * elem_gain.sqrt() * eta_quarter * wavelength / (4.0 * PI * r);
    Complex64::from_polar(amp, -2.0 * PI * r / wavelength)
}

fn friis(a: Vec3, b: Vec3, gain: f64, wavelength: f64) -> Complex64 {
    let r = (a - b).norm();
    Complex64::from_polar(gain.sqrt() * wavelength / (4.0 * PI * r), -2.0 * PI * r / wavelength)
}

/// RIS element world positions, index `k = m N + n`.
pub fn ris_element_positions(aperture: &RisAperture, geometry: &LinkGeometry) -> Vec<Vec3> {
    let frame = geometry.frame();
    let n = aperture.n();
    let mut out = Vec::with_capacity(n * n);
    for m in 0..n {
        for nn in 0..n {
            let (x, y) = aperture.element_xy(m, nn);
            out.push(frame.element_position(x, y));
        }
    }
    out
}

struct HopModel {
    elements: Vec<Vec3>,
    normal: Vec3,
    cell_area: f64,
    eta_quarter: f64,
    wavelength: f64,
}

impl HopModel {
    fn new(aperture: &RisAperture, geometry: &LinkGeometry, radio: &RadioConfig) -> Self {
        let d = aperture.params().element_spacing;
        HopModel {
            elements: ris_element_positions(aperture, geometry),
            normal: geometry.frame().z,
            cell_area: d * d,
            eta_quarter: aperture.params().efficiency.powf(0.25),
            wavelength: radio.wavelength,
        }
    }

    /// `antennas.len() x N^2` block of antenna-element hops.
    fn block(&self, antennas: &[Vec3], gain: f64) -> Array2<Complex64> {
        Array2::from_shape_fn((antennas.len(), self.elements.len()), |(a, k)| {
            element_hop(
                antennas[a],
                self.elements[k],
                self.normal,
                self.cell_area,
                gain,
                self.eta_quarter,
                self.wavelength,
            )
        })
    }
}

fn direct_block(
    geometry: &LinkGeometry,
    radio: &RadioConfig,
    gnb: &[Vec3],
    ue: &[Vec3],
) -> Array2<Complex64> {
    let rel = if geometry.direct_path_blocked {
        match geometry.multipath_gain_db {
            Some(db) => db_to_linear(db),
            None => return Array2::zeros((ue.len(), gnb.len())),
        }
    } else {
        1.0
    };
    let g = db_to_linear(radio.gnb_gain_dbi + radio.ue_gain_dbi) * rel;
    Array2::from_shape_fn((ue.len(), gnb.len()), |(b, a)| friis(gnb[a], ue[b], g, radio.wavelength))
}

/// Free-space line-of-sight channels from exact element-to-antenna distances.
///
/// `psi` is initialized to all ones.
pub fn synthesize_channels(
    aperture: &RisAperture,
    geometry: &LinkGeometry,
    radio: &RadioConfig,
) -> Result<CascadedChannel, LinkError> {
    geometry.validate()?;
    radio.validate()?;
    let hop = HopModel::new(aperture, geometry, radio);
    let gnb = gnb_pose(geometry).element_positions(radio.gnb_array, radio.wavelength);
    let ue = ue_pose(geometry).element_positions(radio.ue_array, radio.wavelength);
    let h_gnb_ris = hop.block(&gnb, db_to_linear(radio.gnb_gain_dbi)).reversed_axes();
    let h_ris_ue = hop.block(&ue, db_to_linear(radio.ue_gain_dbi));
    let h_gnb_ue = direct_block(geometry, radio, &gnb, &ue);
    let n2 = hop.elements.len();
    Ok(CascadedChannel {
        h_gnb_ris,
        h_ris_ue,
        h_gnb_ue,
        psi: Array1::from_elem(n2, Complex64::new(1.0, 0.0)),
    })
}

fn check_unit(v: &Array1<Complex64>, len: usize, what: &str) -> Result<(), LinkError> {
    if v.len() != len {
        return Err(LinkError::Argument(format!("{what} has {} entries, expected {len}", v.len())));
    }
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(LinkError::Argument(format!("{what} must be unit-norm (norm {norm})")));
    }
    Ok(())
}

/// Cascaded narrowband received power used as the RSRP observable, in dBm,
/// floored at the noise power.
pub fn rsrp(
    channel: &CascadedChannel,
    ue_combiner: &Array1<Complex64>,
    gnb_beam: &Array1<Complex64>,
    radio: &RadioConfig,
) -> Result<f64, LinkError> {
    check_unit(ue_combiner, channel.h_ris_ue.nrows(), "UE combiner")?;
    check_unit(gnb_beam, channel.h_gnb_ris.ncols(), "gNB beam")?;
    check_psi(&channel.psi, channel.h_gnb_ris.nrows())?;
    let y = ue_combiner
        .mapv(|z| z.conj())
        .dot(&channel.effective().dot(gnb_beam));
    Ok(power_to_rsrp(y.norm_sqr(), radio))
}

fn power_to_rsrp(gain: f64, radio: &RadioConfig) -> f64 {
    let dbm = watts_to_dbm(gain * dbm_to_watts(radio.tx_power_dbm)) + radio.rsrp_offset_db;
    if dbm.is_nan() {
        radio.noise_power_dbm
    } else {
        dbm.max(radio.noise_power_dbm)
    }
}

/// RIS interaction vector of a 1-bit configuration:
/// `psi_k = exp(-j (pi s_k + phi_rand_k))`, row-major.
pub fn interaction_vector(aperture: &RisAperture, states: &Array2<bool>) -> Array1<Complex64> {
    states
        .iter()
        .zip(aperture.pre_phase().iter())
        .map(|(&s, &pre)| {
            let phase = if s { PI } else { 0.0 } + pre.to_radians();
            Complex64::from_polar(1.0, -phase)
        })
        .collect()
}

/// Seeded unconfigured-surface scatter: i.i.d. uniform phases.
pub fn random_interaction_vector(len: usize, seed: u64) -> Array1<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len)
        .map(|_| Complex64::from_polar(1.0, rng.random::<f64>() * 2.0 * PI))
        .collect()
}

/// Static gNB side of the link with per-UE-position channel evaluation.
///
/// The gNB beam is folded into a per-element illumination vector once.
pub struct LinkEvaluator {
    radio: RadioConfig,
    geometry: LinkGeometry,
    hop: HopModel,
    illumination: Array1<Complex64>,
    gnb_positions: Vec<Vec3>,
    gnb_beam: Array1<Complex64>,
}

impl LinkEvaluator {
    pub fn new(aperture: &RisAperture, geometry: &LinkGeometry, radio: &RadioConfig) -> Result<Self, LinkError> {
        geometry.validate()?;
        radio.validate()?;
        let hop = HopModel::new(aperture, geometry, radio);
        let gnb_positions = gnb_pose(geometry).element_positions(radio.gnb_array, radio.wavelength);
        let gnb_beam = gnb_boresight_beam(geometry, radio);
        let h = hop.block(&gnb_positions, db_to_linear(radio.gnb_gain_dbi));
        let illumination = h.t().dot(&gnb_beam);
        Ok(LinkEvaluator {
            radio: radio.clone(),
            geometry: geometry.clone(),
            hop,
            illumination,
            gnb_positions,
            gnb_beam,
        })
    }

    pub fn radio(&self) -> &RadioConfig {
        &self.radio
    }

    pub fn geometry(&self) -> &LinkGeometry {
        &self.geometry
    }

    /// Channel snapshot for a UE at `ue_position` with optional explicit boresight.
    pub fn at(&self, ue_position: Vec3, ue_boresight: Option<Vec3>) -> Result<UeLink<'_>, LinkError> {
        let mut geometry = self.geometry.with_ue(ue_position);
        if ue_boresight.is_some() {
            geometry.ue_boresight = ue_boresight;
        }
        geometry.validate()?;
        let pose = ue_pose(&geometry);
        let ue = pose.element_positions(self.radio.ue_array, self.radio.wavelength);
        let h_ris_ue = self.hop.block(&ue, db_to_linear(self.radio.ue_gain_dbi));
        let direct = direct_block(&geometry, &self.radio, &self.gnb_positions, &ue).dot(&self.gnb_beam);
        Ok(UeLink {
            pose,
            h_ris_ue,
            direct,
            illumination: &self.illumination,
            radio: &self.radio,
        })
    }
}

/// One UE position's view of the link.
pub struct UeLink<'a> {
    pub pose: ArrayPose,
    h_ris_ue: Array2<Complex64>,
    direct: Array1<Complex64>,
    illumination: &'a Array1<Complex64>,
    radio: &'a RadioConfig,
}

impl UeLink<'_> {
    pub fn ue_beam(&self, angle_deg: f64) -> Array1<Complex64> {
        self.pose.beam(self.radio.ue_array, self.radio.wavelength, angle_deg)
    }

    /// Fold a UE combiner into per-element weights.
    pub fn combine(&self, w: &Array1<Complex64>) -> CombinedLink {
        let wc = w.mapv(|z| z.conj());
        let through = wc.dot(&self.h_ris_ue);
        CombinedLink {
            weights: &through * self.illumination,
            direct: wc.dot(&self.direct),
        }
    }

    pub fn rsrp_dbm(&self, w: &Array1<Complex64>, psi: &Array1<Complex64>) -> f64 {
        self.combine(w).rsrp_dbm(psi, self.radio)
    }
}

/// Per-element complex weights of the RIS path for a fixed UE combiner.
#[derive(Debug, Clone)]
pub struct CombinedLink {
    pub weights: Array1<Complex64>,
    pub direct: Complex64,
}

impl CombinedLink {
    pub fn amplitude(&self, psi: &Array1<Complex64>) -> Complex64 {
        self.weights.dot(psi) + self.direct
    }

    pub fn rsrp_dbm(&self, psi: &Array1<Complex64>, radio: &RadioConfig) -> f64 {
        power_to_rsrp(self.amplitude(psi).norm_sqr(), radio)
    }
}

/// Joint argmax of a score over UE beams and RIS codewords.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointChoice {
    pub ue_index: usize,
    pub ris_index: usize,
    pub rsrp_dbm: f64,
}

/// Exhaustive search; ties go to the lexicographically lowest `(ue, ris)`.
/// NaN scores never win.
pub fn joint_beam_search<R, U, F>(codebook_ris: &[R], codebook_ue: &[U], mut channel_fn: F) -> Result<JointChoice, LinkError>
where
    F: FnMut(&U, &R) -> f64,
{
    if codebook_ris.is_empty() || codebook_ue.is_empty() {
        return Err(LinkError::Argument("codebooks must be non-empty".into()));
    }
    let mut best = JointChoice {
        ue_index: 0,
        ris_index: 0,
        rsrp_dbm: f64::NAN,
    };
    for (j, w) in codebook_ue.iter().enumerate() {
        for (i, psi) in codebook_ris.iter().enumerate() {
            let v = channel_fn(w, psi);
            if !v.is_nan() && (best.rsrp_dbm.is_nan() || v > best.rsrp_dbm) {
                best = JointChoice {
                    ue_index: j,
                    ris_index: i,
                    rsrp_dbm: v,
                };
            }
        }
    }
    if best.rsrp_dbm.is_nan() {
        best.rsrp_dbm = f64::NEG_INFINITY;
    }
    Ok(best)
}
