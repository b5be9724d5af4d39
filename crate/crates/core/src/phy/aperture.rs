use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::PhyError;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Physical parameters of a square RIS lattice, without the pre-phase matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApertureParams {
    /// Elements per side (the surface has `n * n` elements).
    pub n: usize,
    /// Element pitch in meters.
    pub element_spacing: f64,
    /// Carrier frequency in hertz.
    pub carrier_frequency: f64,
    /// Aperture efficiency in (0, 1].
    pub efficiency: f64,
}

impl ApertureParams {
    /// 32x32 surface at 27.2 GHz with a 5.4 mm pitch.
    pub fn prototype() -> Self {
        Self {
            n: 32,
            element_spacing: 5.4e-3,
            carrier_frequency: 27.2e9,
            efficiency: 1.0,
        }
    }

    /// Half-wavelength lattice at the given frequency.
    pub fn half_wavelength(n: usize, carrier_frequency: f64) -> Self {
        Self {
            n,
            element_spacing: SPEED_OF_LIGHT / carrier_frequency / 2.0,
            carrier_frequency,
            efficiency: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), PhyError> {
        if self.n == 0 {
            return Err(PhyError::Config("n_elements_per_side must be >= 1".into()));
        }
        if !(self.element_spacing > 0.0 && self.element_spacing.is_finite()) {
            return Err(PhyError::Config("element_spacing must be > 0".into()));
        }
        if !(self.carrier_frequency > 0.0 && self.carrier_frequency.is_finite()) {
            return Err(PhyError::Config("carrier_frequency must be > 0".into()));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(PhyError::Config("efficiency must lie in (0, 1]".into()));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency
    }

    /// Free-space wavenumber k0 in rad/m.
    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength()
    }

    /// Physical area `(n * d)^2` in m^2.
    pub fn area(&self) -> f64 {
        let side = self.n as f64 * self.element_spacing;
        side * side
    }

    /// Centered lattice coordinate of index `i` along either axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        (i as f64 - (self.n as f64 - 1.0) / 2.0) * self.element_spacing
    }
}

/// A RIS surface: lattice parameters plus the fixed per-element pre-phase
/// (degrees in `[0, 180)`), baked into the unit cells at fabrication.
#[derive(Debug, Clone, PartialEq)]
pub struct RisAperture {
    params: ApertureParams,
    pre_phase: Array2<f64>,
    pre_phase_seed: Option<u64>,
}

impl RisAperture {
    pub fn new(params: ApertureParams, pre_phase: Array2<f64>) -> Result<Self, PhyError> {
        params.validate()?;
        if pre_phase.dim() != (params.n, params.n) {
            return Err(PhyError::Config(format!(
                "pre-phase matrix is {:?}, aperture needs {}x{}",
                pre_phase.dim(),
                params.n,
                params.n
            )));
        }
        if let Some(bad) = pre_phase.iter().find(|p| !(0.0..180.0).contains(*p)) {
            return Err(PhyError::Config(format!(
                "pre-phase entry {bad} outside [0, 180)"
            )));
        }
        Ok(Self {
            params,
            pre_phase,
            pre_phase_seed: None,
        })
    }

    /// Aperture with all-zero pre-phase.
    pub fn without_pre_phase(params: ApertureParams) -> Result<Self, PhyError> {
        let n = params.n;
        Self::new(params, Array2::zeros((n, n)))
    }

    /// Aperture whose pre-phase is regenerated from `seed`.
    pub fn seeded(params: ApertureParams, seed: u64) -> Result<Self, PhyError> {
        params.validate()?;
        let pre = super::generate_pre_phase(params.n, seed);
        let mut ap = Self::new(params, pre)?;
        ap.pre_phase_seed = Some(seed);
        Ok(ap)
    }

    pub fn params(&self) -> &ApertureParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn pre_phase(&self) -> &Array2<f64> {
        &self.pre_phase
    }

    /// Seed the pre-phase was generated from, when it came from one.
    pub fn pre_phase_seed(&self) -> Option<u64> {
        self.pre_phase_seed
    }

    pub fn has_pre_phase(&self) -> bool {
        self.pre_phase.iter().any(|&p| p != 0.0)
    }

    pub fn wavelength(&self) -> f64 {
        self.params.wavelength()
    }

    pub fn wavenumber(&self) -> f64 {
        self.params.wavenumber()
    }

    pub fn area(&self) -> f64 {
        self.params.area()
    }

    /// Element coordinates `(x_m, y_n)` in the aperture plane.
    pub fn element_xy(&self, m: usize, n: usize) -> (f64, f64) {
        (self.params.coordinate(m), self.params.coordinate(n))
    }
}
