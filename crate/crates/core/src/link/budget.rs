use std::f64::consts::PI;

use super::{LinkError, LinkGeometry, RadioConfig};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    linear_to_db(w) + 30.0
}

/// Peak monostatic RCS of a flat plate: `4 pi eta A^2 / lambda^2`.
pub fn monostatic_rcs(area: f64, wavelength: f64, efficiency: f64) -> f64 {
    4.0 * PI * efficiency * area * area / (wavelength * wavelength)
}

/// Bistatic RCS for incidence `theta_i` and observation `theta_d` off the normal (degrees).
pub fn bistatic_rcs(area: f64, wavelength: f64, efficiency: f64, theta_i_deg: f64, theta_d_deg: f64) -> f64 {
    // Multiply the cosines first so swapping the angles is exact.
    let obliquity = theta_i_deg.to_radians().cos() * theta_d_deg.to_radians().cos();
    4.0 * PI * efficiency * obliquity * area * area / (wavelength * wavelength)
}

/// Received power through the RIS from the bistatic radar equation.
///
/// Uses the total array gains of `radio` and the distances of `geometry`.
pub fn received_power_linear(radio: &RadioConfig, geometry: &LinkGeometry, rcs: f64) -> Result<f64, LinkError> {
    let ri = geometry.incidence_distance();
    let rd = geometry.reflection_distance();
    if !(ri > 0.0 && rd > 0.0) {
        return Err(LinkError::Geometry("distances must be strictly positive".into()));
    }
    if !(rcs > 0.0) {
        return Err(LinkError::Argument("rcs must be > 0".into()));
    }
    let pt = dbm_to_watts(radio.tx_power_dbm);
    let g = db_to_linear(radio.gnb_array_gain_dbi()) * db_to_linear(radio.ue_array_gain_dbi());
    let lambda = radio.wavelength;
    Ok(pt * g * lambda * lambda * rcs / ((4.0 * PI).powi(3) * ri * ri * rd * rd))
}

/// [`received_power_linear`] in dBm.
pub fn received_power(radio: &RadioConfig, geometry: &LinkGeometry, rcs: f64) -> Result<f64, LinkError> {
    received_power_linear(radio, geometry, rcs).map(watts_to_dbm)
}

/// Capacity-style throughput proxy in bit/s.
pub fn throughput_proxy(snr_db: f64, bandwidth_hz: f64, efficiency_factor: f64) -> Result<f64, LinkError> {
    if !(bandwidth_hz > 0.0) {
        return Err(LinkError::Argument("bandwidth must be > 0".into()));
    }
    if !(efficiency_factor > 0.0 && efficiency_factor <= 1.0) {
        return Err(LinkError::Argument("efficiency_factor must be in (0, 1]".into()));
    }
    Ok(efficiency_factor * bandwidth_hz * (1.0 + db_to_linear(snr_db)).log2())
}
