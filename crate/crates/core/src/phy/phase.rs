use ndarray::Array2;

use super::{Direction, RisAperture, SteeringPair};

/// Reduce an angle in degrees to `(-180, 180]`.
pub fn wrap_deg(phase: f64) -> f64 {
    phase - 360.0 * ((phase - 180.0) / 360.0).ceil()
}

/// Progressive phase `k0 (x u + y v)` in degrees across the lattice for `dir`.
pub fn progressive_phase(aperture: &RisAperture, dir: Direction) -> Array2<f64> {
    let n = aperture.n();
    let k0 = aperture.wavenumber();
    let (u, v) = dir.uv();
    Array2::from_shape_fn((n, n), |(m, nn)| {
        let (x, y) = aperture.element_xy(m, nn);
        (k0 * (x * u + y * v)).to_degrees()
    })
}

/// Continuous element phase that steers `steering.incident` into
/// `steering.reflected`, compensated for the aperture's pre-phase.
///
/// Entries are reduced to `(-180, 180]` degrees.
pub fn continuous_phase(aperture: &RisAperture, steering: &SteeringPair) -> Array2<f64> {
    let reflected = progressive_phase(aperture, steering.reflected);
    let incident = progressive_phase(aperture, steering.incident);
    let mut out = reflected - incident - aperture.pre_phase();
    out.mapv_inplace(wrap_deg);
    out
}

/// 1-bit state for one phase value: `false` (0 deg) on `[-90, 90)`, `true` (180 deg) otherwise.
pub fn quantize_value(phase_deg: f64) -> bool {
    let p = wrap_deg(phase_deg);
    !(-90.0..90.0).contains(&p)
}

/// Quantize a phase matrix to 1-bit states.
pub fn quantize(phase: &Array2<f64>) -> Array2<bool> {
    phase.mapv(quantize_value)
}

/// Phase in degrees realized by a 1-bit state.
pub fn state_phase_deg(state: bool) -> f64 {
    if state {
        180.0
    } else {
        0.0
    }
}
