use ndarray::Array2;
use num_complex::Complex64;

use super::{progressive_phase, state_phase_deg, Direction, PhyError, RisAperture, SteeringPair};

/// One 1-bit configuration of the surface.
#[derive(Debug, Clone, PartialEq)]
pub struct Codeword {
    /// `true` = 180 degree element state.
    pub states: Array2<bool>,
    pub steering: SteeringPair,
    pub index: usize,
}

impl Codeword {
    /// Element phases in degrees (0 or 180).
    pub fn phase_deg(&self) -> Array2<f64> {
        codeword_phase_deg(&self.states)
    }
}

pub fn codeword_phase_deg(states: &Array2<bool>) -> Array2<f64> {
    states.mapv(state_phase_deg)
}

/// Far-field array-factor magnitude over a list of directions.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamPattern {
    pub grid: Vec<Direction>,
    /// `20 log10(|AF| / peak)`, so the maximum entry is exactly 0.
    pub magnitude_db: Vec<f64>,
    /// Unnormalized peak `|AF|`.
    pub peak_linear: f64,
    /// Illumination the pattern was computed for.
    pub incident: Direction,
}

/// Floor applied to normalized magnitudes before taking logs.
const DB_FLOOR: f64 = -400.0;

/// A lobe weaker than this (dB below the pattern maximum) is not a main beam.
const MAIN_LOBE_FLOOR_DB: f64 = 6.0;

/// Array factor of a 1-bit codeword under plane-wave illumination.
pub fn array_factor(
    aperture: &RisAperture,
    codeword: &Codeword,
    incident: Direction,
    grid: &[Direction],
) -> Result<BeamPattern, PhyError> {
    array_factor_from_phase(aperture, &codeword.phase_deg(), incident, grid)
}

/// Array factor for an arbitrary reconfigurable element phase (degrees).
///
/// Each element radiates `exp(-j (phase + incident + pre_phase))` and the
/// observation phase is `exp(+j k0 (x u + y v))`, so a compensated
/// continuous phase peaks at its reflected direction.
pub fn array_factor_from_phase(
    aperture: &RisAperture,
    element_phase_deg: &Array2<f64>,
    incident: Direction,
    grid: &[Direction],
) -> Result<BeamPattern, PhyError> {
    if grid.is_empty() {
        return Err(PhyError::Argument("pattern grid is empty".into()));
    }
    let n = aperture.n();
    if element_phase_deg.dim() != (n, n) {
        return Err(PhyError::Config(format!(
            "element phase is {:?}, aperture is {n}x{n}",
            element_phase_deg.dim()
        )));
    }
    let illum = progressive_phase(aperture, incident);
    let excitation: Vec<Complex64> = element_phase_deg
        .iter()
        .zip(illum.iter())
        .zip(aperture.pre_phase().iter())
        .map(|((q, i), r)| Complex64::from_polar(1.0, -(q + i + r).to_radians()))
        .collect();

    let k0 = aperture.wavenumber();
    let coords: Vec<f64> = (0..n).map(|i| aperture.params().coordinate(i)).collect();
    let mut ex = vec![Complex64::new(0.0, 0.0); n];
    let mut ey = vec![Complex64::new(0.0, 0.0); n];
    let mags: Vec<f64> = grid
        .iter()
        .map(|d| {
            let (u, v) = d.uv();
            for (i, c) in coords.iter().enumerate() {
                ex[i] = Complex64::from_polar(1.0, k0 * c * u);
                ey[i] = Complex64::from_polar(1.0, k0 * c * v);
            }
            let mut sum = Complex64::new(0.0, 0.0);
            for m in 0..n {
                let row = &excitation[m * n..(m + 1) * n];
                let inner: Complex64 = row.iter().zip(&ey).map(|(a, e)| a * e).sum();
                sum += ex[m] * inner;
            }
            sum.norm()
        })
        .collect();

    let peak = mags.iter().cloned().fold(0.0, f64::max);
    if peak <= 0.0 {
        return Err(PhyError::SynthesisFailure("pattern is identically zero".into()));
    }
    let magnitude_db = mags
        .iter()
        .map(|&m| {
            if m == peak {
                0.0
            } else {
                (20.0 * (m / peak).log10()).max(DB_FLOOR)
            }
        })
        .collect();
    Ok(BeamPattern {
        grid: grid.to_vec(),
        magnitude_db,
        peak_linear: peak,
        incident,
    })
}

/// Main-beam quality figures on an azimuth cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamMetrics {
    /// -3 dB width of the main lobe, degrees.
    pub hpbw_deg: f64,
    /// Cut angle of the main-lobe maximum, degrees.
    pub peak_angle: f64,
    /// Main-lobe level relative to the pattern maximum (0 unless a spurious
    /// lobe is stronger than the main beam).
    pub main_lobe_db: f64,
    /// Main lobe minus the highest lobe outside it, dB (positive).
    pub sll_db: f64,
    /// Main lobe minus the strongest level near the mirror of the main beam
    /// about the specular direction, dB (positive). Infinite when the mirror
    /// falls outside visible space.
    pub quantization_lobe_db: f64,
}

/// Beamwidth, side-lobe and quantization-lobe figures for a cut pattern.
///
/// The grid must be an azimuth cut ordered by increasing cut angle.
pub fn beam_metrics(pattern: &BeamPattern, main_beam: Direction) -> Result<BeamMetrics, PhyError> {
    let angles: Vec<f64> = pattern.grid.iter().map(|d| d.cut_angle_deg()).collect();
    let db = &pattern.magnitude_db;
    if angles.len() < 3 {
        return Err(PhyError::Argument("need at least 3 grid points".into()));
    }
    if angles.windows(2).any(|w| w[1] <= w[0]) {
        return Err(PhyError::Argument("grid is not an increasing azimuth cut".into()));
    }
    let resolution = angles
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);

    let target = main_beam.cut_angle_deg();
    let mut peak = nearest_index(&angles, target);
    loop {
        let left = peak.checked_sub(1).filter(|&j| db[j] > db[peak]);
        let right = Some(peak + 1).filter(|&j| j < db.len() && db[j] > db[peak]);
        match (left, right) {
            (Some(l), Some(r)) => peak = if db[l] >= db[r] { l } else { r },
            (Some(l), None) => peak = l,
            (None, Some(r)) => peak = r,
            (None, None) => break,
        }
    }
    if (angles[peak] - target).abs() > 2.0 * resolution + 1e-9 {
        return Err(PhyError::SynthesisFailure(format!(
            "no main beam within {:.3} deg of {target:.3} deg (nearest peak at {:.3})",
            2.0 * resolution,
            angles[peak]
        )));
    }
    let main = db[peak];
    if main < -MAIN_LOBE_FLOOR_DB {
        return Err(PhyError::SynthesisFailure(format!(
            "lobe at {:.3} deg is {:.1} dB below the pattern maximum",
            angles[peak], -main
        )));
    }
    let half = main - 3.0;

    let crossing = |from: usize, step: isize| -> f64 {
        let mut j = from as isize;
        loop {
            let next = j + step;
            if next < 0 || next as usize >= db.len() {
                return angles[j as usize];
            }
            let (a, b) = (db[j as usize], db[next as usize]);
            if b < half {
                let t = (a - half) / (a - b);
                return angles[j as usize] + t * (angles[next as usize] - angles[j as usize]);
            }
            j = next;
        }
    };
    let hpbw_deg = crossing(peak, 1) - crossing(peak, -1);

    let mut lo = peak;
    while lo > 0 && db[lo - 1] <= db[lo] {
        lo -= 1;
    }
    let mut hi = peak;
    while hi + 1 < db.len() && db[hi + 1] <= db[hi] {
        hi += 1;
    }
    let outside = db[..lo]
        .iter()
        .chain(&db[hi + 1..])
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let sll_db = main - outside;

    let (u_spec, _) = pattern.incident.uv();
    let u_main = angles[peak].to_radians().sin();
    let u_mirror = 2.0 * u_spec - u_main;
    let quantization_lobe_db = if u_mirror.abs() > 1.0 {
        f64::INFINITY
    } else {
        let mirror = u_mirror.asin().to_degrees();
        let window = hpbw_deg.max(2.0 * resolution);
        let level = angles
            .iter()
            .zip(db)
            .filter(|(a, _)| (*a - mirror).abs() <= window)
            .map(|(_, &d)| d)
            .fold(f64::NEG_INFINITY, f64::max);
        main - level
    };

    Ok(BeamMetrics {
        hpbw_deg,
        peak_angle: angles[peak],
        main_lobe_db: main,
        sll_db,
        quantization_lobe_db,
    })
}

fn nearest_index(angles: &[f64], target: f64) -> usize {
    angles
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0)
}
