use serde::{Deserialize, Serialize};

use super::PhyError;

/// A direction in the aperture's spherical frame, degrees.
///
/// `theta` is measured from the surface normal, `phi` from the aperture x
/// axis. Grid directions may use any `theta` in `[0, 90]`; steering
/// directions are restricted by [`SteeringPair::new`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub theta_deg: f64,
    pub phi_deg: f64,
}

impl Direction {
    pub const BROADSIDE: Direction = Direction {
        theta_deg: 0.0,
        phi_deg: 0.0,
    };

    pub fn new(theta_deg: f64, phi_deg: f64) -> Self {
        Self { theta_deg, phi_deg }
    }

    /// Point on the azimuth cut (the x-z plane): positive angles lean toward +x.
    pub fn azimuth(angle_deg: f64) -> Self {
        if angle_deg >= 0.0 {
            Self::new(angle_deg, 0.0)
        } else {
            Self::new(-angle_deg, -180.0)
        }
    }

    /// Direction cosines `(u, v)`.
    pub fn uv(&self) -> (f64, f64) {
        let st = self.theta_deg.to_radians().sin();
        let (sp, cp) = self.phi_deg.to_radians().sin_cos();
        (st * cp, st * sp)
    }

    /// Signed angle in the x-z plane, `atan2(u, cos theta)`; equals the
    /// azimuth passed to [`Direction::azimuth`] for cut points.
    pub fn cut_angle_deg(&self) -> f64 {
        let (u, _) = self.uv();
        u.atan2(self.theta_deg.to_radians().cos()).to_degrees()
    }

    fn validate_steering(&self, what: &str) -> Result<(), PhyError> {
        if !(0.0..90.0).contains(&self.theta_deg) {
            return Err(PhyError::Argument(format!(
                "{what} theta {} outside [0, 90)",
                self.theta_deg
            )));
        }
        if !(-180.0..180.0).contains(&self.phi_deg) {
            return Err(PhyError::Argument(format!(
                "{what} phi {} outside [-180, 180)",
                self.phi_deg
            )));
        }
        Ok(())
    }
}

/// Incident/reflected direction pair a codeword is designed for.
///
/// The incident angles describe the transverse propagation direction of the
/// illuminating plane wave, so a uniform surface reflects specularly toward
/// `incident` itself. A source sitting at `(theta, phi)` therefore
/// illuminates with `(theta, phi + 180)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteeringPair {
    pub incident: Direction,
    pub reflected: Direction,
}

impl SteeringPair {
    pub fn new(incident: Direction, reflected: Direction) -> Result<Self, PhyError> {
        incident.validate_steering("incident")?;
        reflected.validate_steering("reflected")?;
        Ok(Self {
            incident,
            reflected,
        })
    }

    /// Normal incidence, reflected toward `angle_deg` on the azimuth cut.
    pub fn normal_to_azimuth(angle_deg: f64) -> Result<Self, PhyError> {
        Self::new(Direction::BROADSIDE, Direction::azimuth(angle_deg))
    }
}

/// Evenly spaced azimuth cut from `start` to `end` inclusive.
pub fn azimuth_cut(start_deg: f64, end_deg: f64, step_deg: f64) -> Vec<Direction> {
    let count = ((end_deg - start_deg) / step_deg + 1e-9).floor() as usize + 1;
    (0..count)
        .map(|i| Direction::azimuth(start_deg + i as f64 * step_deg))
        .collect()
}

/// The default pattern grid: -90..+90 degrees at 0.25 degree spacing.
pub fn default_cut() -> Vec<Direction> {
    azimuth_cut(-90.0, 90.0, 0.25)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn azimuth_roundtrips_through_cut_angle() {
        for a in [-89.5, -60.0, -0.25, 0.0, 12.5, 60.0, 90.0] {
            let d = Direction::azimuth(a);
            assert!((d.cut_angle_deg() - a).abs() < 1e-9, "{a}");
        }
    }

    #[test]
    fn steering_bounds() {
        assert!(SteeringPair::normal_to_azimuth(89.0).is_ok());
        assert!(SteeringPair::normal_to_azimuth(90.0).is_err());
        assert!(SteeringPair::new(Direction::new(10.0, 180.0), Direction::BROADSIDE).is_err());
        assert!(SteeringPair::new(Direction::new(10.0, -180.0), Direction::BROADSIDE).is_ok());
    }

    #[test]
    fn default_cut_has_721_points() {
        let g = default_cut();
        assert_eq!(g.len(), 721);
        assert!((g[0].cut_angle_deg() + 90.0).abs() < 1e-9);
        assert!((g[720].cut_angle_deg() - 90.0).abs() < 1e-9);
    }
}
