use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::LinkError;
use crate::phy::Direction;

pub type Vec3 = Vector3<f64>;

const UNIT_TOL: f64 = 1e-12;

/// Placement of gNB, RIS and UE. Positions in meters, world frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry {
    pub gnb_position: Vec3,
    pub ris_position: Vec3,
    pub ue_position: Vec3,
    /// Outward aperture normal (local +z).
    pub ris_normal: Vec3,
    /// Aperture row direction (local +x). Azimuth is measured toward this axis.
    pub ris_x_axis: Vec3,
    /// UE array boresight. `None` points the UE straight at the RIS.
    pub ue_boresight: Option<Vec3>,
    pub direct_path_blocked: bool,
    /// Optional scattered gNB-to-UE ray, dB relative to free-space LoS. Only used when
    /// the direct path is blocked.
    pub multipath_gain_db: Option<f64>,
}

impl LinkGeometry {
    /// RIS at the origin facing +z, rows along +x, UE array pointed at the RIS.
    pub fn canonical(gnb_position: Vec3, ue_position: Vec3) -> Self {
        LinkGeometry {
            gnb_position,
            ris_position: Vec3::zeros(),
            ue_position,
            ris_normal: Vec3::z(),
            ris_x_axis: Vec3::x(),
            ue_boresight: None,
            direct_path_blocked: true,
            multipath_gain_db: None,
        }
    }

    pub fn validate(&self) -> Result<(), LinkError> {
        let all = [
            self.gnb_position,
            self.ris_position,
            self.ue_position,
            self.ris_normal,
            self.ris_x_axis,
        ];
        if all.iter().any(|v| v.iter().any(|c| !c.is_finite())) {
            return Err(LinkError::Geometry("non-finite coordinate".into()));
        }
        if (self.ris_normal.norm() - 1.0).abs() > UNIT_TOL {
            return Err(LinkError::Geometry("ris_normal must have unit norm".into()));
        }
        if (self.ris_x_axis.norm() - 1.0).abs() > UNIT_TOL {
            return Err(LinkError::Geometry("ris_x_axis must have unit norm".into()));
        }
        if self.ris_normal.dot(&self.ris_x_axis).abs() > 1e-9 {
            return Err(LinkError::Geometry("ris_x_axis must be orthogonal to ris_normal".into()));
        }
        if let Some(b) = self.ue_boresight {
            if (b.norm() - 1.0).abs() > 1e-9 {
                return Err(LinkError::Geometry("ue_boresight must have unit norm".into()));
            }
        }
        if self.incidence_distance() <= 0.0 {
            return Err(LinkError::Geometry("gNB coincides with RIS".into()));
        }
        if self.reflection_distance() <= 0.0 {
            return Err(LinkError::Geometry("UE coincides with RIS".into()));
        }
        Ok(())
    }

    /// `R_i = |gnb - ris|`.
    pub fn incidence_distance(&self) -> f64 {
        (self.gnb_position - self.ris_position).norm()
    }

    /// `R_d = |ris - ue|`.
    pub fn reflection_distance(&self) -> f64 {
        (self.ue_position - self.ris_position).norm()
    }

    pub fn with_ue(&self, ue_position: Vec3) -> Self {
        LinkGeometry {
            ue_position,
            ..self.clone()
        }
    }

    pub fn frame(&self) -> RisFrame {
        RisFrame::new(self.ris_position, self.ris_normal, self.ris_x_axis)
    }

    /// Angles of the gNB as seen from the RIS.
    pub fn gnb_direction(&self) -> Result<Direction, LinkError> {
        self.frame().direction_to(self.gnb_position)
    }

    /// Propagation direction of the wave arriving from the gNB, as used for codeword synthesis.
    pub fn incident_direction(&self) -> Result<Direction, LinkError> {
        let d = self.gnb_direction()?;
        let phi = if d.theta_deg == 0.0 {
            0.0
        } else {
            wrap_phi(d.phi_deg + 180.0)
        };
        Ok(Direction::new(d.theta_deg, phi))
    }

    pub fn ue_direction(&self) -> Result<Direction, LinkError> {
        self.frame().direction_to(self.ue_position)
    }

    /// World-frame UE boresight, defaulting to the UE-to-RIS direction.
    pub fn ue_boresight_vector(&self) -> Vec3 {
        self.ue_boresight
            .unwrap_or_else(|| (self.ris_position - self.ue_position).normalize())
    }
}

fn wrap_phi(phi: f64) -> f64 {
    let w = (phi + 180.0).rem_euclid(360.0) - 180.0;
    if w >= 180.0 {
        w - 360.0
    } else {
        w
    }
}

/// Orthonormal aperture-local frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RisFrame {
    pub origin: Vec3,
    pub x: Vec3,
    pub y: Vec3,
    pub z: Vec3,
}

impl RisFrame {
    pub fn new(origin: Vec3, normal: Vec3, x_axis: Vec3) -> Self {
        let z = normal.normalize();
        let x = (x_axis - z * z.dot(&x_axis)).normalize();
        RisFrame {
            origin,
            x,
            y: z.cross(&x),
            z,
        }
    }

    pub fn to_local(&self, p: Vec3) -> Vec3 {
        let d = p - self.origin;
        Vec3::new(d.dot(&self.x), d.dot(&self.y), d.dot(&self.z))
    }

    pub fn to_world(&self, local: Vec3) -> Vec3 {
        self.origin + self.x * local.x + self.y * local.y + self.z * local.z
    }

    /// World position of aperture element `(x, y)` given in local meters.
    pub fn element_position(&self, x: f64, y: f64) -> Vec3 {
        self.origin + self.x * x + self.y * y
    }

    /// Spherical angles of `p` in the local frame.
    pub fn direction_to(&self, p: Vec3) -> Result<Direction, LinkError> {
        let l = self.to_local(p);
        let r = l.norm();
        if r <= 0.0 {
            return Err(LinkError::Geometry("point coincides with the RIS".into()));
        }
        let theta = (l.z / r).clamp(-1.0, 1.0).acos().to_degrees();
        let phi = if l.x == 0.0 && l.y == 0.0 {
            0.0
        } else {
            wrap_phi(l.y.atan2(l.x).to_degrees())
        };
        Ok(Direction::new(theta, phi))
    }
}

/// Signed UE azimuth in the RIS frame: angle from the normal toward the row axis,
/// measured in the local x-z plane. Directly comparable to codebook steering angles.
pub fn azimuth_from_ris(geometry: &LinkGeometry, ue_position: Vec3) -> Result<f64, LinkError> {
    let l = geometry.frame().to_local(ue_position);
    if l.norm() <= 0.0 {
        return Err(LinkError::Geometry("UE coincides with the RIS".into()));
    }
    Ok(l.x.atan2(l.z).to_degrees())
}

/// Propagation unit vectors `(k_i, k_d, n)` in the aperture-local frame.
pub fn unit_vectors(incident: Direction, reflected: Direction) -> (Vec3, Vec3, Vec3) {
    (
        spherical(incident),
        spherical(reflected),
        Vec3::new(0.0, 0.0, 1.0),
    )
}

pub fn spherical(d: Direction) -> Vec3 {
    let (t, p) = (d.theta_deg.to_radians(), d.phi_deg.to_radians());
    Vec3::new(t.sin() * p.cos(), t.sin() * p.sin(), t.cos())
}
