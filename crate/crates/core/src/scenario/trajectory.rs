use serde::{Deserialize, Serialize};

use super::ScenarioError;
use crate::link::Vec3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub label: String,
    pub position: [f64; 3],
}

impl Waypoint {
    pub fn new(label: impl Into<String>, position: Vec3) -> Self {
        Waypoint {
            label: label.into(),
            position: [position.x, position.y, position.z],
        }
    }

    pub fn vec(&self) -> Vec3 {
        Vec3::from(self.position)
    }
}

/// Constant-speed piecewise-linear path through labeled waypoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    waypoints: Vec<Waypoint>,
    speed: f64,
    looped: bool,
    /// Cumulative arc length at each waypoint (and at the closing point when looped).
    arc: Vec<f64>,
}

impl Trajectory {
    pub fn new(waypoints: Vec<Waypoint>, speed: f64, looped: bool) -> Result<Self, ScenarioError> {
        if waypoints.len() < 2 {
            return Err(ScenarioError::Config("trajectory needs at least 2 waypoints".into()));
        }
        if !(speed > 0.0 && speed.is_finite()) {
            return Err(ScenarioError::Config("trajectory speed must be > 0".into()));
        }
        let mut arc = vec![0.0];
        let mut points: Vec<Vec3> = waypoints.iter().map(Waypoint::vec).collect();
        if looped {
            points.push(points[0]);
        }
        for (i, w) in points.windows(2).enumerate() {
            let len = (w[1] - w[0]).norm();
            if !(len > 0.0) {
                return Err(ScenarioError::Config(format!(
                    "waypoints {} and {} coincide",
                    i,
                    (i + 1) % waypoints.len()
                )));
            }
            arc.push(arc[i] + len);
        }
        Ok(Trajectory {
            waypoints,
            speed,
            looped,
            arc,
        })
    }

    pub fn waypoints(&self) -> &[Waypoint] {
        &self.waypoints
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn is_looped(&self) -> bool {
        self.looped
    }

    pub fn length(&self) -> f64 {
        *self.arc.last().unwrap()
    }

    /// Time to traverse the path once.
    pub fn duration_s(&self) -> f64 {
        self.length() / self.speed
    }

    fn point(&self, i: usize) -> Vec3 {
        self.waypoints[i % self.waypoints.len()].vec()
    }

    /// Position at time `t` seconds. Negative times clamp to the start; after
    /// the last waypoint the UE holds position, or wraps when looped.
    pub fn position_at(&self, t: f64) -> Vec3 {
        let total = self.length();
        let mut s = (t.max(0.0)) * self.speed;
        if self.looped {
            s = s.rem_euclid(total);
        } else if s >= total {
            return self.point(self.waypoints.len() - 1);
        }
        let seg = match self.arc.partition_point(|&a| a <= s) {
            0 => 0,
            k => k - 1,
        }
        .min(self.arc.len() - 2);
        let frac = (s - self.arc[seg]) / (self.arc[seg + 1] - self.arc[seg]);
        let (a, b) = (self.point(seg), self.point(seg + 1));
        a + (b - a) * frac
    }
}
