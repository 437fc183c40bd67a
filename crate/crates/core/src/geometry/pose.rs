use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::Quaternion;

/// Timestamped 6-DOF pose in the world ENU frame (x east, y north, z up).
///
/// Depth below the sea surface is `-position.z`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub t: f64,
    pub position: Vector3<f64>,
    pub orientation: Quaternion,
}

impl Pose {
    pub fn new(t: f64, position: Vector3<f64>, orientation: Quaternion) -> Self {
        Self {
            t,
            position,
            orientation,
        }
    }

    pub fn identity(t: f64) -> Self {
        Self::new(t, Vector3::zeros(), Quaternion::IDENTITY)
    }

    /// Rigid composition `self * other`; keeps `self.t`.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose::new(
            self.t,
            self.position + self.orientation.rotate(&other.position),
            self.orientation * other.orientation,
        )
    }

    pub fn inverse(&self) -> Pose {
        let q_inv = self.orientation.inverse();
        Pose::new(self.t, -q_inv.rotate(&self.position), q_inv)
    }

    /// Maps a point expressed in this pose's frame into the parent frame.
    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.position + self.orientation.rotate(p)
    }

    pub fn depth(&self) -> f64 {
        -self.position.z
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }
}
