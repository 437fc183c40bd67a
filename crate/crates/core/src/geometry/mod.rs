//! Frames, quaternion algebra, poses and trajectories.
//!
//! The world frame is ENU with z up, so gravity is `(0, 0, -g)` and depth
//! below the surface is the negated z coordinate. Orientations are
//! body-to-world Hamilton quaternions stored scalar-first.

mod pose;
mod quaternion;
mod trajectory;

pub use pose::Pose;
pub use quaternion::{quat_error, quat_from_rotvec, right_jacobian, rotate_vector, skew, Quaternion};
pub(crate) use trajectory::parse_pose;
pub use trajectory::{pose_row, sample_at, Trajectory, TRAJECTORY_HEADER};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("quaternion components are zero or non-finite")]
    DegenerateQuaternion,
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("trajectory timestamps must strictly increase (sample {index})")]
    NonIncreasingTime { index: usize },
    #[error("trajectory sample {index} is not finite or has negative time")]
    NonFiniteSample { index: usize },
    #[error("time {t} outside trajectory span [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },
}
