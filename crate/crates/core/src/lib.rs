//! Underwater diver tracking and dive simulation.
//!
//! Two trackers are provided:
//!
//! * [`marker_tracker`]: optical square markers at known seabed locations
//!   give 6-DOF pose fixes that an error-state Kalman filter ([`eskf`])
//!   fuses with 60 Hz IMU data.
//! * [`hybrid_tracker`]: sparse, lossy acoustic (USBL) fixes re-anchor a
//!   60 Hz visual-inertial odometry stream; depth comes from a pressure
//!   sensor and orientation from the VIO alone.
//!
//! [`simworld`] builds ground-truth dives and synthesizes every sensor stream
//! from a seeded scenario, and [`harness`] evaluates, logs and plots runs.
//!
//! ```
//! use divetrack::geometry::{quat_error, Quaternion};
//! use nalgebra::Vector3;
//!
//! let q = Quaternion::from_axis_angle(&Vector3::z(), 1f64.to_radians());
//! assert!((quat_error(&q, &Quaternion::IDENTITY).to_degrees() - 1.0).abs() < 1e-9);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod csvfmt;
pub mod eskf;
pub mod geometry;
pub mod harness;
pub mod hybrid_tracker;
pub mod marker_tracker;
pub mod rng;
pub mod simworld;

mod error;

pub use error::Error;
pub use geometry::{Pose, Quaternion, Trajectory};

pub type Result<T, E = Error> = std::result::Result<T, E>;
