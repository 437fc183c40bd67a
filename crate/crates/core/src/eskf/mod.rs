//! Error-state extended Kalman filter over position, velocity, orientation,
//! accelerometer bias and gyroscope bias.
//!
//! The nominal state is integrated from IMU samples; a 15-dimensional error
//! state `[dp, dv, dtheta, dba, dbg]` carries the covariance. Orientation
//! errors are local (body-frame) perturbations, `q_true = q * Exp(dtheta)`.
//! Pose measurements observe `dp` and `dtheta` directly. After each update
//! the error estimate is injected into the nominal state and reset to zero,
//! with the reset Jacobian taken as identity.

mod calibration;
mod filter;

pub use calibration::{estimate_static_noise, StaticCalibration, MIN_CALIBRATION_SECONDS};
pub use filter::{predict, propagate_nominal, transition_matrix, update_pose, UpdateReport};

use nalgebra::{Matrix6, SMatrix, SVector, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Pose, Quaternion};

pub const STATE_DIM: usize = 15;

pub type Covariance = SMatrix<f64, STATE_DIM, STATE_DIM>;
pub type ErrorVector = SVector<f64, STATE_DIM>;

/// Offsets of each block inside the error state.
pub mod idx {
    pub const POS: usize = 0;
    pub const VEL: usize = 3;
    pub const ROT: usize = 6;
    pub const ACC_BIAS: usize = 9;
    pub const GYRO_BIAS: usize = 12;
}

/// 99.9% quantile of the chi-square distribution with 6 degrees of freedom.
pub const CHI2_6DOF_999: f64 = 22.457_744_484_825_3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EskfError {
    #[error("IMU timestamp {t} does not advance past filter time {state_t}")]
    NonIncreasingTime { t: f64, state_t: f64 },
    #[error("IMU gap of {dt} s exceeds the {max_dt} s cap (dropped samples?)")]
    GapTooLarge { dt: f64, max_dt: f64 },
    #[error("measurement at {t} is more than {max_lag} s from filter time {state_t}")]
    StaleMeasurement { t: f64, state_t: f64, max_lag: f64 },
    #[error("measurement covariance is not symmetric positive semidefinite")]
    CovarianceNotPsd,
    #[error("innovation covariance is singular")]
    SingularInnovation,
    #[error("measurement rejected: squared Mahalanobis distance {distance_sq:.3} above gate {gate:.3}")]
    Rejected { distance_sq: f64, gate: f64 },
    #[error("invalid filter parameters: {0}")]
    InvalidParams(String),
    #[error("static log too short: {duration:.2} s, need at least {required} s")]
    LogTooShort { duration: f64, required: f64 },
    #[error("static log sampling is irregular: interval {interval} s vs mean {mean} s")]
    IrregularSampling { interval: f64, mean: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImuSample {
    pub t: f64,
    /// Specific force in the body frame, m/s^2.
    pub accel: Vector3<f64>,
    /// Angular rate in the body frame, rad/s.
    pub gyro: Vector3<f64>,
}

impl ImuSample {
    pub fn new(t: f64, accel: Vector3<f64>, gyro: Vector3<f64>) -> Self {
        Self { t, accel, gyro }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.accel.iter().all(|v| v.is_finite()) && self.gyro.iter().all(|v| v.is_finite())
    }
}

/// World-frame pose fix with a 6x6 covariance ordered `[position, rotation]`.
///
/// The rotation block is the covariance of the local rotation-vector error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoseMeasurement {
    pub t: f64,
    pub position: Vector3<f64>,
    pub orientation: Quaternion,
    pub covariance: Matrix6<f64>,
}

impl PoseMeasurement {
    pub fn pose(&self) -> Pose {
        Pose::new(self.t, self.position, self.orientation)
    }
}

/// Initial one-sigma uncertainty of each error-state block.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialSigma {
    pub position: f64,
    pub velocity: f64,
    pub orientation: f64,
    pub accel_bias: f64,
    pub gyro_bias: f64,
}

impl Default for InitialSigma {
    fn default() -> Self {
        Self {
            position: 0.1,
            velocity: 0.5,
            orientation: 0.05,
            accel_bias: 0.05,
            gyro_bias: 0.005,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    pub gravity: Vector3<f64>,
    /// Accelerometer white-noise density, m/s^2/sqrt(Hz).
    pub accel_noise: f64,
    /// Gyroscope white-noise density, rad/s/sqrt(Hz).
    pub gyro_noise: f64,
    /// Accelerometer bias random walk, m/s^2*sqrt(Hz).
    pub accel_bias_walk: f64,
    /// Gyroscope bias random walk, rad/s*sqrt(Hz).
    pub gyro_bias_walk: f64,
    pub initial_sigma: InitialSigma,
    pub initial_accel_bias: Vector3<f64>,
    pub initial_gyro_bias: Vector3<f64>,
    /// Squared Mahalanobis gate for pose updates; `None` disables gating.
    pub gate: Option<f64>,
    /// Largest accepted IMU interval.
    pub max_dt: f64,
    /// Largest accepted |measurement time - filter time|.
    pub max_measurement_lag: f64,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            gravity: Vector3::new(0.0, 0.0, -9.81),
            accel_noise: 0.01,
            gyro_noise: 0.001,
            accel_bias_walk: 1e-4,
            gyro_bias_walk: 1e-5,
            initial_sigma: InitialSigma::default(),
            initial_accel_bias: Vector3::zeros(),
            initial_gyro_bias: Vector3::zeros(),
            gate: Some(CHI2_6DOF_999),
            max_dt: 0.1,
            max_measurement_lag: 1.0 / 60.0 + 1e-9,
        }
    }
}

impl FilterParams {
    pub fn validate(&self) -> Result<(), EskfError> {
        let densities = [
            ("accel_noise", self.accel_noise),
            ("gyro_noise", self.gyro_noise),
            ("accel_bias_walk", self.accel_bias_walk),
            ("gyro_bias_walk", self.gyro_bias_walk),
        ];
        for (name, v) in densities {
            if !(v > 0.0 && v.is_finite()) {
                return Err(EskfError::InvalidParams(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.max_dt > 0.0) {
            return Err(EskfError::InvalidParams("max_dt must be > 0".into()));
        }
        Ok(())
    }

    pub fn initial_covariance(&self) -> Covariance {
        let s = &self.initial_sigma;
        let mut diag = ErrorVector::zeros();
        for (offset, sigma) in [
            (idx::POS, s.position),
            (idx::VEL, s.velocity),
            (idx::ROT, s.orientation),
            (idx::ACC_BIAS, s.accel_bias),
            (idx::GYRO_BIAS, s.gyro_bias),
        ] {
            for i in 0..3 {
                diag[offset + i] = sigma * sigma;
            }
        }
        Covariance::from_diagonal(&diag)
    }
}

/// Best-guess (nominal) kinematic state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NominalState {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub orientation: Quaternion,
    pub accel_bias: Vector3<f64>,
    pub gyro_bias: Vector3<f64>,
}

impl NominalState {
    pub fn at_rest(position: Vector3<f64>, orientation: Quaternion) -> Self {
        Self {
            position,
            velocity: Vector3::zeros(),
            orientation,
            accel_bias: Vector3::zeros(),
            gyro_bias: Vector3::zeros(),
        }
    }

    /// Applies an error-state correction (`x (+) dx`).
    pub fn inject(&self, dx: &ErrorVector) -> NominalState {
        let block = |o: usize| Vector3::new(dx[o], dx[o + 1], dx[o + 2]);
        NominalState {
            position: self.position + block(idx::POS),
            velocity: self.velocity + block(idx::VEL),
            orientation: self.orientation * Quaternion::from_rotvec(&block(idx::ROT)),
            accel_bias: self.accel_bias + block(idx::ACC_BIAS),
            gyro_bias: self.gyro_bias + block(idx::GYRO_BIAS),
        }
    }

    /// Error-state difference `self (-) reference`.
    pub fn difference(&self, reference: &NominalState) -> ErrorVector {
        let mut dx = ErrorVector::zeros();
        let rot = (reference.orientation.inverse() * self.orientation).to_rotvec();
        for (o, v) in [
            (idx::POS, self.position - reference.position),
            (idx::VEL, self.velocity - reference.velocity),
            (idx::ROT, rot),
            (idx::ACC_BIAS, self.accel_bias - reference.accel_bias),
            (idx::GYRO_BIAS, self.gyro_bias - reference.gyro_bias),
        ] {
            dx.fixed_rows_mut::<3>(o).copy_from(&v);
        }
        dx
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EskfState {
    pub nominal: NominalState,
    pub covariance: Covariance,
    pub t: f64,
}

impl EskfState {
    pub fn new(nominal: NominalState, covariance: Covariance, t: f64) -> Self {
        Self { nominal, covariance, t }
    }

    /// Starts a filter at a pose fix, at rest, with the configured initial
    /// biases and covariance. The position and orientation blocks take the
    /// measurement covariance when it is tighter than the configured prior.
    pub fn from_measurement(z: &PoseMeasurement, params: &FilterParams) -> Self {
        let mut nominal = NominalState::at_rest(z.position, z.orientation);
        nominal.accel_bias = params.initial_accel_bias;
        nominal.gyro_bias = params.initial_gyro_bias;
        let mut p = params.initial_covariance();
        for (offset, zo) in [(idx::POS, 0), (idx::ROT, 3)] {
            let block = z.covariance.fixed_view::<3, 3>(zo, zo);
            if block.trace() > 0.0 && block.trace() < p.fixed_view::<3, 3>(offset, offset).trace() {
                p.fixed_view_mut::<3, 3>(offset, offset).copy_from(&block);
            }
        }
        Self::new(nominal, p, z.t)
    }

    pub fn pose(&self) -> Pose {
        Pose::new(self.t, self.nominal.position, self.nominal.orientation)
    }

    /// Largest absolute asymmetry `max |P - P^T|`.
    pub fn asymmetry(&self) -> f64 {
        (self.covariance - self.covariance.transpose()).amax()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let sym = (self.covariance + self.covariance.transpose()) * 0.5;
        sym.symmetric_eigenvalues().min()
    }
}
