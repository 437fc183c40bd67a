use nalgebra::{Matrix3, Matrix6, SMatrix, Vector3, Vector6};

use super::{
    idx, Covariance, ErrorVector, EskfError, EskfState, FilterParams, ImuSample, NominalState, PoseMeasurement,
};
use crate::geometry::{right_jacobian, skew, Quaternion};

type Gain = SMatrix<f64, 15, 6>;

/// Outcome of an accepted pose update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpdateReport {
    pub distance_sq: f64,
    pub correction: ErrorVector,
}

/// One explicit Euler step of the nominal kinematics.
pub fn propagate_nominal(x: &NominalState, imu: &ImuSample, dt: f64, gravity: &Vector3<f64>) -> NominalState {
    let accel_world = x.orientation.rotate(&(imu.accel - x.accel_bias)) + gravity;
    let rate = imu.gyro - x.gyro_bias;
    NominalState {
        position: x.position + x.velocity * dt + accel_world * (0.5 * dt * dt),
        velocity: x.velocity + accel_world * dt,
        orientation: x.orientation * Quaternion::from_rotvec(&(rate * dt)),
        accel_bias: x.accel_bias,
        gyro_bias: x.gyro_bias,
    }
}

/// Error-state transition matrix of [`propagate_nominal`].
///
/// Linearized exactly for the discrete step, so the position row keeps the
/// half-dt^2 terms and the gyro-bias column carries the right Jacobian of
/// the rotation increment.
pub fn transition_matrix(x: &NominalState, imu: &ImuSample, dt: f64) -> Covariance {
    let r = x.orientation.to_rotation_matrix();
    let accel = imu.accel - x.accel_bias;
    let increment = (imu.gyro - x.gyro_bias) * dt;
    let i3 = Matrix3::identity();

    let dv_dtheta = -r * skew(&accel);
    let dv_dba = -r;

    let mut f = Covariance::identity();
    f.fixed_view_mut::<3, 3>(idx::POS, idx::VEL).copy_from(&(i3 * dt));
    f.fixed_view_mut::<3, 3>(idx::POS, idx::ROT)
        .copy_from(&(dv_dtheta * (0.5 * dt * dt)));
    f.fixed_view_mut::<3, 3>(idx::POS, idx::ACC_BIAS)
        .copy_from(&(dv_dba * (0.5 * dt * dt)));
    f.fixed_view_mut::<3, 3>(idx::VEL, idx::ROT)
        .copy_from(&(dv_dtheta * dt));
    f.fixed_view_mut::<3, 3>(idx::VEL, idx::ACC_BIAS)
        .copy_from(&(dv_dba * dt));
    f.fixed_view_mut::<3, 3>(idx::ROT, idx::ROT)
        .copy_from(&Quaternion::from_rotvec(&increment).to_rotation_matrix().transpose());
    f.fixed_view_mut::<3, 3>(idx::ROT, idx::GYRO_BIAS)
        .copy_from(&(-right_jacobian(&increment) * dt));
    f
}

fn process_noise(params: &FilterParams, dt: f64) -> Covariance {
    let mut q = Covariance::zeros();
    for (o, density) in [
        (idx::VEL, params.accel_noise),
        (idx::ROT, params.gyro_noise),
        (idx::ACC_BIAS, params.accel_bias_walk),
        (idx::GYRO_BIAS, params.gyro_bias_walk),
    ] {
        let var = density * density * dt;
        for i in 0..3 {
            q[(o + i, o + i)] = var;
        }
    }
    q
}

fn symmetrize(p: &mut Covariance) {
    let sym = (*p + p.transpose()) * 0.5;
    *p = sym;
}

impl EskfState {
    /// Propagates the filter to `imu.t` with one IMU sample.
    ///
    /// The sample is taken to describe the motion over `(self.t, imu.t]`.
    pub fn predict(&mut self, imu: &ImuSample, params: &FilterParams) -> Result<(), EskfError> {
        let dt = imu.t - self.t;
        if !(dt > 0.0) {
            return Err(EskfError::NonIncreasingTime {
                t: imu.t,
                state_t: self.t,
            });
        }
        if dt > params.max_dt {
            return Err(EskfError::GapTooLarge {
                dt,
                max_dt: params.max_dt,
            });
        }
        let f = transition_matrix(&self.nominal, imu, dt);
        self.nominal = propagate_nominal(&self.nominal, imu, dt, &params.gravity);
        self.covariance = f * self.covariance * f.transpose() + process_noise(params, dt);
        symmetrize(&mut self.covariance);
        self.t = imu.t;
        Ok(())
    }

    /// Corrects the filter with a world-frame pose fix.
    ///
    /// A measurement whose squared Mahalanobis distance exceeds the gate is
    /// rejected with [`EskfError::Rejected`] and leaves the state untouched.
    pub fn update_pose(&mut self, z: &PoseMeasurement, params: &FilterParams) -> Result<UpdateReport, EskfError> {
        if (z.t - self.t).abs() > params.max_measurement_lag {
            return Err(EskfError::StaleMeasurement {
                t: z.t,
                state_t: self.t,
                max_lag: params.max_measurement_lag,
            });
        }
        check_psd(&z.covariance)?;

        let x = &self.nominal;
        let mut innovation = Vector6::zeros();
        innovation.fixed_rows_mut::<3>(0).copy_from(&(z.position - x.position));
        innovation
            .fixed_rows_mut::<3>(3)
            .copy_from(&(x.orientation.inverse() * z.orientation).to_rotvec());

        let p = &self.covariance;
        // P H^T: the position and rotation columns of P.
        let mut pht = Gain::zeros();
        pht.fixed_columns_mut::<3>(0).copy_from(&p.fixed_columns::<3>(idx::POS));
        pht.fixed_columns_mut::<3>(3).copy_from(&p.fixed_columns::<3>(idx::ROT));
        let mut s = Matrix6::zeros();
        s.fixed_rows_mut::<3>(0).copy_from(&pht.fixed_rows::<3>(idx::POS));
        s.fixed_rows_mut::<3>(3).copy_from(&pht.fixed_rows::<3>(idx::ROT));
        s += z.covariance;
        let s = (s + s.transpose()) * 0.5;

        let chol = s.cholesky().ok_or(EskfError::SingularInnovation)?;
        let s_inv_y = chol.solve(&innovation);
        let distance_sq = innovation.dot(&s_inv_y);
        if let Some(gate) = params.gate {
            if distance_sq > gate {
                return Err(EskfError::Rejected { distance_sq, gate });
            }
        }

        // K = P H^T S^-1, computed as (S^-1 H P)^T since S is symmetric.
        let gain: Gain = chol.solve(&pht.transpose()).transpose();
        let correction = gain * innovation;

        let mut i_kh = Covariance::identity();
        {
            let mut kh_pos = i_kh.fixed_columns_mut::<3>(idx::POS);
            kh_pos -= gain.fixed_columns::<3>(0);
        }
        {
            let mut kh_rot = i_kh.fixed_columns_mut::<3>(idx::ROT);
            kh_rot -= gain.fixed_columns::<3>(3);
        }
        let mut p_new = i_kh * p * i_kh.transpose() + gain * z.covariance * gain.transpose();
        symmetrize(&mut p_new);

        self.nominal = self.nominal.inject(&correction);
        self.covariance = p_new;
        Ok(UpdateReport {
            distance_sq,
            correction,
        })
    }
}

fn check_psd(m: &Matrix6<f64>) -> Result<(), EskfError> {
    if !m.iter().all(|v| v.is_finite()) {
        return Err(EskfError::CovarianceNotPsd);
    }
    let scale = m.amax().max(1e-300);
    if (m - m.transpose()).amax() > 1e-9 * scale {
        return Err(EskfError::CovarianceNotPsd);
    }
    if m.symmetric_eigenvalues().min() < -1e-12 * scale {
        return Err(EskfError::CovarianceNotPsd);
    }
    Ok(())
}

/// Value-returning form of [`EskfState::predict`].
pub fn predict(state: &EskfState, imu: &ImuSample, params: &FilterParams) -> Result<EskfState, EskfError> {
    let mut next = state.clone();
    next.predict(imu, params)?;
    Ok(next)
}

/// Value-returning form of [`EskfState::update_pose`].
pub fn update_pose(
    state: &EskfState,
    z: &PoseMeasurement,
    params: &FilterParams,
) -> Result<(EskfState, UpdateReport), EskfError> {
    let mut next = state.clone();
    let report = next.update_pose(z, params)?;
    Ok((next, report))
}
