//! Sensor synthesis. Each stream draws from its own generator, seeded from
//! the scenario seed and the stream name.

use nalgebra::{Vector2, Vector3};

use super::scenario::{in_any, Interval, MarkerGrid, Scenario, SensorParams};
use super::{AcousticFix, DepthSample, MarkerObservation, SensorStreams, SimError};
use crate::eskf::ImuSample;
use crate::geometry::{Pose, Quaternion, Trajectory};
use crate::rng::Noise;

pub const IMU_STREAM: &str = "imu";
pub const MARKER_STREAM: &str = "markers";
pub const ACOUSTIC_STREAM: &str = "acoustic";
pub const DEPTH_STREAM: &str = "depth";
pub const VIO_STREAM: &str = "vio";

/// Sample times `k / rate` covering `[start, end]`.
fn grid(start: f64, end: f64, rate: f64) -> impl Iterator<Item = f64> {
    let first = (start * rate - 1e-9).ceil().max(0.0) as u64;
    let last = (end * rate + 1e-9).floor() as u64;
    (first..=last).map(move |k| k as f64 / rate)
}

fn pose_at(truth: &Trajectory, t: f64) -> Pose {
    // Grid times are clamped into the span, so lookups cannot fail.
    truth
        .sample_at(t.clamp(truth.start_time(), truth.end_time()))
        .expect("time clamped into span")
}

/// Specific force and angular rate a strapdown IMU would report while
/// following `truth`.
///
/// The sample stamped `t_k` describes the interval `(t_{k-1}, t_k]`: the
/// rate is the exact body-frame rotation over the interval divided by `dt`,
/// and the acceleration is the central second difference of position
/// around `t_{k-1}`, rotated into the body frame at `t_{k-1}`.
pub fn synth_imu(truth: &Trajectory, params: &SensorParams, gravity: &Vector3<f64>, seed: u64) -> Vec<ImuSample> {
    let rate = params.imu_rate;
    let dt = 1.0 / rate;
    let poses: Vec<Pose> = grid(truth.start_time(), truth.end_time(), rate)
        .map(|t| pose_at(truth, t))
        .collect();
    if poses.len() < 3 {
        return Vec::new();
    }
    let imu = &params.imu;
    let mut noise = Noise::for_stream(seed, IMU_STREAM);
    let accel_sigma = imu.accel_noise_density * rate.sqrt();
    let gyro_sigma = imu.gyro_noise_density * rate.sqrt();
    let walk_scale = dt.sqrt();
    let mut accel_bias = Vector3::from(imu.accel_bias);
    let mut gyro_bias = Vector3::from(imu.gyro_bias);

    let mut out = Vec::with_capacity(poses.len() - 1);
    for k in 1..poses.len() {
        let prev = &poses[k - 1];
        let cur = &poses[k];
        let center = if k == 1 { 1 } else { k - 1 };
        let accel_world =
            (poses[center + 1].position - poses[center].position * 2.0 + poses[center - 1].position) / (dt * dt);
        let rate_body = (prev.orientation.inverse() * cur.orientation).to_rotvec() / dt;
        let specific = prev.orientation.inverse_rotate(&(accel_world - gravity));

        accel_bias += noise.gaussian3(imu.accel_bias_walk * walk_scale);
        gyro_bias += noise.gaussian3(imu.gyro_bias_walk * walk_scale);
        let accel = specific + accel_bias + noise.gaussian3(accel_sigma);
        let gyro = rate_body + gyro_bias + noise.gaussian3(gyro_sigma);
        out.push(ImuSample::new(cur.t, accel, gyro));
    }
    out
}

/// Camera looks along body -z.
const CAMERA_AXIS: Vector3<f64> = Vector3::new(0.0, 0.0, -1.0);

/// Marker detections at the camera rate.
///
/// A marker is observed when it lies within the visibility range and the
/// camera's field of view. The reported pose is the marker pose in the
/// camera frame with Gaussian noise; with probability `p_outlier` its
/// position is displaced by a random vector up to `outlier_scale` long.
/// During blackout intervals observations are emitted undetected.
pub fn synth_markers(
    truth: &Trajectory,
    grid_spec: &MarkerGrid,
    params: &SensorParams,
    blackouts: &[Interval],
    seed: u64,
) -> Vec<MarkerObservation> {
    let m = &params.marker;
    let markers = grid_spec.marker_poses();
    let cos_fov = m.fov_half_angle_deg.to_radians().cos();
    let mut noise = Noise::for_stream(seed, MARKER_STREAM);
    let mut out = Vec::new();
    for t in grid(truth.start_time(), truth.end_time(), params.camera_rate) {
        let camera = pose_at(truth, t);
        let world_to_camera = camera.inverse();
        let axis = camera.orientation.rotate(&CAMERA_AXIS);
        let dark = in_any(blackouts, t);
        for (id, marker) in &markers {
            let offset = marker.position - camera.position;
            let distance = offset.norm();
            if distance > m.visibility_range || distance < 1e-9 || offset.dot(&axis) / distance < cos_fov {
                continue;
            }
            let exact = world_to_camera.compose(marker);
            let pos_noise = noise.gaussian3(m.sigma_pos);
            let rot_noise = noise.gaussian3(m.sigma_rot);
            let is_outlier = noise.chance(m.p_outlier);
            let direction = noise.unit_vector();
            let magnitude = noise.uniform() * m.outlier_scale;
            let mut position = exact.position + pos_noise;
            if is_outlier {
                position += direction * magnitude;
            }
            out.push(MarkerObservation {
                t,
                marker_id: *id,
                relative: Pose::new(t, position, exact.orientation * Quaternion::from_rotvec(&rot_noise)),
                detected: !dark,
                outlier: is_outlier,
            });
        }
    }
    out
}

/// USBL fixes at the acoustic rate.
///
/// Each fix is the true horizontal position plus isotropic Gaussian noise,
/// a uniform slant-range error of up to `range_resolution` along the
/// beacon-to-diver direction, and the bias of any multipath zone containing
/// the diver. Delivery is a Bernoulli draw whose loss probability rises
/// inside occlusion intervals.
pub fn synth_acoustic(truth: &Trajectory, scenario: &Scenario) -> Result<Vec<AcousticFix>, SimError> {
    let params = &scenario.sensors.acoustic;
    let zones = scenario
        .zones
        .iter()
        .map(|z| Ok((scenario.zone_center(z)?, z.radius, Vector2::from(z.bias))))
        .collect::<Result<Vec<_>, SimError>>()?;
    let beacon = scenario.beacon.position();
    let mut noise = Noise::for_stream(scenario.seed, ACOUSTIC_STREAM);
    let mut out = Vec::new();
    for t in grid(truth.start_time(), truth.end_time(), scenario.sensors.acoustic_rate) {
        let truth_xy = pose_at(truth, t).position.xy();
        let slant = pose_at(truth, t).position - beacon;
        let radial = if slant.norm() > 1e-9 {
            (slant / slant.norm()).xy()
        } else {
            Vector2::zeros()
        };
        let gaussian = Vector2::new(noise.gaussian(params.sigma_xy), noise.gaussian(params.sigma_xy));
        let range_err = (2.0 * noise.uniform() - 1.0) * params.range_resolution;
        let p_loss = if in_any(&scenario.occlusions, t) {
            params.p_loss_occluded
        } else {
            params.p_loss
        };
        let lost = noise.chance(p_loss);
        let mut fix = truth_xy + gaussian + radial * range_err;
        for (center, radius, bias) in &zones {
            if (truth_xy - center).norm() <= *radius {
                fix += bias;
            }
        }
        out.push(AcousticFix {
            t,
            x: fix.x,
            y: fix.y,
            delivered: !lost,
        });
    }
    Ok(out)
}

/// Pressure-sensor depth at the VIO rate.
pub fn synth_depth(truth: &Trajectory, params: &SensorParams, seed: u64) -> Vec<DepthSample> {
    let mut noise = Noise::for_stream(seed, DEPTH_STREAM);
    grid(truth.start_time(), truth.end_time(), params.vio_rate)
        .map(|t| DepthSample {
            t,
            depth: -pose_at(truth, t).position.z + noise.gaussian(params.depth.sigma_z),
        })
        .collect()
}

/// World-aligned visual-inertial odometry.
///
/// Position is the true displacement from the start scaled by
/// `1 + scale_error` plus a random walk whose horizontal RMS grows as
/// `drift_rate * sqrt(t)`; z uses the same per-axis walk. Orientation is the
/// truth perturbed by a rotation-vector random walk clamped to
/// `max_rot_error`.
pub fn synth_vio(truth: &Trajectory, params: &SensorParams, seed: u64) -> Vec<Pose> {
    let v = &params.vio;
    let dt = 1.0 / params.vio_rate;
    let per_axis = v.drift_rate * (dt / 2.0).sqrt();
    let rot_step = v.sigma_rot_walk * dt.sqrt();
    let origin = truth.first().position;
    let scale = 1.0 + v.scale_error;
    let mut noise = Noise::for_stream(seed, VIO_STREAM);
    let mut drift = Vector3::zeros();
    let mut rot_walk = Vector3::zeros();
    let mut out = Vec::new();
    for (k, t) in grid(truth.start_time(), truth.end_time(), params.vio_rate).enumerate() {
        let pose = pose_at(truth, t);
        if k > 0 {
            drift += noise.gaussian3(per_axis);
            rot_walk += noise.gaussian3(rot_step);
            let n = rot_walk.norm();
            if n > v.max_rot_error {
                rot_walk *= v.max_rot_error / n;
            }
        }
        let position = (pose.position - origin) * scale + drift;
        let orientation = Quaternion::from_rotvec(&rot_walk) * pose.orientation;
        out.push(Pose::new(t, position, orientation));
    }
    out
}

/// Synthesizes every stream the scenario calls for from one truth.
pub fn synthesize(scenario: &Scenario, truth: &Trajectory, gravity: &Vector3<f64>) -> Result<SensorStreams, SimError> {
    let s = &scenario.sensors;
    let markers = match &scenario.marker_grid {
        Some(g) => synth_markers(truth, g, s, &scenario.marker_blackouts, scenario.seed),
        None => Vec::new(),
    };
    Ok(SensorStreams {
        imu: synth_imu(truth, s, gravity, scenario.seed),
        markers,
        acoustic: synth_acoustic(truth, scenario)?,
        depth: synth_depth(truth, s, scenario.seed),
        vio: synth_vio(truth, s, scenario.seed),
    })
}
