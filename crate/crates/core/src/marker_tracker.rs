//! Marker-based tracking: marker detections become world-frame pose fixes
//! through the known marker layout, then either feed the error-state filter
//! together with the IMU (`fused`) or are used directly (`raw`).

use std::collections::BTreeMap;

use nalgebra::{Matrix3, Matrix6, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eskf::{EskfError, EskfState, FilterParams, PoseMeasurement};
use crate::geometry::{skew, GeometryError, Pose, Quaternion, Trajectory};
use crate::simworld::{MarkerGrid, MarkerNoise, MarkerObservation, SensorStreams};

/// Tolerance when matching camera frames to IMU timestamps.
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrackerError {
    #[error("unknown marker id {0}")]
    UnknownMarker(u32),
    #[error("observation of marker {0} is flagged as not detected")]
    NotDetected(u32),
    #[error("duplicate marker id {0} in map")]
    DuplicateMarker(u32),
    #[error("input streams are empty: {0}")]
    EmptyStreams(&'static str),
    #[error("{0} timestamps are not ordered")]
    Unordered(&'static str),
    #[error(transparent)]
    Filter(#[from] EskfError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// World pose of every marker, keyed by id.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkerMap {
    poses: BTreeMap<u32, Pose>,
}

impl MarkerMap {
    pub fn new(markers: impl IntoIterator<Item = (u32, Pose)>) -> Result<Self, TrackerError> {
        let mut poses = BTreeMap::new();
        for (id, pose) in markers {
            if poses.insert(id, pose).is_some() {
                return Err(TrackerError::DuplicateMarker(id));
            }
        }
        Ok(Self { poses })
    }

    pub fn from_grid(grid: &MarkerGrid) -> Self {
        Self::new(grid.marker_poses()).expect("grid ids are unique")
    }

    pub fn get(&self, id: u32) -> Option<&Pose> {
        self.poses.get(&id)
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }
}

/// Detection noise assumed by the tracker.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementModel {
    pub sigma_pos: f64,
    pub sigma_rot: f64,
    pub visibility_range: f64,
    /// Floors that keep the measurement covariance invertible.
    pub min_sigma_pos: f64,
    pub min_sigma_rot: f64,
}

impl MeasurementModel {
    pub fn from_noise(noise: &MarkerNoise) -> Self {
        Self {
            sigma_pos: noise.sigma_pos,
            sigma_rot: noise.sigma_rot,
            visibility_range: noise.visibility_range,
            min_sigma_pos: 1e-4,
            min_sigma_rot: 1e-4,
        }
    }
}

/// Converts one detection into a world-frame pose fix of the camera.
///
/// The camera pose is the marker's world pose composed with the inverse of
/// the observed camera-from-marker pose. Detection noise, inflated by
/// `1 + d / visibility_range`, is propagated through that inversion so
/// the lever-arm effect of rotation noise shows up in the position block.
pub fn observation_to_pose(
    obs: &MarkerObservation,
    map: &MarkerMap,
    model: &MeasurementModel,
) -> Result<PoseMeasurement, TrackerError> {
    if !obs.detected {
        return Err(TrackerError::NotDetected(obs.marker_id));
    }
    let marker = map
        .get(obs.marker_id)
        .ok_or(TrackerError::UnknownMarker(obs.marker_id))?;
    let camera = marker.compose(&obs.relative.inverse());

    let distance = obs.relative.position.norm();
    let inflation = 1.0 + distance / model.visibility_range;
    let sigma_p = (model.sigma_pos * inflation).max(model.min_sigma_pos);
    let sigma_r = (model.sigma_rot * inflation).max(model.min_sigma_rot);

    let r_world_camera = camera.orientation.to_rotation_matrix();
    let r_camera_marker = obs.relative.orientation.to_rotation_matrix();
    let mut jac = Matrix6::zeros();
    jac.fixed_view_mut::<3, 3>(0, 0).copy_from(&(-r_world_camera));
    jac.fixed_view_mut::<3, 3>(0, 3)
        .copy_from(&(-r_world_camera * skew(&obs.relative.position) * r_camera_marker));
    jac.fixed_view_mut::<3, 3>(3, 3).copy_from(&(-r_camera_marker));
    let mut noise = Matrix6::zeros();
    noise
        .fixed_view_mut::<3, 3>(0, 0)
        .copy_from(&(Matrix3::identity() * sigma_p * sigma_p));
    noise
        .fixed_view_mut::<3, 3>(3, 3)
        .copy_from(&(Matrix3::identity() * sigma_r * sigma_r));
    let cov = jac * noise * jac.transpose();

    Ok(PoseMeasurement {
        t: obs.t,
        position: camera.position,
        orientation: camera.orientation,
        covariance: (cov + cov.transpose()) * 0.5,
    })
}

/// Arithmetic mean of positions and sign-aligned normalized quaternion mean.
pub fn mean_pose(t: f64, poses: &[Pose]) -> Option<Pose> {
    let first = poses.first()?;
    let reference = first.orientation.wxyz();
    let mut q = [0.0; 4];
    let mut p = Vector3::zeros();
    for pose in poses {
        let c = pose.orientation.wxyz();
        let sign = if (0..4).map(|i| c[i] * reference[i]).sum::<f64>() < 0.0 {
            -1.0
        } else {
            1.0
        };
        for i in 0..4 {
            q[i] += sign * c[i];
        }
        p += pose.position;
    }
    let n = poses.len() as f64;
    let orientation = Quaternion::from_wxyz(q[0], q[1], q[2], q[3]).ok()?;
    Some(Pose::new(t, p / n, orientation))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Raw,
    Fused,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "raw" => Ok(Mode::Raw),
            "fused" => Ok(Mode::Fused),
            other => Err(format!("unknown mode `{other}` (expected raw or fused)")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrackerStats {
    pub frames: usize,
    pub frames_without_markers: usize,
    pub updates_accepted: usize,
    pub updates_rejected: usize,
    pub reinitializations: usize,
}

#[derive(Clone, Debug)]
pub struct MarkerTrack {
    pub trajectory: Trajectory,
    pub stats: TrackerStats,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackerConfig {
    pub model: MeasurementModel,
    /// Re-seed the filter from the markers after this many consecutive
    /// frames whose every measurement was gated out.
    pub reinit_after_frames: usize,
}

impl TrackerConfig {
    pub fn from_noise(noise: &MarkerNoise) -> Self {
        Self {
            model: MeasurementModel::from_noise(noise),
            reinit_after_frames: 15,
        }
    }
}

/// Detected observations grouped by camera frame, each frame in id order.
pub struct Frame<'a> {
    pub t: f64,
    pub observations: Vec<&'a MarkerObservation>,
}

pub fn frames(markers: &[MarkerObservation]) -> Result<Vec<Frame<'_>>, TrackerError> {
    let mut out: Vec<Frame<'_>> = Vec::new();
    for obs in markers {
        match out.last_mut() {
            Some(f) if f.t == obs.t => f.observations.push(obs),
            Some(f) if obs.t < f.t => return Err(TrackerError::Unordered("marker")),
            _ => out.push(Frame {
                t: obs.t,
                observations: vec![obs],
            }),
        }
    }
    for f in &mut out {
        f.observations.sort_by_key(|o| o.marker_id);
    }
    Ok(out)
}

fn frame_measurements(
    frame: &Frame<'_>,
    map: &MarkerMap,
    model: &MeasurementModel,
) -> Result<Vec<PoseMeasurement>, TrackerError> {
    frame
        .observations
        .iter()
        .filter(|o| o.detected)
        .map(|o| observation_to_pose(o, map, model))
        .collect()
}

/// Averages a frame's fixes into one measurement; its covariance is the
/// mean covariance divided by the number of fixes.
fn combined_measurement(t: f64, fixes: &[PoseMeasurement]) -> Option<PoseMeasurement> {
    let poses: Vec<Pose> = fixes.iter().map(|z| z.pose()).collect();
    let mean = mean_pose(t, &poses)?;
    let n = fixes.len() as f64;
    let cov = fixes.iter().fold(Matrix6::zeros(), |acc, z| acc + z.covariance) / (n * n);
    Some(PoseMeasurement {
        t,
        position: mean.position,
        orientation: mean.orientation,
        covariance: cov,
    })
}

/// Streaming ESKF front end: feed IMU samples and camera frames in time
/// order, read the state after each IMU sample.
pub struct FusedTracker {
    params: FilterParams,
    config: TrackerConfig,
    state: Option<EskfState>,
    rejected_streak: usize,
    pub stats: TrackerStats,
}

impl FusedTracker {
    pub fn new(params: FilterParams, config: TrackerConfig) -> Result<Self, TrackerError> {
        params.validate()?;
        Ok(Self {
            params,
            config,
            state: None,
            rejected_streak: 0,
            stats: TrackerStats::default(),
        })
    }

    pub fn state(&self) -> Option<&EskfState> {
        self.state.as_ref()
    }

    pub fn params(&self) -> &FilterParams {
        &self.params
    }

    pub fn propagate(&mut self, imu: &crate::eskf::ImuSample) -> Result<(), TrackerError> {
        if let Some(state) = &mut self.state {
            if imu.t > state.t {
                state.predict(imu, &self.params)?;
            }
        }
        Ok(())
    }

    /// Applies one frame's fixes as sequential updates in marker-id order.
    pub fn correct(&mut self, t: f64, fixes: &[PoseMeasurement]) -> Result<(), TrackerError> {
        self.stats.frames += 1;
        if fixes.is_empty() {
            self.stats.frames_without_markers += 1;
            return Ok(());
        }
        let Some(state) = &mut self.state else {
            if let Some(z) = combined_measurement(t, fixes) {
                self.state = Some(EskfState::from_measurement(&z, &self.params));
            }
            return Ok(());
        };
        let mut accepted = 0;
        for z in fixes {
            match state.update_pose(z, &self.params) {
                Ok(_) => accepted += 1,
                Err(EskfError::Rejected { .. }) => self.stats.updates_rejected += 1,
                Err(e) => return Err(e.into()),
            }
        }
        self.stats.updates_accepted += accepted;
        if accepted == 0 {
            self.rejected_streak += 1;
            if self.rejected_streak >= self.config.reinit_after_frames {
                if let Some(z) = combined_measurement(t, fixes) {
                    self.state = Some(EskfState::from_measurement(&z, &self.params));
                    self.stats.reinitializations += 1;
                }
                self.rejected_streak = 0;
            }
        } else {
            self.rejected_streak = 0;
        }
        Ok(())
    }
}

fn check_imu_order(streams: &SensorStreams) -> Result<(), TrackerError> {
    if streams.imu.windows(2).any(|w| w[1].t <= w[0].t) {
        return Err(TrackerError::Unordered("imu"));
    }
    Ok(())
}

/// Runs the marker pipeline over a recorded session.
///
/// `Raw` emits one pose per camera frame (holding the last pose through
/// frames without detections); `Fused` emits the filter state after every
/// IMU sample once the filter has been seeded by a first detection.
pub fn run_marker_tracking(
    streams: &SensorStreams,
    map: &MarkerMap,
    params: &FilterParams,
    config: &TrackerConfig,
    mode: Mode,
) -> Result<MarkerTrack, TrackerError> {
    if streams.markers.is_empty() {
        return Err(TrackerError::EmptyStreams("no marker observations"));
    }
    let frames = frames(&streams.markers)?;
    match mode {
        Mode::Raw => run_raw(&frames, map, config),
        Mode::Fused => {
            if streams.imu.is_empty() {
                return Err(TrackerError::EmptyStreams("no imu samples"));
            }
            check_imu_order(streams)?;
            run_fused(streams, &frames, map, params, config)
        }
    }
}

fn run_raw(frames: &[Frame<'_>], map: &MarkerMap, config: &TrackerConfig) -> Result<MarkerTrack, TrackerError> {
    let mut stats = TrackerStats::default();
    let mut out: Vec<Pose> = Vec::with_capacity(frames.len());
    for frame in frames {
        stats.frames += 1;
        let fixes = frame_measurements(frame, map, &config.model)?;
        let poses: Vec<Pose> = fixes.iter().map(|z| z.pose()).collect();
        match mean_pose(frame.t, &poses) {
            Some(p) => {
                stats.updates_accepted += fixes.len();
                out.push(p);
            }
            None => {
                stats.frames_without_markers += 1;
                if let Some(last) = out.last().copied() {
                    out.push(last.with_time(frame.t));
                }
            }
        }
    }
    if out.is_empty() {
        return Err(TrackerError::EmptyStreams("no marker was ever detected"));
    }
    Ok(MarkerTrack {
        trajectory: Trajectory::new(out)?,
        stats,
    })
}

fn run_fused(
    streams: &SensorStreams,
    frames: &[Frame<'_>],
    map: &MarkerMap,
    params: &FilterParams,
    config: &TrackerConfig,
) -> Result<MarkerTrack, TrackerError> {
    let mut tracker = FusedTracker::new(params.clone(), *config)?;
    let mut out = Vec::with_capacity(streams.imu.len());
    let mut next_frame = 0;
    for imu in &streams.imu {
        tracker.propagate(imu)?;
        while next_frame < frames.len() && frames[next_frame].t <= imu.t + TIME_EPS {
            let frame = &frames[next_frame];
            next_frame += 1;
            let fixes = frame_measurements(frame, map, &config.model)?;
            // A frame older than the filter cannot be applied.
            if tracker
                .state()
                .is_some_and(|s| frame.t < s.t - params.max_measurement_lag)
            {
                continue;
            }
            tracker.correct(frame.t, &fixes)?;
        }
        if let Some(state) = tracker.state() {
            out.push(state.pose().with_time(imu.t));
        }
    }
    if out.is_empty() {
        return Err(TrackerError::EmptyStreams("no marker was ever detected"));
    }
    Ok(MarkerTrack {
        trajectory: Trajectory::new(out)?,
        stats: tracker.stats,
    })
}

/// Position offset of an object at `distance` seen with an orientation
/// error of `angle` radians.
pub fn orientation_error_displacement(distance: f64, angle: f64) -> f64 {
    distance * angle.tan()
}
