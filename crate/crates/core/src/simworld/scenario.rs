use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use super::quad::{solve_quadrilateral, QuadLengths, Vertices};
use super::SimError;
use crate::geometry::{Pose, Quaternion};

/// A complete dive description: course, world features, sensors and seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub course: Course,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marker_grid: Option<MarkerGrid>,
    #[serde(default)]
    pub beacon: Beacon,
    #[serde(default)]
    pub zones: Vec<MultipathZone>,
    /// Intervals during which the diver shadows the acoustic link.
    #[serde(default)]
    pub occlusions: Vec<Interval>,
    /// Intervals during which no marker is detected.
    #[serde(default)]
    pub marker_blackouts: Vec<Interval>,
    #[serde(default)]
    pub sensors: SensorParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Course {
    /// Roped quadrilateral swum counterclockwise A -> B -> C -> D -> A.
    Quadrilateral(QuadrilateralCourse),
    /// Smooth hovering pattern above a marker grid.
    Survey(SurveyCourse),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadrilateralCourse {
    pub lengths: QuadLengths,
    /// Compass bearing of the A -> C diagonal, degrees clockwise from north.
    pub heading_offset_deg: f64,
    /// Depth below the surface, meters.
    pub depth: f64,
    pub laps: u32,
    /// Swimming speed, m/s.
    pub speed: f64,
    #[serde(default = "default_corner_radius")]
    pub corner_radius: f64,
}

fn default_corner_radius() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurveyCourse {
    pub duration: f64,
    /// Horizontal center of the pattern, meters.
    pub center: [f64; 2],
    /// Mean height of the camera above the marker grid, meters.
    pub altitude: f64,
    /// Horizontal sway amplitudes, meters.
    pub amplitude: [f64; 2],
    /// Horizontal sway periods, seconds.
    pub period: [f64; 2],
    pub bob_amplitude: f64,
    pub bob_period: f64,
    pub yaw_deg: f64,
    pub yaw_amplitude_deg: f64,
    pub tilt_amplitude_deg: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkerGrid {
    pub rows: u32,
    pub cols: u32,
    /// Marker edge length, meters.
    pub marker_size: f64,
    /// Center-to-center pitch, meters.
    pub spacing: f64,
    /// World position of the grid center.
    pub center: [f64; 3],
    #[serde(default)]
    pub yaw_deg: f64,
    #[serde(default)]
    pub first_id: u32,
}

impl MarkerGrid {
    pub fn center_pose(&self) -> Pose {
        Pose::new(
            0.0,
            Vector3::from(self.center),
            Quaternion::from_yaw(self.yaw_deg.to_radians()),
        )
    }

    /// World pose of every marker, ids assigned row-major. Row 0 is the
    /// northern-most row of an unrotated grid.
    pub fn marker_poses(&self) -> Vec<(u32, Pose)> {
        let center = self.center_pose();
        let mut out = Vec::with_capacity((self.rows * self.cols) as usize);
        for r in 0..self.rows {
            for c in 0..self.cols {
                let local = Vector3::new(
                    (c as f64 - (self.cols - 1) as f64 / 2.0) * self.spacing,
                    ((self.rows - 1) as f64 / 2.0 - r as f64) * self.spacing,
                    0.0,
                );
                let id = self.first_id + r * self.cols + c;
                out.push((id, center.compose(&Pose::new(0.0, local, Quaternion::IDENTITY))));
            }
        }
        out
    }
}

/// USBL transponder moored above vertex A.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Beacon {
    pub height_above_seabed: f64,
    /// Depth of the seabed under vertex A, meters.
    pub seabed_depth: f64,
}

impl Default for Beacon {
    fn default() -> Self {
        Self {
            height_above_seabed: 3.0,
            seabed_depth: 8.0,
        }
    }
}

impl Beacon {
    /// World position; vertex A is the world origin.
    pub fn position(&self) -> Vector3<f64> {
        Vector3::new(0.0, 0.0, -(self.seabed_depth - self.height_above_seabed))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ZoneCenter {
    /// One of the course vertices, "A" to "D".
    Vertex(String),
    Point([f64; 2]),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultipathZone {
    pub center: ZoneCenter,
    pub radius: f64,
    /// Offset added to acoustic fixes taken inside the zone, meters.
    pub bias: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t <= self.end
    }
}

pub(crate) fn in_any(intervals: &[Interval], t: f64) -> bool {
    intervals.iter().any(|i| i.contains(t))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorParams {
    pub imu_rate: f64,
    pub camera_rate: f64,
    pub acoustic_rate: f64,
    pub vio_rate: f64,
    pub imu: ImuNoise,
    pub marker: MarkerNoise,
    pub acoustic: AcousticNoise,
    pub depth: DepthNoise,
    pub vio: VioNoise,
}

impl Default for SensorParams {
    fn default() -> Self {
        Self {
            imu_rate: 60.0,
            camera_rate: 30.0,
            acoustic_rate: 0.2,
            vio_rate: 60.0,
            imu: ImuNoise::default(),
            marker: MarkerNoise::default(),
            acoustic: AcousticNoise::default(),
            depth: DepthNoise::default(),
            vio: VioNoise::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImuNoise {
    /// m/s^2/sqrt(Hz)
    pub accel_noise_density: f64,
    /// rad/s/sqrt(Hz)
    pub gyro_noise_density: f64,
    pub accel_bias: [f64; 3],
    pub gyro_bias: [f64; 3],
    pub accel_bias_walk: f64,
    pub gyro_bias_walk: f64,
}

impl Default for ImuNoise {
    fn default() -> Self {
        Self {
            accel_noise_density: 0.01,
            gyro_noise_density: 0.001,
            accel_bias: [0.0; 3],
            gyro_bias: [0.0; 3],
            accel_bias_walk: 0.0,
            gyro_bias_walk: 0.0,
        }
    }
}

impl ImuNoise {
    pub fn noiseless() -> Self {
        Self {
            accel_noise_density: 0.0,
            gyro_noise_density: 0.0,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarkerNoise {
    pub visibility_range: f64,
    pub fov_half_angle_deg: f64,
    pub sigma_pos: f64,
    pub sigma_rot: f64,
    pub p_outlier: f64,
    pub outlier_scale: f64,
}

impl Default for MarkerNoise {
    fn default() -> Self {
        Self {
            visibility_range: 5.0,
            fov_half_angle_deg: 35.0,
            sigma_pos: 0.02,
            sigma_rot: 0.03,
            p_outlier: 0.0,
            outlier_scale: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcousticNoise {
    /// Isotropic horizontal noise, meters.
    pub sigma_xy: f64,
    /// Half-width of the uniform slant-range error, meters.
    pub range_resolution: f64,
    pub p_loss: f64,
    pub p_loss_occluded: f64,
}

impl Default for AcousticNoise {
    fn default() -> Self {
        Self {
            sigma_xy: 0.3,
            range_resolution: 0.05,
            p_loss: 0.1,
            p_loss_occluded: 0.8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DepthNoise {
    pub sigma_z: f64,
}

impl Default for DepthNoise {
    fn default() -> Self {
        Self { sigma_z: 0.05 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VioNoise {
    /// Position random-walk intensity, m/sqrt(s) (horizontal RMS).
    pub drift_rate: f64,
    pub scale_error: f64,
    /// Orientation random-walk intensity, rad/sqrt(s) per axis.
    pub sigma_rot_walk: f64,
    /// Bound on the accumulated orientation error, rad.
    pub max_rot_error: f64,
}

impl Default for VioNoise {
    fn default() -> Self {
        Self {
            drift_rate: 0.05,
            scale_error: 0.01,
            sigma_rot_walk: 0.002,
            max_rot_error: 0.05,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidScenario(m));
        let s = &self.sensors;
        for (name, rate) in [
            ("imu_rate", s.imu_rate),
            ("camera_rate", s.camera_rate),
            ("acoustic_rate", s.acoustic_rate),
            ("vio_rate", s.vio_rate),
        ] {
            if !(rate > 0.0 && rate.is_finite()) {
                return bad(format!("sensors.{name} must be > 0"));
            }
        }
        for (name, p) in [
            ("marker.p_outlier", s.marker.p_outlier),
            ("acoustic.p_loss", s.acoustic.p_loss),
            ("acoustic.p_loss_occluded", s.acoustic.p_loss_occluded),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("sensors.{name} must be in [0, 1]"));
            }
        }
        for (name, v) in [
            ("imu.accel_noise_density", s.imu.accel_noise_density),
            ("imu.gyro_noise_density", s.imu.gyro_noise_density),
            ("marker.sigma_pos", s.marker.sigma_pos),
            ("marker.sigma_rot", s.marker.sigma_rot),
            ("acoustic.sigma_xy", s.acoustic.sigma_xy),
            ("acoustic.range_resolution", s.acoustic.range_resolution),
            ("depth.sigma_z", s.depth.sigma_z),
            ("vio.drift_rate", s.vio.drift_rate),
            ("vio.sigma_rot_walk", s.vio.sigma_rot_walk),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("sensors.{name} must be >= 0"));
            }
        }
        if !(s.marker.visibility_range > 0.0) {
            return bad("sensors.marker.visibility_range must be > 0".into());
        }
        match &self.course {
            Course::Quadrilateral(q) => {
                if !(q.speed > 0.0) {
                    return Err(SimError::InvalidSpeed(q.speed));
                }
                if q.laps < 1 {
                    return Err(SimError::InvalidLaps);
                }
                if !(q.corner_radius >= 0.0) {
                    return bad("course.corner_radius must be >= 0".into());
                }
                solve_quadrilateral(&q.lengths)?;
            }
            Course::Survey(c) => {
                if !(c.duration > 0.0) {
                    return bad("course.duration must be > 0".into());
                }
                if c.period.iter().any(|p| !(*p > 0.0)) || !(c.bob_period > 0.0) {
                    return bad("course periods must be > 0".into());
                }
            }
        }
        if let Some(g) = &self.marker_grid {
            if g.rows < 1 || g.cols < 1 {
                return bad("marker_grid.rows and cols must be >= 1".into());
            }
            if !(g.marker_size > 0.0) {
                return bad("marker_grid.marker_size must be > 0".into());
            }
        }
        for z in &self.zones {
            if !(z.radius > 0.0) {
                return bad("zone radius must be > 0".into());
            }
            self.zone_center(z)?;
        }
        Ok(())
    }

    /// World-frame vertices of a quadrilateral course.
    pub fn vertices(&self) -> Result<Option<Vertices>, SimError> {
        match &self.course {
            Course::Quadrilateral(q) => {
                let local = solve_quadrilateral(&q.lengths)?;
                Ok(Some(super::course::orient_vertices(&local, q.heading_offset_deg)))
            }
            Course::Survey(_) => Ok(None),
        }
    }

    pub fn zone_center(&self, zone: &MultipathZone) -> Result<Vector2<f64>, SimError> {
        match &zone.center {
            ZoneCenter::Point(p) => Ok(Vector2::from(*p)),
            ZoneCenter::Vertex(label) => {
                let vertices = self.vertices()?.ok_or_else(|| {
                    SimError::InvalidScenario(format!("zone at vertex {label} needs a quadrilateral course"))
                })?;
                vertices
                    .by_label(label)
                    .ok_or_else(|| SimError::InvalidScenario(format!("unknown vertex label `{label}`")))
            }
        }
    }

    /// Parses a scenario from its TOML text.
    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        let s: Scenario = toml::from_str(text).map_err(|e| SimError::Parse(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario types always serialize")
    }
}
