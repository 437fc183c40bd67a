//! Ground-truth dives and seeded synthesis of the five sensor streams.

mod course;
mod presets;
mod quad;
mod scenario;
mod sensors;
mod streams;

pub use course::{build_course, build_survey, build_truth, orient_vertices, truth_rate, FilletedPath};
pub use presets::{baiae_square, marker_lab, preset, PRESET_NAMES, SCENARIO_KEYS};
pub use quad::{solve_quadrilateral, QuadLengths, Vertices};
pub use scenario::{
    AcousticNoise, Beacon, Course, DepthNoise, ImuNoise, Interval, MarkerGrid, MarkerNoise, MultipathZone,
    QuadrilateralCourse, Scenario, SensorParams, SurveyCourse, VioNoise, ZoneCenter,
};
pub use sensors::{synth_acoustic, synth_depth, synth_imu, synth_markers, synth_vio, synthesize};

use nalgebra::Vector3;
use thiserror::Error;

use crate::eskf::ImuSample;
use crate::geometry::{GeometryError, Pose, Trajectory};

pub const GRAVITY: Vector3<f64> = Vector3::new(0.0, 0.0, -9.81);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("infeasible quadrilateral: {0}")]
    InfeasibleQuadrilateral(String),
    #[error("speed must be > 0, got {0}")]
    InvalidSpeed(f64),
    #[error("laps must be >= 1")]
    InvalidLaps,
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// One marker detection: the marker's pose in the camera frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarkerObservation {
    pub t: f64,
    pub marker_id: u32,
    pub relative: Pose,
    pub detected: bool,
    /// Simulator bookkeeping: the position was displaced as an outlier.
    /// Trackers never read this.
    pub outlier: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AcousticFix {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub delivered: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DepthSample {
    pub t: f64,
    /// Meters below the surface.
    pub depth: f64,
}

/// All synthetic sensor records of one run, each time-ordered.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SensorStreams {
    pub imu: Vec<ImuSample>,
    pub markers: Vec<MarkerObservation>,
    pub acoustic: Vec<AcousticFix>,
    pub depth: Vec<DepthSample>,
    pub vio: Vec<Pose>,
}

/// Truth plus streams for one scenario.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub scenario: Scenario,
    pub truth: Trajectory,
    pub streams: SensorStreams,
}

pub fn simulate(scenario: &Scenario) -> Result<Simulation, SimError> {
    scenario.validate()?;
    let truth = build_truth(scenario)?;
    let streams = synthesize(scenario, &truth, &GRAVITY)?;
    Ok(Simulation {
        scenario: scenario.clone(),
        truth,
        streams,
    })
}
