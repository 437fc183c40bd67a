use super::quad::QuadLengths;
use super::scenario::*;
use super::SimError;

pub const PRESET_NAMES: [&str; 2] = ["baiae-square", "marker-lab"];

pub fn preset(name: &str) -> Result<Scenario, SimError> {
    match name {
        "baiae-square" => Ok(baiae_square()),
        "marker-lab" => Ok(marker_lab()),
        other => Err(SimError::UnknownPreset(other.to_string())),
    }
}

/// Three counterclockwise laps of the roped Baiae course at 6 m depth,
/// with the USBL beacon moored 3 m above the seabed at vertex A and a
/// multipath zone around vertex C.
pub fn baiae_square() -> Scenario {
    Scenario {
        name: "baiae-square".into(),
        seed: 2019,
        course: Course::Quadrilateral(QuadrilateralCourse {
            lengths: QuadLengths {
                ab: 30.0,
                cd: 30.0,
                ad: 29.26,
                bd: 43.3,
                ac: 41.0,
            },
            heading_offset_deg: 11.0,
            depth: 6.0,
            laps: 3,
            speed: 0.5,
            corner_radius: 1.0,
        }),
        marker_grid: None,
        beacon: Beacon {
            height_above_seabed: 3.0,
            seabed_depth: 8.0,
        },
        zones: vec![MultipathZone {
            center: ZoneCenter::Vertex("C".into()),
            radius: 5.0,
            bias: [5.5, 0.0],
        }],
        occlusions: vec![
            Interval {
                start: 150.0,
                end: 175.0,
            },
            Interval {
                start: 420.0,
                end: 440.0,
            },
        ],
        marker_blackouts: Vec::new(),
        sensors: SensorParams {
            imu_rate: 60.0,
            camera_rate: 30.0,
            acoustic_rate: 0.2,
            vio_rate: 60.0,
            imu: ImuNoise {
                accel_noise_density: 0.01,
                gyro_noise_density: 0.001,
                accel_bias: [0.02, -0.01, 0.03],
                gyro_bias: [0.002, -0.001, 0.0015],
                accel_bias_walk: 0.0,
                gyro_bias_walk: 0.0,
            },
            marker: MarkerNoise::default(),
            acoustic: AcousticNoise {
                sigma_xy: 0.3,
                range_resolution: 0.05,
                p_loss: 0.1,
                p_loss_occluded: 0.8,
            },
            depth: DepthNoise { sigma_z: 0.05 },
            vio: VioNoise {
                drift_rate: 0.05,
                scale_error: 0.01,
                sigma_rot_walk: 0.002,
                max_rot_error: 0.05,
            },
        },
    }
}

/// Laboratory marker session: a diver hovering about 1.2 m above a 3 x 3
/// grid of 19 cm markers, IMU at 60 Hz and camera at 30 Hz.
///
/// Marker noise is calibrated so that the detector-only track averages
/// about 52 mm position error and 1.9 degrees orientation error.
pub fn marker_lab() -> Scenario {
    Scenario {
        name: "marker-lab".into(),
        seed: 1,
        course: Course::Survey(SurveyCourse {
            duration: 40.0,
            center: [0.0, 0.0],
            altitude: 1.2,
            amplitude: [0.35, 0.25],
            period: [19.0, 13.0],
            bob_amplitude: 0.1,
            bob_period: 9.0,
            yaw_deg: 0.0,
            yaw_amplitude_deg: 25.0,
            tilt_amplitude_deg: 6.0,
        }),
        marker_grid: Some(MarkerGrid {
            rows: 3,
            cols: 3,
            marker_size: 0.19,
            spacing: 0.25,
            center: [0.0, 0.0, 0.0],
            yaw_deg: 0.0,
            first_id: 0,
        }),
        beacon: Beacon::default(),
        zones: Vec::new(),
        occlusions: Vec::new(),
        marker_blackouts: Vec::new(),
        sensors: SensorParams {
            imu: ImuNoise {
                accel_noise_density: 0.01,
                gyro_noise_density: 0.001,
                accel_bias: [0.02, -0.01, 0.03],
                gyro_bias: [0.002, -0.001, 0.0015],
                accel_bias_walk: 0.0,
                gyro_bias_walk: 0.0,
            },
            marker: MarkerNoise {
                visibility_range: 3.0,
                fov_half_angle_deg: 35.0,
                sigma_pos: 0.07,
                sigma_rot: 0.06,
                p_outlier: 0.02,
                outlier_scale: 0.5,
            },
            ..SensorParams::default()
        },
    }
}

/// Reference for every scenario file key, shown by the CLI help.
pub const SCENARIO_KEYS: &str = "\
SCENARIO FILE KEYS (TOML)
  name                              run label
  seed                              64-bit seed; every stream derives its own generator from it
  [course] kind = \"quadrilateral\"
    lengths.{ab,cd,ad,bd,ac}        measured rope lengths, m (BC follows from the others)
    heading_offset_deg              compass bearing of diagonal A->C, degrees clockwise from north
    depth                           constant swimming depth below the surface, m
    laps                            counterclockwise laps A->B->C->D->A (>= 1)
    speed                           swimming speed, m/s (> 0)
    corner_radius                   fillet radius at each corner, m (default 1)
  [course] kind = \"survey\"
    duration                        seconds
    center = [x, y]                 pattern center, m
    altitude                        mean camera height above the marker grid, m
    amplitude = [ax, ay]            horizontal sway amplitudes, m
    period = [tx, ty]               horizontal sway periods, s
    bob_amplitude, bob_period       vertical bobbing, m and s
    yaw_deg, yaw_amplitude_deg      mean heading and its oscillation, degrees
    tilt_amplitude_deg              roll/pitch oscillation, degrees
  [marker_grid]                     optional
    rows, cols                      grid size (>= 1)
    marker_size                     marker edge, m (> 0)
    spacing                         center-to-center pitch, m
    center = [x, y, z]              world position of the grid center, m
    yaw_deg                         grid rotation about z, degrees
    first_id                        id of the first marker; ids are row-major
  [beacon]
    height_above_seabed             USBL transponder height above the seabed at vertex A, m
    seabed_depth                    seabed depth at vertex A, m
  [[zones]]                         multipath zones
    center = \"C\" | [x, y]           a vertex label or a world point
    radius                          m (> 0)
    bias = [bx, by]                 offset added to acoustic fixes inside the zone, m
  [[occlusions]] start, end         seconds; acoustic loss uses p_loss_occluded inside
  [[marker_blackouts]] start, end   seconds; markers are reported undetected inside
  [sensors]
    imu_rate, camera_rate, acoustic_rate, vio_rate   Hz (> 0)
    imu.accel_noise_density         m/s^2/sqrt(Hz)
    imu.gyro_noise_density          rad/s/sqrt(Hz)
    imu.accel_bias, imu.gyro_bias   constant biases, 3-vectors
    imu.accel_bias_walk, imu.gyro_bias_walk   bias random walks per sqrt(s)
    marker.visibility_range         m
    marker.fov_half_angle_deg       half-angle of the camera cone around body -z
    marker.sigma_pos, marker.sigma_rot        per-axis detection noise, m and rad
    marker.p_outlier, marker.outlier_scale    outlier probability and max displacement, m
    acoustic.sigma_xy               horizontal fix noise, m
    acoustic.range_resolution       half-width of the uniform slant-range error, m
    acoustic.p_loss, acoustic.p_loss_occluded packet loss probabilities
    depth.sigma_z                   pressure depth noise, m
    vio.drift_rate                  position random walk, m/sqrt(s) horizontal RMS
    vio.scale_error                 relative scale error
    vio.sigma_rot_walk              orientation random walk, rad/sqrt(s)
    vio.max_rot_error               bound on the orientation walk, rad
PRESETS: baiae-square, marker-lab";
