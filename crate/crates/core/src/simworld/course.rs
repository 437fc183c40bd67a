use std::f64::consts::{PI, TAU};

use nalgebra::{Vector2, Vector3};

use super::quad::{solve_quadrilateral, Vertices};
use super::scenario::{Course, QuadrilateralCourse, Scenario, SurveyCourse};
use super::SimError;
use crate::geometry::{Pose, Quaternion, Trajectory};

/// Compass bearing (clockwise from north, radians) of a horizontal vector.
fn bearing(v: &Vector2<f64>) -> f64 {
    v.x.atan2(v.y)
}

fn rotate2(v: &Vector2<f64>, angle: f64) -> Vector2<f64> {
    let (s, c) = angle.sin_cos();
    Vector2::new(c * v.x - s * v.y, s * v.x + c * v.y)
}

/// Rotates solver-frame vertices about A so that the A -> C diagonal has
/// the requested compass bearing.
pub fn orient_vertices(local: &Vertices, heading_offset_deg: f64) -> Vertices {
    let angle = bearing(&(local.c - local.a)) - heading_offset_deg.to_radians();
    let r = |p: &Vector2<f64>| rotate2(p, angle);
    Vertices {
        a: r(&local.a),
        b: r(&local.b),
        c: r(&local.c),
        d: r(&local.d),
    }
}

#[derive(Clone, Debug)]
enum Segment {
    Line {
        start: Vector2<f64>,
        dir: Vector2<f64>,
        length: f64,
    },
    Arc {
        center: Vector2<f64>,
        radius: f64,
        start_angle: f64,
        /// Signed sweep; positive is counterclockwise.
        sweep: f64,
    },
}

impl Segment {
    fn length(&self) -> f64 {
        match self {
            Segment::Line { length, .. } => *length,
            Segment::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    /// Point and heading (ENU yaw) at distance `s` along the segment.
    fn at(&self, s: f64) -> (Vector2<f64>, f64) {
        match self {
            Segment::Line { start, dir, .. } => (start + dir * s, dir.y.atan2(dir.x)),
            Segment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let phi = start_angle + sweep.signum() * s / radius;
                let p = center + Vector2::new(phi.cos(), phi.sin()) * *radius;
                (p, phi + sweep.signum() * PI / 2.0)
            }
        }
    }
}

/// Polyline through `waypoints` with every interior corner replaced by a
/// tangent arc of `radius` (shrunk where an edge is too short).
#[derive(Clone, Debug)]
pub struct FilletedPath {
    segments: Vec<Segment>,
    cumulative: Vec<f64>,
}

impl FilletedPath {
    pub fn new(waypoints: &[Vector2<f64>], radius: f64) -> Self {
        let n = waypoints.len();
        assert!(n >= 2, "a path needs at least two waypoints");
        let dirs: Vec<Vector2<f64>> = waypoints.windows(2).map(|w| (w[1] - w[0]).normalize()).collect();
        let edge_len: Vec<f64> = waypoints.windows(2).map(|w| (w[1] - w[0]).norm()).collect();

        // Tangent set-back at each interior waypoint.
        let mut setback = vec![0.0; n];
        let mut radii = vec![0.0; n];
        for i in 1..n - 1 {
            let (u, v) = (dirs[i - 1], dirs[i]);
            let turn = (u.x * v.y - u.y * v.x).atan2(u.dot(&v)).abs();
            if turn < 1e-9 || radius <= 0.0 {
                continue;
            }
            let max_setback = 0.5 * edge_len[i - 1].min(edge_len[i]);
            let r = radius.min(max_setback / (turn / 2.0).tan());
            radii[i] = r;
            setback[i] = r * (turn / 2.0).tan();
        }

        let mut segments = Vec::new();
        for i in 0..n - 1 {
            let start = waypoints[i] + dirs[i] * setback[i];
            let length = edge_len[i] - setback[i] - setback[i + 1];
            segments.push(Segment::Line {
                start,
                dir: dirs[i],
                length,
            });
            let j = i + 1;
            if j < n - 1 && radii[j] > 0.0 {
                let (u, v) = (dirs[j - 1], dirs[j]);
                let turn = (u.x * v.y - u.y * v.x).atan2(u.dot(&v));
                let left = Vector2::new(-u.y, u.x) * turn.signum();
                let tangent_in = waypoints[j] - u * setback[j];
                let center = tangent_in + left * radii[j];
                let from_center = tangent_in - center;
                segments.push(Segment::Arc {
                    center,
                    radius: radii[j],
                    start_angle: from_center.y.atan2(from_center.x),
                    sweep: turn,
                });
            }
        }
        let mut cumulative = Vec::with_capacity(segments.len() + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for s in &segments {
            acc += s.length();
            cumulative.push(acc);
        }
        Self { segments, cumulative }
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn at(&self, s: f64) -> (Vector2<f64>, f64) {
        let s = s.clamp(0.0, self.length());
        let i = self
            .cumulative
            .partition_point(|c| *c <= s)
            .saturating_sub(1)
            .min(self.segments.len() - 1);
        self.segments[i].at(s - self.cumulative[i])
    }
}

pub fn course_path(course: &QuadrilateralCourse, vertices: &Vertices) -> FilletedPath {
    let [a, b, c, d] = vertices.as_array();
    let mut waypoints = vec![a];
    for _ in 0..course.laps {
        waypoints.extend([b, c, d, a]);
    }
    FilletedPath::new(&waypoints, course.corner_radius)
}

/// Ground truth for a quadrilateral course: constant depth, heading along
/// the path, sampled at `rate`.
pub fn build_course(course: &QuadrilateralCourse, rate: f64) -> Result<Trajectory, SimError> {
    if !(course.speed > 0.0) {
        return Err(SimError::InvalidSpeed(course.speed));
    }
    if course.laps < 1 {
        return Err(SimError::InvalidLaps);
    }
    let vertices = orient_vertices(&solve_quadrilateral(&course.lengths)?, course.heading_offset_deg);
    let path = course_path(course, &vertices);
    let duration = path.length() / course.speed;
    let n = (duration * rate + 1e-9).floor() as usize;
    let samples = (0..=n)
        .map(|k| {
            let t = k as f64 / rate;
            let (p, yaw) = path.at(course.speed * t);
            Pose::new(t, Vector3::new(p.x, p.y, -course.depth), Quaternion::from_yaw(yaw))
        })
        .collect();
    Ok(Trajectory::new(samples)?)
}

/// Smooth hovering pattern above a marker grid whose top surface is at
/// `grid_z`. The camera (body -z) looks down at the grid.
pub fn build_survey(course: &SurveyCourse, grid_z: f64, rate: f64) -> Result<Trajectory, SimError> {
    let n = (course.duration * rate + 1e-9).floor() as usize;
    let w = |period: f64| TAU / period;
    let samples = (0..=n)
        .map(|k| {
            let t = k as f64 / rate;
            let p = Vector3::new(
                course.center[0] + course.amplitude[0] * (w(course.period[0]) * t).sin(),
                course.center[1] + course.amplitude[1] * (w(course.period[1]) * t + 0.7).sin(),
                grid_z + course.altitude + course.bob_amplitude * (w(course.bob_period) * t).sin(),
            );
            let tilt = course.tilt_amplitude_deg.to_radians();
            let q = Quaternion::from_euler(
                tilt * (w(7.0) * t).sin(),
                tilt * (w(11.0) * t + 0.3).sin(),
                course.yaw_deg.to_radians() + course.yaw_amplitude_deg.to_radians() * (w(23.0) * t).sin(),
            );
            Pose::new(t, p, q)
        })
        .collect();
    Ok(Trajectory::new(samples)?)
}

/// Sampling rate of the truth trajectory.
pub fn truth_rate(scenario: &Scenario) -> f64 {
    scenario.sensors.imu_rate.max(scenario.sensors.vio_rate)
}

pub fn build_truth(scenario: &Scenario) -> Result<Trajectory, SimError> {
    let rate = truth_rate(scenario);
    match &scenario.course {
        Course::Quadrilateral(q) => build_course(q, rate),
        Course::Survey(s) => {
            let grid_z = scenario.marker_grid.as_ref().map_or(0.0, |g| g.center[2]);
            build_survey(s, grid_z, rate)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simworld::quad::QuadLengths;

    fn trial_course(laps: u32) -> QuadrilateralCourse {
        QuadrilateralCourse {
            lengths: QuadLengths {
                ab: 30.0,
                cd: 30.0,
                ad: 29.26,
                bd: 43.3,
                ac: 41.0,
            },
            heading_offset_deg: 11.0,
            depth: 6.0,
            laps,
            speed: 0.5,
            corner_radius: 1.0,
        }
    }

    #[test]
    fn diagonal_bearing_is_applied() {
        let local = solve_quadrilateral(&trial_course(1).lengths).unwrap();
        let v = orient_vertices(&local, 11.0);
        assert!((bearing(&(v.c - v.a)).to_degrees() - 11.0).abs() < 1e-9);
        assert!((v.lengths().bd - 43.3).abs() < 1e-9);
    }

    #[test]
    fn starts_at_vertex_a_at_depth() {
        let traj = build_course(&trial_course(1), 60.0).unwrap();
        let first = traj.first();
        assert_eq!(first.t, 0.0);
        assert!(first.position.xy().norm() < 1e-12);
        assert!(traj.iter().all(|p| p.position.z == -6.0));
    }

    #[test]
    fn duration_matches_path_length() {
        let course = trial_course(3);
        let traj = build_course(&course, 60.0).unwrap();
        let local = solve_quadrilateral(&course.lengths).unwrap();
        let perimeter = local.perimeter();
        // Each filleted corner shortens the path by r * (2 tan(phi/2) - phi).
        let sharp = 3.0 * perimeter / course.speed;
        assert!((traj.duration() - sharp).abs() < 12.0 * 0.5 / course.speed + 1.0 / 60.0);
        assert!(traj.duration() < sharp);
        assert!((sharp - 715.0).abs() < 2.0, "sharp-corner duration {sharp}");
    }

    #[test]
    fn path_is_continuous() {
        let traj = build_course(&trial_course(2), 60.0).unwrap();
        let step = 0.5 / 60.0;
        for w in traj.samples().windows(2) {
            let d = (w[1].position - w[0].position).norm();
            assert!(d <= step + 1e-9, "jump of {d} at t={}", w[0].t);
            assert!(d >= 0.9 * step);
        }
    }

    #[test]
    fn rejects_bad_speed_and_laps() {
        let mut c = trial_course(1);
        c.speed = 0.0;
        assert!(matches!(build_course(&c, 60.0), Err(SimError::InvalidSpeed(_))));
        let mut c = trial_course(1);
        c.laps = 0;
        assert!(matches!(build_course(&c, 60.0), Err(SimError::InvalidLaps)));
    }

    #[test]
    fn fillet_is_tangent() {
        let wp = [
            Vector2::new(0.0, 0.0),
            Vector2::new(10.0, 0.0),
            Vector2::new(10.0, 10.0),
        ];
        let path = FilletedPath::new(&wp, 1.0);
        assert!((path.length() - (18.0 + PI / 2.0)).abs() < 1e-12);
        let (p, yaw) = path.at(9.0 + PI / 4.0);
        let expected = Vector2::new(9.0, 1.0) + Vector2::new((-PI / 4.0).cos(), (-PI / 4.0).sin());
        assert!((p - expected).norm() < 1e-12);
        assert!((yaw - PI / 4.0).abs() < 1e-12);
    }
}
