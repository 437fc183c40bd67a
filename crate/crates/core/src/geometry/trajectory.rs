use std::io::{BufRead, Write};

use nalgebra::Vector3;

use super::{GeometryError, Pose, Quaternion};
use crate::csvfmt::{self, CsvError};

pub const TRAJECTORY_HEADER: &str = "t,x,y,z,qw,qx,qy,qz";

/// Time-ordered sequence of poses with strictly increasing timestamps.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    samples: Vec<Pose>,
}

impl Trajectory {
    pub fn new(samples: Vec<Pose>) -> Result<Self, GeometryError> {
        if samples.is_empty() {
            return Err(GeometryError::EmptyTrajectory);
        }
        for (i, s) in samples.iter().enumerate() {
            if !s.t.is_finite() || s.t < 0.0 || !s.position.iter().all(|c| c.is_finite()) {
                return Err(GeometryError::NonFiniteSample { index: i });
            }
        }
        if let Some(i) = samples.windows(2).position(|w| w[1].t <= w[0].t) {
            return Err(GeometryError::NonIncreasingTime { index: i + 1 });
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[Pose] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> &Pose {
        &self.samples[0]
    }

    pub fn last(&self) -> &Pose {
        &self.samples[self.samples.len() - 1]
    }

    pub fn start_time(&self) -> f64 {
        self.first().t
    }

    pub fn end_time(&self) -> f64 {
        self.last().t
    }

    pub fn duration(&self) -> f64 {
        self.end_time() - self.start_time()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Pose> {
        self.samples.iter()
    }

    pub fn into_samples(self) -> Vec<Pose> {
        self.samples
    }

    /// Interpolated pose at time `t`: linear in position, slerp in orientation.
    pub fn sample_at(&self, t: f64) -> Result<Pose, GeometryError> {
        let (t0, t1) = (self.start_time(), self.end_time());
        if !(t0..=t1).contains(&t) {
            return Err(GeometryError::OutOfRange { t, start: t0, end: t1 });
        }
        // First index with sample.t > t.
        let hi = self.samples.partition_point(|s| s.t <= t);
        let lo = hi - 1;
        let a = &self.samples[lo];
        if a.t == t || hi == self.samples.len() {
            return Ok(*a);
        }
        let b = &self.samples[hi];
        let tau = (t - a.t) / (b.t - a.t);
        Ok(Pose::new(
            t,
            a.position + (b.position - a.position) * tau,
            a.orientation.slerp(&b.orientation, tau),
        ))
    }

    /// Applies a rigid transform to every sample (world re-anchoring).
    pub fn transformed(&self, transform: &Pose) -> Trajectory {
        let samples = self
            .samples
            .iter()
            .map(|s| transform.compose(s).with_time(s.t))
            .collect();
        Trajectory { samples }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{TRAJECTORY_HEADER}")?;
        for s in &self.samples {
            writeln!(out, "{}", pose_row(s))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is ascii")
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self, CsvError> {
        let rows = csvfmt::read_rows(input, TRAJECTORY_HEADER)?;
        let samples = rows
            .iter()
            .map(|row| parse_pose(&row.fields, row.line))
            .collect::<Result<Vec<_>, _>>()?;
        Trajectory::new(samples).map_err(|e| CsvError::Invalid(e.to_string()))
    }
}

/// Formats a pose as the eight comma-separated trajectory columns.
pub fn pose_row(s: &Pose) -> String {
    let [qw, qx, qy, qz] = s.orientation.wxyz();
    csvfmt::join(&[s.t, s.position.x, s.position.y, s.position.z, qw, qx, qy, qz])
}

pub(crate) fn parse_pose(fields: &[String], line: usize) -> Result<Pose, CsvError> {
    if fields.len() < 8 {
        return Err(CsvError::Parse {
            line,
            message: format!("expected 8 pose columns, found {}", fields.len()),
        });
    }
    let v = csvfmt::parse_floats(&fields[..8], line)?;
    let q = Quaternion::from_stored(v[4], v[5], v[6], v[7]).map_err(|e| CsvError::Parse {
        line,
        message: e.to_string(),
    })?;
    Ok(Pose::new(v[0], Vector3::new(v[1], v[2], v[3]), q))
}

pub fn sample_at(traj: &Trajectory, t: f64) -> Result<Pose, GeometryError> {
    traj.sample_at(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn two_point() -> Trajectory {
        Trajectory::new(vec![
            Pose::new(0.0, Vector3::zeros(), Quaternion::IDENTITY),
            Pose::new(1.0, Vector3::new(2.0, 0.0, 0.0), Quaternion::from_yaw(PI / 2.0)),
        ])
        .unwrap()
    }

    #[test]
    fn exact_at_stored_timestamps() {
        let traj = two_point();
        for s in traj.iter() {
            let got = traj.sample_at(s.t).unwrap();
            assert_eq!(got.position, s.position);
            assert_eq!(got.orientation, s.orientation);
        }
    }

    #[test]
    fn linear_midpoint() {
        let got = two_point().sample_at(0.5).unwrap();
        assert_eq!(got.position, Vector3::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn quarter_point_orientation() {
        let got = two_point().sample_at(0.25).unwrap();
        // Scaling the rotation vector of the 90 degree turn by 1/4.
        let oracle = Quaternion::from_rotvec(&(Quaternion::from_yaw(PI / 2.0).to_rotvec() * 0.25));
        assert!(crate::geometry::quat_error(&got.orientation, &oracle) < 1e-9);
        assert!((got.orientation.yaw() - PI / 8.0).abs() < 1e-9);
    }

    #[test]
    fn out_of_range_is_error() {
        let traj = two_point();
        assert!(matches!(traj.sample_at(1.5), Err(GeometryError::OutOfRange { .. })));
        assert!(traj.sample_at(-0.1).is_err());
    }

    #[test]
    fn rejects_non_increasing_time() {
        let p = Pose::identity(1.0);
        assert!(matches!(
            Trajectory::new(vec![p, p]),
            Err(GeometryError::NonIncreasingTime { index: 1 })
        ));
        assert!(Trajectory::new(vec![]).is_err());
    }

    #[test]
    fn csv_header_and_format() {
        let csv = two_point().to_csv_string();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(TRAJECTORY_HEADER));
        assert_eq!(
            lines.next(),
            Some("0.000000000,0.000000000,0.000000000,0.000000000,1.000000000,0.000000000,0.000000000,0.000000000")
        );
    }

    #[test]
    fn csv_rewrite_is_byte_identical() {
        let traj = Trajectory::new(
            (0..50)
                .map(|k| {
                    let t = k as f64 / 60.0;
                    Pose::new(
                        t,
                        Vector3::new(t.sin() * 3.1, -t * 0.7, -6.0 + 0.01 * t),
                        Quaternion::from_euler(0.1 * t, -0.05, t),
                    )
                })
                .collect(),
        )
        .unwrap();
        let first = traj.to_csv_string();
        let reread = Trajectory::read_csv(first.as_bytes()).unwrap();
        assert_eq!(reread.to_csv_string(), first);
        for (a, b) in traj.iter().zip(reread.iter()) {
            assert!((a.position - b.position).amax() <= 5e-10);
        }
    }
}
