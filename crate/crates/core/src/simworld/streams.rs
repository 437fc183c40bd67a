//! CSV encoding of the sensor streams.

use std::io::{BufRead, Write};

use nalgebra::Vector3;

use super::{AcousticFix, DepthSample, MarkerObservation, SensorStreams};
use crate::csvfmt::{self, expect_columns, parse_floats, read_rows, CsvError};
use crate::eskf::ImuSample;
use crate::geometry::{parse_pose, pose_row, Pose, TRAJECTORY_HEADER};

pub const IMU_HEADER: &str = "t,ax,ay,az,gx,gy,gz";
pub const MARKER_HEADER: &str = "t,marker_id,detected,outlier,x,y,z,qw,qx,qy,qz";
pub const ACOUSTIC_HEADER: &str = "t,x,y,delivered";
pub const DEPTH_HEADER: &str = "t,depth";

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn parse_flag(s: &str, line: usize) -> Result<bool, CsvError> {
    match s {
        "1" => Ok(true),
        "0" => Ok(false),
        other => Err(CsvError::Parse {
            line,
            message: format!("expected 0 or 1, found `{other}`"),
        }),
    }
}

fn check_order(times: impl Iterator<Item = f64>, what: &str) -> Result<(), CsvError> {
    let mut last = f64::NEG_INFINITY;
    for t in times {
        if t < last {
            return Err(CsvError::Invalid(format!("{what} timestamps are not ordered")));
        }
        last = t;
    }
    Ok(())
}

impl SensorStreams {
    pub fn write_imu<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{IMU_HEADER}")?;
        for s in &self.imu {
            writeln!(
                out,
                "{}",
                csvfmt::join(&[s.t, s.accel.x, s.accel.y, s.accel.z, s.gyro.x, s.gyro.y, s.gyro.z])
            )?;
        }
        Ok(())
    }

    pub fn write_markers<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{MARKER_HEADER}")?;
        for o in &self.markers {
            let p = &o.relative;
            let [qw, qx, qy, qz] = p.orientation.wxyz();
            writeln!(
                out,
                "{},{},{},{},{}",
                csvfmt::float(o.t),
                o.marker_id,
                flag(o.detected),
                flag(o.outlier),
                csvfmt::join(&[p.position.x, p.position.y, p.position.z, qw, qx, qy, qz])
            )?;
        }
        Ok(())
    }

    pub fn write_acoustic<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{ACOUSTIC_HEADER}")?;
        for f in &self.acoustic {
            writeln!(out, "{},{}", csvfmt::join(&[f.t, f.x, f.y]), flag(f.delivered))?;
        }
        Ok(())
    }

    pub fn write_depth<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{DEPTH_HEADER}")?;
        for d in &self.depth {
            writeln!(out, "{}", csvfmt::join(&[d.t, d.depth]))?;
        }
        Ok(())
    }

    pub fn write_vio<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{TRAJECTORY_HEADER}")?;
        for p in &self.vio {
            writeln!(out, "{}", pose_row(p))?;
        }
        Ok(())
    }

    pub fn read_imu<R: BufRead>(input: R) -> Result<Vec<ImuSample>, CsvError> {
        let rows = read_rows(input, IMU_HEADER)?;
        let out = rows
            .iter()
            .map(|row| {
                expect_columns(row, 7)?;
                let v = parse_floats(&row.fields, row.line)?;
                Ok(ImuSample::new(
                    v[0],
                    Vector3::new(v[1], v[2], v[3]),
                    Vector3::new(v[4], v[5], v[6]),
                ))
            })
            .collect::<Result<Vec<_>, CsvError>>()?;
        check_order(out.iter().map(|s| s.t), "imu")?;
        Ok(out)
    }

    pub fn read_markers<R: BufRead>(input: R) -> Result<Vec<MarkerObservation>, CsvError> {
        let rows = read_rows(input, MARKER_HEADER)?;
        let out = rows
            .iter()
            .map(|row| {
                expect_columns(row, 11)?;
                let t = parse_floats(&row.fields[..1], row.line)?[0];
                let marker_id = row.fields[1].parse::<u32>().map_err(|e| CsvError::Parse {
                    line: row.line,
                    message: format!("marker id: {e}"),
                })?;
                let mut pose_fields = vec![row.fields[0].clone()];
                pose_fields.extend_from_slice(&row.fields[4..]);
                Ok(MarkerObservation {
                    t,
                    marker_id,
                    detected: parse_flag(&row.fields[2], row.line)?,
                    outlier: parse_flag(&row.fields[3], row.line)?,
                    relative: parse_pose(&pose_fields, row.line)?,
                })
            })
            .collect::<Result<Vec<_>, CsvError>>()?;
        check_order(out.iter().map(|s| s.t), "marker")?;
        Ok(out)
    }

    pub fn read_acoustic<R: BufRead>(input: R) -> Result<Vec<AcousticFix>, CsvError> {
        let rows = read_rows(input, ACOUSTIC_HEADER)?;
        let out = rows
            .iter()
            .map(|row| {
                expect_columns(row, 4)?;
                let v = parse_floats(&row.fields[..3], row.line)?;
                Ok(AcousticFix {
                    t: v[0],
                    x: v[1],
                    y: v[2],
                    delivered: parse_flag(&row.fields[3], row.line)?,
                })
            })
            .collect::<Result<Vec<_>, CsvError>>()?;
        check_order(out.iter().map(|s| s.t), "acoustic")?;
        Ok(out)
    }

    pub fn read_depth<R: BufRead>(input: R) -> Result<Vec<DepthSample>, CsvError> {
        let rows = read_rows(input, DEPTH_HEADER)?;
        let out = rows
            .iter()
            .map(|row| {
                expect_columns(row, 2)?;
                let v = parse_floats(&row.fields, row.line)?;
                Ok(DepthSample { t: v[0], depth: v[1] })
            })
            .collect::<Result<Vec<_>, CsvError>>()?;
        check_order(out.iter().map(|s| s.t), "depth")?;
        Ok(out)
    }

    pub fn read_vio<R: BufRead>(input: R) -> Result<Vec<Pose>, CsvError> {
        let rows = read_rows(input, TRAJECTORY_HEADER)?;
        let out = rows
            .iter()
            .map(|row| {
                expect_columns(row, 8)?;
                parse_pose(&row.fields, row.line)
            })
            .collect::<Result<Vec<_>, CsvError>>()?;
        check_order(out.iter().map(|s| s.t), "vio")?;
        Ok(out)
    }
}
