//! Acoustic/visual-inertial hybrid: sparse USBL fixes anchor the horizontal
//! position, VIO displacement fills the gaps at its own rate, depth comes
//! from the pressure sensor and orientation from VIO.

use std::io::{BufRead, Write};

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::csvfmt::{expect_columns, read_rows, CsvError};
use crate::geometry::{pose_row, GeometryError, Pose, Trajectory, TRAJECTORY_HEADER};
use crate::simworld::{AcousticFix, DepthSample, SensorStreams};

/// A fix timestamped up to this much after a VIO sample still applies to it.
pub const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HybridError {
    #[error("no acoustic fix has been delivered yet")]
    NotLocalized,
    #[error("VIO sample at t={vio_t} precedes the anchor at t={anchor_t}")]
    VioBeforeAnchor { vio_t: f64, anchor_t: f64 },
    #[error("fix at t={fix_t} is later than the VIO sample at t={vio_t}")]
    FixFromFuture { fix_t: f64, vio_t: f64 },
    #[error("no depth sample at t={0}")]
    DepthMissing(f64),
    #[error("input streams are empty: {0}")]
    EmptyStreams(&'static str),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Where the horizontal position of an output sample came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    Acoustic,
    VioFill,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Acoustic => "acoustic",
            Source::VioFill => "vio-fill",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Anchor {
    pub t: f64,
    pub xy: Vector2<f64>,
    pub vio_xy: Vector2<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HybridState {
    pub anchor: Option<Anchor>,
}

/// One tracker step at a VIO sample.
///
/// A delivered `fix` re-anchors the track: the output xy equals the fix
/// exactly. Otherwise xy is the anchor plus the VIO displacement since the
/// anchor. Depth is taken from `depth`, orientation from `vio`.
pub fn hybrid_step(
    state: &HybridState,
    vio: &Pose,
    depth: &DepthSample,
    fix: Option<&AcousticFix>,
) -> Result<(HybridState, Pose, Source), HybridError> {
    if depth.t != vio.t {
        return Err(HybridError::DepthMissing(vio.t));
    }
    let vio_xy = vio.position.xy();
    let (anchor, source) = match fix.filter(|f| f.delivered) {
        Some(f) => {
            if f.t > vio.t + TIME_EPS {
                return Err(HybridError::FixFromFuture {
                    fix_t: f.t,
                    vio_t: vio.t,
                });
            }
            let anchor = Anchor {
                t: vio.t,
                xy: Vector2::new(f.x, f.y),
                vio_xy,
            };
            (anchor, Source::Acoustic)
        }
        None => {
            let anchor = state.anchor.ok_or(HybridError::NotLocalized)?;
            if vio.t < anchor.t {
                return Err(HybridError::VioBeforeAnchor {
                    vio_t: vio.t,
                    anchor_t: anchor.t,
                });
            }
            (anchor, Source::VioFill)
        }
    };
    let xy = match source {
        Source::Acoustic => anchor.xy,
        Source::VioFill => anchor.xy + (vio_xy - anchor.vio_xy),
    };
    let pose = Pose::new(vio.t, Vector3::new(xy.x, xy.y, -depth.depth), vio.orientation);
    Ok((HybridState { anchor: Some(anchor) }, pose, source))
}

#[derive(Clone, Debug)]
pub struct HybridTrack {
    pub trajectory: Trajectory,
    pub sources: Vec<Source>,
    pub fixes_applied: usize,
    pub fixes_lost: usize,
}

impl HybridTrack {
    /// Times at which the track was re-anchored.
    pub fn anchor_times(&self) -> Vec<f64> {
        self.trajectory
            .iter()
            .zip(&self.sources)
            .filter(|(_, s)| **s == Source::Acoustic)
            .map(|(p, _)| p.t)
            .collect()
    }
}

/// Runs the hybrid tracker over a session. Output starts at the first
/// delivered fix and has one sample per VIO sample from then on.
pub fn run_hybrid_tracking(streams: &SensorStreams) -> Result<HybridTrack, HybridError> {
    if streams.vio.is_empty() {
        return Err(HybridError::EmptyStreams("no vio samples"));
    }
    let mut state = HybridState::default();
    let mut poses = Vec::with_capacity(streams.vio.len());
    let mut sources = Vec::with_capacity(streams.vio.len());
    let mut next_fix = 0;
    let mut next_depth = 0;
    let mut fixes_applied = 0;
    let mut fixes_lost = 0;
    for vio in &streams.vio {
        while next_depth < streams.depth.len() && streams.depth[next_depth].t < vio.t {
            next_depth += 1;
        }
        let depth = streams
            .depth
            .get(next_depth)
            .filter(|d| d.t == vio.t)
            .ok_or(HybridError::DepthMissing(vio.t))?;
        let mut fix = None;
        while next_fix < streams.acoustic.len() && streams.acoustic[next_fix].t <= vio.t + TIME_EPS {
            let f = &streams.acoustic[next_fix];
            if f.delivered {
                fix = Some(f);
            } else {
                fixes_lost += 1;
            }
            next_fix += 1;
        }
        match hybrid_step(&state, vio, depth, fix) {
            Ok((s, pose, source)) => {
                if source == Source::Acoustic {
                    fixes_applied += 1;
                }
                state = s;
                poses.push(pose);
                sources.push(source);
            }
            Err(HybridError::NotLocalized) => {}
            Err(e) => return Err(e),
        }
    }
    if poses.is_empty() {
        return Err(HybridError::NotLocalized);
    }
    Ok(HybridTrack {
        trajectory: Trajectory::new(poses)?,
        sources,
        fixes_applied,
        fixes_lost,
    })
}

/// The acoustic fixes alone, for comparison with the hybrid output: one
/// sample per delivered fix, depth from the pressure sensor and orientation
/// from the VIO sample the fix is applied at.
pub fn run_acoustic_only(streams: &SensorStreams) -> Result<HybridTrack, HybridError> {
    let hybrid = run_hybrid_tracking(streams)?;
    let poses: Vec<Pose> = hybrid
        .trajectory
        .iter()
        .zip(&hybrid.sources)
        .filter(|(_, s)| **s == Source::Acoustic)
        .map(|(p, _)| *p)
        .collect();
    let n = poses.len();
    Ok(HybridTrack {
        trajectory: Trajectory::new(poses)?,
        sources: vec![Source::Acoustic; n],
        fixes_applied: hybrid.fixes_applied,
        fixes_lost: hybrid.fixes_lost,
    })
}

pub fn hybrid_header() -> String {
    format!("{TRAJECTORY_HEADER},source")
}

impl HybridTrack {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", hybrid_header())?;
        for (p, s) in self.trajectory.iter().zip(&self.sources) {
            writeln!(out, "{},{}", pose_row(p), s.as_str())?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self, CsvError> {
        let rows = read_rows(input, &hybrid_header())?;
        let mut poses = Vec::with_capacity(rows.len());
        let mut sources = Vec::with_capacity(rows.len());
        for row in &rows {
            expect_columns(row, 9)?;
            poses.push(crate::geometry::parse_pose(&row.fields[..8], row.line)?);
            sources.push(match row.fields[8].as_str() {
                "acoustic" => Source::Acoustic,
                "vio-fill" => Source::VioFill,
                other => {
                    return Err(CsvError::Parse {
                        line: row.line,
                        message: format!("unknown source `{other}`"),
                    })
                }
            });
        }
        let fixes_applied = sources.iter().filter(|s| **s == Source::Acoustic).count();
        let trajectory = Trajectory::new(poses).map_err(|e| CsvError::Invalid(e.to_string()))?;
        Ok(Self {
            trajectory,
            sources,
            fixes_applied,
            fixes_lost: 0,
        })
    }
}
