//! One directory per run. Every file is written with fixed field order and
//! fixed float formatting, so identical runs give identical bytes.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::{Counts, RunMetrics};
use super::pipeline::TrackerKind;
use super::HarnessError;
use crate::csvfmt::{self, expect_columns, read_rows, CsvError};
use crate::geometry::Trajectory;
use crate::hybrid_tracker::Source;
use crate::marker_tracker::Mode;
use crate::simworld::{Scenario, SensorStreams};
use crate::{Error, Result};

/// File names inside a run directory.
pub mod files {
    pub const SCENARIO: &str = "scenario.toml";
    pub const TRUTH: &str = "truth.csv";
    pub const IMU: &str = "imu.csv";
    pub const MARKERS: &str = "markers.csv";
    pub const ACOUSTIC: &str = "acoustic.csv";
    pub const DEPTH: &str = "depth.csv";
    pub const VIO: &str = "vio.csv";
    pub const ESTIMATE: &str = "estimate.csv";
    pub const SOURCES: &str = "sources.csv";
    pub const TRACK: &str = "track.json";
    pub const METRICS: &str = "metrics.json";
    pub const ERRORS: &str = "errors.csv";
    pub const TRAJECTORY_PLOT: &str = "trajectory.svg";
    pub const TIMESERIES_PLOT: &str = "timeseries.svg";
}

/// What produced `estimate.csv`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackInfo {
    pub tracker: TrackerKind,
    pub mode: Option<Mode>,
    pub counts: Counts,
}

#[derive(Clone, Debug, Default)]
pub struct RunLog {
    pub scenario: Option<Scenario>,
    pub truth: Option<Trajectory>,
    pub streams: SensorStreams,
    pub estimate: Option<Trajectory>,
    pub sources: Option<Vec<Source>>,
    pub track: Option<TrackInfo>,
    pub metrics: Option<RunMetrics>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn write_with(dir: &Path, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let path = dir.join(name);
    let mut out = create(&path)?;
    f(&mut out).and_then(|_| out.flush()).map_err(|e| Error::io(&path, e))
}

fn open(dir: &Path, name: &str) -> Result<Option<BufReader<File>>> {
    let path = dir.join(name);
    match File::open(&path) {
        Ok(f) => Ok(Some(BufReader::new(f))),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(Error::io(&path, e)),
    }
}

fn read_text(dir: &Path, name: &str) -> Result<Option<String>> {
    let path = dir.join(name);
    match std::fs::read_to_string(&path) {
        Ok(s) => Ok(Some(s)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(Error::io(&path, e)),
    }
}

/// Writes the scenario copy, truth and the five sensor streams.
pub fn write_streams(dir: &Path, scenario: &Scenario, truth: &Trajectory, streams: &SensorStreams) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_with(dir, files::SCENARIO, |w| w.write_all(scenario.to_toml().as_bytes()))?;
    write_with(dir, files::TRUTH, |w| truth.write_csv(w))?;
    write_with(dir, files::IMU, |w| streams.write_imu(w))?;
    write_with(dir, files::MARKERS, |w| streams.write_markers(w))?;
    write_with(dir, files::ACOUSTIC, |w| streams.write_acoustic(w))?;
    write_with(dir, files::DEPTH, |w| streams.write_depth(w))?;
    write_with(dir, files::VIO, |w| streams.write_vio(w))?;
    Ok(())
}

/// Writes a tracker output: the estimate, per-sample sources for hybrid
/// runs and the tracker bookkeeping.
pub fn write_estimate(dir: &Path, estimate: &Trajectory, sources: Option<&[Source]>, track: &TrackInfo) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_with(dir, files::ESTIMATE, |w| estimate.write_csv(w))?;
    match sources {
        Some(sources) => write_with(dir, files::SOURCES, |w| {
            writeln!(w, "t,source")?;
            for (p, s) in estimate.iter().zip(sources) {
                writeln!(w, "{},{}", csvfmt::float(p.t), s.as_str())?;
            }
            Ok(())
        })?,
        None => {
            let stale = dir.join(files::SOURCES);
            if stale.exists() {
                std::fs::remove_file(&stale).map_err(|e| Error::io(&stale, e))?;
            }
        }
    }
    let json = serde_json::to_string_pretty(track)?;
    write_with(dir, files::TRACK, |w| writeln!(w, "{json}"))
}

fn write_metrics(dir: &Path, metrics: &RunMetrics) -> Result<()> {
    let json = metrics.to_json();
    write_with(dir, files::METRICS, |w| writeln!(w, "{json}"))?;
    write_with(dir, files::ERRORS, |w| {
        writeln!(w, "t,position_error_m,orientation_error_deg")?;
        for s in &metrics.series {
            writeln!(w, "{}", csvfmt::join(&[s.t, s.position_m, s.orientation_deg]))?;
        }
        Ok(())
    })
}

/// Writes every populated part of `log` into `dir`.
pub fn write_run_log(dir: &Path, log: &RunLog) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    if let (Some(scenario), Some(truth)) = (&log.scenario, &log.truth) {
        write_streams(dir, scenario, truth, &log.streams)?;
    }
    if let Some(estimate) = &log.estimate {
        let track = log
            .track
            .ok_or_else(|| HarnessError::Invalid("estimate without tracker info".into()))?;
        write_estimate(dir, estimate, log.sources.as_deref(), &track)?;
    }
    if let Some(metrics) = &log.metrics {
        write_metrics(dir, metrics)?;
    }
    Ok(())
}

fn read_sources(dir: &Path) -> Result<Option<Vec<Source>>> {
    let Some(reader) = open(dir, files::SOURCES)? else {
        return Ok(None);
    };
    let rows = read_rows(reader, "t,source")?;
    rows.iter()
        .map(|row| {
            expect_columns(row, 2)?;
            match row.fields[1].as_str() {
                "acoustic" => Ok(Source::Acoustic),
                "vio-fill" => Ok(Source::VioFill),
                other => Err(CsvError::Parse {
                    line: row.line,
                    message: format!("unknown source `{other}`"),
                }),
            }
        })
        .collect::<std::result::Result<Vec<_>, _>>()
        .map(Some)
        .map_err(Error::from)
}

/// Reads whatever a run directory contains; missing stream files read as
/// empty streams, missing optional files as `None`.
pub fn read_run_log(dir: &Path) -> Result<RunLog> {
    if !dir.is_dir() {
        return Err(Error::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "run directory not found"),
        ));
    }
    let scenario = read_text(dir, files::SCENARIO)?
        .map(|text| Scenario::from_toml(&text))
        .transpose()?;
    let truth = open(dir, files::TRUTH)?.map(Trajectory::read_csv).transpose()?;
    let mut streams = SensorStreams::default();
    if let Some(r) = open(dir, files::IMU)? {
        streams.imu = SensorStreams::read_imu(r)?;
    }
    if let Some(r) = open(dir, files::MARKERS)? {
        streams.markers = SensorStreams::read_markers(r)?;
    }
    if let Some(r) = open(dir, files::ACOUSTIC)? {
        streams.acoustic = SensorStreams::read_acoustic(r)?;
    }
    if let Some(r) = open(dir, files::DEPTH)? {
        streams.depth = SensorStreams::read_depth(r)?;
    }
    if let Some(r) = open(dir, files::VIO)? {
        streams.vio = SensorStreams::read_vio(r)?;
    }
    let estimate = open(dir, files::ESTIMATE)?.map(Trajectory::read_csv).transpose()?;
    let sources = read_sources(dir)?;
    let track = read_text(dir, files::TRACK)?
        .map(|t| serde_json::from_str::<TrackInfo>(&t))
        .transpose()?;
    let metrics = read_text(dir, files::METRICS)?
        .map(|t| RunMetrics::from_json(&t))
        .transpose()?;
    Ok(RunLog {
        scenario,
        truth,
        streams,
        estimate,
        sources,
        track,
        metrics,
    })
}
