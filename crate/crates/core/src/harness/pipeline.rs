//! Scenario -> simulation -> tracking -> evaluation, as used by the CLI and
//! the reproduction commands.

use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::metrics::{evaluate, Counts, RunMetrics};
use super::plot::{plot_timeseries, plot_trajectory, segment_window, PlotExtras, Series, SeriesStyle};
use super::runlog::{files, write_run_log, RunLog, TrackInfo};
use super::HarnessError;
use crate::eskf::{estimate_static_noise, FilterParams, ImuSample, StaticCalibration};
use crate::geometry::{Pose, Quaternion, Trajectory};
use crate::hybrid_tracker::{run_acoustic_only, run_hybrid_tracking, Source};
use crate::marker_tracker::{run_marker_tracking, MarkerMap, Mode, TrackerConfig};
use crate::rng::stream_seed;
use crate::simworld::{self, simulate, synth_imu, Scenario, SensorStreams, GRAVITY};
use crate::{Error, Result};

/// Length of the static log used for IMU calibration.
pub const CALIBRATION_SECONDS: f64 = 60.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrackerKind {
    Marker,
    Hybrid,
}

impl std::str::FromStr for TrackerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "marker" => Ok(TrackerKind::Marker),
            "hybrid" => Ok(TrackerKind::Hybrid),
            other => Err(format!("unknown tracker `{other}` (expected marker or hybrid)")),
        }
    }
}

/// A level, motionless IMU recording with the scenario's IMU noise.
pub fn static_imu_log(scenario: &Scenario, seconds: f64) -> Vec<ImuSample> {
    let rate = scenario.sensors.imu_rate;
    let n = (seconds * rate).round() as usize;
    let poses = (0..=n + 1)
        .map(|k| Pose::new(k as f64 / rate, Vector3::zeros(), Quaternion::IDENTITY))
        .collect();
    let truth = Trajectory::new(poses).expect("increasing times");
    synth_imu(
        &truth,
        &scenario.sensors,
        &GRAVITY,
        stream_seed(scenario.seed, "static-calibration"),
    )
}

/// Bias and noise estimate from a 60 s static log before the dive.
pub fn calibrate_imu(scenario: &Scenario) -> Result<StaticCalibration> {
    Ok(estimate_static_noise(
        &static_imu_log(scenario, CALIBRATION_SECONDS),
        &GRAVITY,
    )?)
}

/// Filter settings from the scenario's nominal IMU specification,
/// refined by a static calibration when one is given.
pub fn filter_params_for(scenario: &Scenario, calibration: Option<&StaticCalibration>) -> FilterParams {
    let imu = &scenario.sensors.imu;
    let defaults = FilterParams::default();
    let mut params = FilterParams {
        gravity: GRAVITY,
        accel_noise: imu.accel_noise_density,
        gyro_noise: imu.gyro_noise_density,
        accel_bias_walk: imu.accel_bias_walk.max(defaults.accel_bias_walk),
        gyro_bias_walk: imu.gyro_bias_walk.max(defaults.gyro_bias_walk),
        max_measurement_lag: 1.0 / scenario.sensors.camera_rate + 1e-9,
        ..defaults
    };
    if let Some(c) = calibration {
        c.apply_to(&mut params);
    }
    params
}

#[derive(Clone, Debug)]
pub struct TrackOutput {
    pub trajectory: Trajectory,
    pub sources: Option<Vec<Source>>,
    pub info: TrackInfo,
}

/// Runs one tracker over recorded streams. The fused marker tracker is
/// seeded with a static IMU calibration. For the hybrid tracker `Raw`
/// means the acoustic fixes alone and `Fused` the VIO gap-filled track.
pub fn run_tracker(scenario: &Scenario, streams: &SensorStreams, kind: TrackerKind, mode: Mode) -> Result<TrackOutput> {
    match kind {
        TrackerKind::Marker => {
            let grid = scenario
                .marker_grid
                .as_ref()
                .ok_or_else(|| HarnessError::Invalid(format!("scenario `{}` has no marker grid", scenario.name)))?;
            let map = MarkerMap::from_grid(grid);
            let config = TrackerConfig::from_noise(&scenario.sensors.marker);
            let params = match mode {
                Mode::Fused => filter_params_for(scenario, Some(&calibrate_imu(scenario)?)),
                Mode::Raw => filter_params_for(scenario, None),
            };
            let track = run_marker_tracking(streams, &map, &params, &config, mode)?;
            Ok(TrackOutput {
                trajectory: track.trajectory,
                sources: None,
                info: TrackInfo {
                    tracker: kind,
                    mode: Some(mode),
                    counts: Counts {
                        updates_accepted: track.stats.updates_accepted,
                        updates_rejected: track.stats.updates_rejected,
                        reinitializations: track.stats.reinitializations,
                        ..Counts::default()
                    },
                },
            })
        }
        TrackerKind::Hybrid => {
            let track = match mode {
                Mode::Raw => run_acoustic_only(streams)?,
                Mode::Fused => run_hybrid_tracking(streams)?,
            };
            Ok(TrackOutput {
                trajectory: track.trajectory,
                sources: Some(track.sources),
                info: TrackInfo {
                    tracker: kind,
                    mode: Some(mode),
                    counts: Counts {
                        fixes_delivered: track.fixes_applied,
                        fixes_lost: track.fixes_lost,
                        ..Counts::default()
                    },
                },
            })
        }
    }
}

/// Evaluates the estimate of a run directory's contents against its truth.
pub fn evaluate_run(log: &RunLog) -> Result<RunMetrics> {
    let truth = log
        .truth
        .as_ref()
        .ok_or_else(|| HarnessError::MissingFile(files::TRUTH.into()))?;
    let est = log
        .estimate
        .as_ref()
        .ok_or_else(|| HarnessError::MissingFile(files::ESTIMATE.into()))?;
    let mut metrics = evaluate(est, truth)?;
    if let Some(track) = &log.track {
        metrics = metrics.with_counts(track.counts);
    }
    if let Some(sources) = &log.sources {
        if sources.len() != est.len() {
            return Err(HarnessError::Invalid("sources.csv does not match estimate.csv".into()).into());
        }
        let anchors: Vec<usize> = (0..sources.len()).filter(|&i| sources[i] == Source::Acoustic).collect();
        metrics = metrics.with_continuity(est, &anchors);
    }
    Ok(metrics)
}

/// Top-down plot of a run, with acoustic fixes and course vertices when
/// the scenario has them.
pub fn trajectory_plot(log: &RunLog) -> Result<String> {
    let truth = log
        .truth
        .as_ref()
        .ok_or_else(|| HarnessError::MissingFile(files::TRUTH.into()))?;
    let est = log
        .estimate
        .as_ref()
        .ok_or_else(|| HarnessError::MissingFile(files::ESTIMATE.into()))?;
    let mut extras = PlotExtras::default();
    if log.track.is_some_and(|t| t.tracker == TrackerKind::Hybrid) {
        extras.fixes = log.streams.acoustic.clone();
        extras.connect_fixes = true;
    }
    if let Some(vertices) = log.scenario.as_ref().map(|s| s.vertices()).transpose()?.flatten() {
        extras.landmarks = ["A", "B", "C", "D"]
            .into_iter()
            .zip(vertices.as_array())
            .map(|(l, p)| (l.to_string(), p))
            .collect();
    }
    Ok(plot_trajectory(est, truth, &extras)?)
}

/// Y coordinate along the first pass of side C->D: truth, hybrid estimate
/// and the acoustic fixes that fall in the same window.
pub fn cd_timeseries_plot(log: &RunLog) -> Result<Option<String>> {
    let (Some(scenario), Some(truth), Some(est)) = (&log.scenario, &log.truth, &log.estimate) else {
        return Ok(None);
    };
    let Some(v) = scenario.vertices()? else {
        return Ok(None);
    };
    let Some(window) = segment_window(truth, v.c, v.d, 2.0) else {
        return Ok(None);
    };
    let t0 = truth.samples()[window.start].t;
    let t1 = truth.samples()[window.end - 1].t;
    let inside = |t: f64| t >= t0 && t <= t1;
    let series = vec![
        Series {
            label: "truth".into(),
            points: truth
                .iter()
                .filter(|p| inside(p.t))
                .map(|p| (p.t, p.position.y))
                .collect(),
            style: SeriesStyle::Line,
        },
        Series {
            label: "hybrid estimate".into(),
            points: est
                .iter()
                .filter(|p| inside(p.t))
                .map(|p| (p.t, p.position.y))
                .collect(),
            style: SeriesStyle::Line,
        },
        Series {
            label: "acoustic fixes".into(),
            points: log
                .streams
                .acoustic
                .iter()
                .filter(|f| f.delivered && inside(f.t))
                .map(|f| (f.t, f.y))
                .collect(),
            style: SeriesStyle::Points,
        },
    ];
    Ok(Some(plot_timeseries(
        "Y coordinate along side CD",
        "y (north), m",
        &series,
    )?))
}

fn write_plots(dir: &Path, log: &RunLog) -> Result<()> {
    let write = |name: &str, text: &str| {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    };
    write(files::TRAJECTORY_PLOT, &trajectory_plot(log)?)?;
    if log.track.is_some_and(|t| t.tracker == TrackerKind::Hybrid) {
        if let Some(svg) = cd_timeseries_plot(log)? {
            write(files::TIMESERIES_PLOT, &svg)?;
        }
    }
    Ok(())
}

/// Writes metrics and plots for a run that already has an estimate.
pub fn finish_run(dir: &Path, log: &mut RunLog) -> Result<RunMetrics> {
    let metrics = evaluate_run(log)?;
    log.metrics = Some(metrics.clone());
    write_run_log(
        dir,
        &RunLog {
            metrics: Some(metrics.clone()),
            ..RunLog::default()
        },
    )?;
    write_plots(dir, log)?;
    Ok(metrics)
}

/// Headline numbers of one seed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub raw_position_mm: f64,
    pub raw_orientation_deg: f64,
    pub fused_position_mm: f64,
    pub fused_orientation_deg: f64,
    pub raw_max_step_m: f64,
    pub fused_max_step_m: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkerLabReport {
    pub seeds: Vec<SeedResult>,
    pub raw_position_mm: f64,
    pub raw_orientation_deg: f64,
    pub fused_position_mm: f64,
    pub fused_orientation_deg: f64,
}

/// Simulates, tracks in both modes and evaluates one marker scenario.
pub fn marker_seed(scenario: &Scenario) -> Result<(SeedResult, RunLog, RunLog)> {
    let sim = simulate(scenario)?;
    let mut logs = Vec::with_capacity(2);
    for mode in [Mode::Raw, Mode::Fused] {
        let out = run_tracker(scenario, &sim.streams, TrackerKind::Marker, mode)?;
        let mut log = RunLog {
            scenario: Some(sim.scenario.clone()),
            truth: Some(sim.truth.clone()),
            streams: sim.streams.clone(),
            estimate: Some(out.trajectory),
            sources: None,
            track: Some(out.info),
            metrics: None,
        };
        log.metrics = Some(evaluate_run(&log)?);
        logs.push(log);
    }
    let fused = logs.pop().expect("two modes");
    let raw = logs.pop().expect("two modes");
    let (r, f) = (raw.metrics.as_ref().unwrap(), fused.metrics.as_ref().unwrap());
    let result = SeedResult {
        seed: scenario.seed,
        raw_position_mm: r.position_error_mm.mean,
        raw_orientation_deg: r.orientation_error_deg.mean,
        fused_position_mm: f.position_error_mm.mean,
        fused_orientation_deg: f.orientation_error_deg.mean,
        raw_max_step_m: r.max_interframe_displacement_m,
        fused_max_step_m: f.max_interframe_displacement_m,
    };
    Ok((result, raw, fused))
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// The laboratory marker experiment over `seeds` consecutive seeds starting
/// at the scenario's own. With `out`, the first seed's raw and fused runs
/// are logged under `out/raw` and `out/fused` and the report is saved as
/// `out/report.json`.
pub fn reproduce_marker_lab(scenario: &Scenario, seeds: usize, out: Option<&Path>) -> Result<MarkerLabReport> {
    let scenarios: Vec<Scenario> = (0..seeds as u64)
        .map(|i| Scenario {
            seed: scenario.seed.wrapping_add(i),
            ..scenario.clone()
        })
        .collect();
    let runs: Vec<Result<(SeedResult, RunLog, RunLog)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = scenarios.iter().map(|s| scope.spawn(move || marker_seed(s))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("seed worker panicked"))
            .collect()
    });
    let mut results = Vec::with_capacity(seeds);
    for (i, run) in runs.into_iter().enumerate() {
        let (result, mut raw, mut fused) = run?;
        if i == 0 {
            if let Some(out) = out {
                for (name, log) in [("raw", &mut raw), ("fused", &mut fused)] {
                    let dir = out.join(name);
                    write_run_log(&dir, log)?;
                    write_plots(&dir, log)?;
                }
            }
        }
        results.push(result);
    }
    let report = MarkerLabReport {
        raw_position_mm: mean(results.iter().map(|r| r.raw_position_mm)),
        raw_orientation_deg: mean(results.iter().map(|r| r.raw_orientation_deg)),
        fused_position_mm: mean(results.iter().map(|r| r.fused_position_mm)),
        fused_orientation_deg: mean(results.iter().map(|r| r.fused_orientation_deg)),
        seeds: results,
    };
    if let Some(out) = out {
        let path = out.join("report.json");
        std::fs::write(&path, serde_json::to_string_pretty(&report)? + "\n").map_err(|e| Error::io(&path, e))?;
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaiaeReport {
    pub duration_s: f64,
    pub acoustic_slots: usize,
    pub fixes_delivered: usize,
    pub delivered_rate_hz: f64,
    pub hybrid_rate_hz: f64,
    pub metrics: serde_json::Value,
}

/// The sea-trial square with the hybrid tracker. With `out`, the full run
/// directory (streams, estimate, metrics, plots) is written there.
pub fn reproduce_baiae_square(scenario: &Scenario, out: Option<&Path>) -> Result<(BaiaeReport, RunLog)> {
    let sim = simworld::simulate(scenario)?;
    let track = run_tracker(scenario, &sim.streams, TrackerKind::Hybrid, Mode::Fused)?;
    let mut log = RunLog {
        scenario: Some(sim.scenario.clone()),
        truth: Some(sim.truth.clone()),
        streams: sim.streams,
        estimate: Some(track.trajectory),
        sources: track.sources,
        track: Some(track.info),
        metrics: None,
    };
    let metrics = evaluate_run(&log)?;
    log.metrics = Some(metrics.clone());
    if let Some(out) = out {
        write_run_log(out, &log)?;
        write_plots(out, &log)?;
    }
    let duration_s = sim.truth.duration();
    let report = BaiaeReport {
        duration_s,
        acoustic_slots: log.streams.acoustic.len(),
        fixes_delivered: track.info.counts.fixes_delivered,
        delivered_rate_hz: track.info.counts.fixes_delivered as f64 / duration_s,
        hybrid_rate_hz: metrics.effective_rate_hz,
        metrics: metrics.summary_json(),
    };
    if let Some(out) = out {
        let path = out.join("report.json");
        std::fs::write(&path, serde_json::to_string_pretty(&report)? + "\n").map_err(|e| Error::io(&path, e))?;
    }
    Ok((report, log))
}
