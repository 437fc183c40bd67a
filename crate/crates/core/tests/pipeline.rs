use divetrack::harness::{files, finish_run, read_run_log, run_tracker, write_estimate, write_streams, TrackerKind};
use divetrack::marker_tracker::Mode;
use divetrack::simworld::{baiae_square, marker_lab, simulate, Course, Scenario};

fn one_lap() -> Scenario {
    let mut s = baiae_square();
    if let Course::Quadrilateral(c) = &mut s.course {
        c.laps = 1;
    }
    s
}

fn short_lab(seconds: f64) -> Scenario {
    let mut s = marker_lab();
    if let Course::Survey(c) = &mut s.course {
        c.duration = seconds;
    }
    s
}

#[test]
fn hybrid_run_through_a_directory() {
    let scenario = one_lap();
    let sim = simulate(&scenario).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_streams(dir.path(), &sim.scenario, &sim.truth, &sim.streams).unwrap();

    let log = read_run_log(dir.path()).unwrap();
    let out = run_tracker(&scenario, &log.streams, TrackerKind::Hybrid, Mode::Fused).unwrap();
    let delivered = sim.streams.acoustic.iter().filter(|f| f.delivered).count();
    assert_eq!(out.info.counts.fixes_delivered, delivered);
    assert_eq!(out.info.counts.fixes_lost, sim.streams.acoustic.len() - delivered);
    let first_fix = sim.streams.acoustic.iter().find(|f| f.delivered).unwrap().t;
    assert!(out.trajectory.start_time() >= first_fix - 1e-9);
    write_estimate(dir.path(), &out.trajectory, out.sources.as_deref(), &out.info).unwrap();

    let mut log = read_run_log(dir.path()).unwrap();
    let metrics = finish_run(dir.path(), &mut log).unwrap();
    assert!(metrics.continuity.is_some());
    assert_eq!(metrics.counts.map(|c| c.fixes_delivered), Some(delivered));
    assert!(metrics.effective_rate_hz > 50.0, "{}", metrics.effective_rate_hz);
    for name in [
        files::METRICS,
        files::ERRORS,
        files::TRAJECTORY_PLOT,
        files::TIMESERIES_PLOT,
        files::SOURCES,
    ] {
        assert!(dir.path().join(name).is_file(), "{name}");
    }
    let back = read_run_log(dir.path()).unwrap();
    assert_eq!(back.metrics.as_ref(), Some(&metrics));
    assert_eq!(back.estimate.as_ref().map(|e| e.len()), Some(out.trajectory.len()));
    assert_eq!(back.sources.as_deref(), out.sources.as_deref());
}

#[test]
fn acoustic_only_is_sparser_than_gap_filled() {
    let scenario = one_lap();
    let sim = simulate(&scenario).unwrap();
    let raw = run_tracker(&scenario, &sim.streams, TrackerKind::Hybrid, Mode::Raw).unwrap();
    let fused = run_tracker(&scenario, &sim.streams, TrackerKind::Hybrid, Mode::Fused).unwrap();
    assert_eq!(raw.trajectory.len(), raw.info.counts.fixes_delivered);
    assert!(fused.trajectory.len() > 100 * raw.trajectory.len());
}

#[test]
fn estimate_rewrites_identically() {
    let scenario = short_lab(10.0);
    let sim = simulate(&scenario).unwrap();
    let out = run_tracker(&scenario, &sim.streams, TrackerKind::Marker, Mode::Fused).unwrap();
    let a = tempfile::tempdir().unwrap();
    write_estimate(a.path(), &out.trajectory, None, &out.info).unwrap();
    let log = read_run_log(a.path()).unwrap();
    let b = tempfile::tempdir().unwrap();
    write_estimate(
        b.path(),
        log.estimate.as_ref().unwrap(),
        None,
        log.track.as_ref().unwrap(),
    )
    .unwrap();
    for name in [files::ESTIMATE, files::TRACK] {
        assert_eq!(
            std::fs::read(a.path().join(name)).unwrap(),
            std::fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn marker_fusion_beats_raw_detections() {
    let scenario = short_lab(20.0);
    let sim = simulate(&scenario).unwrap();
    let mut mean_mm = Vec::new();
    for mode in [Mode::Raw, Mode::Fused] {
        let out = run_tracker(&scenario, &sim.streams, TrackerKind::Marker, mode).unwrap();
        let m = divetrack::harness::evaluate(&out.trajectory, &sim.truth).unwrap();
        mean_mm.push(m.position_error_mm.mean);
    }
    assert!(mean_mm[1] < mean_mm[0], "fused {} vs raw {}", mean_mm[1], mean_mm[0]);
}

#[test]
fn marker_tracker_needs_a_grid() {
    let scenario = one_lap();
    let sim = simulate(&scenario).unwrap();
    let err = run_tracker(&scenario, &sim.streams, TrackerKind::Marker, Mode::Raw).unwrap_err();
    assert_eq!(err.kind(), "evaluation");
}
