//! Evaluation against truth, run directories, SVG plots and the end-to-end
//! pipelines behind the command-line tool.

mod metrics;
mod pipeline;
mod plot;
mod runlog;

pub use metrics::{
    evaluate, max_interframe_displacement, percentile, ContinuityStats, Counts, ErrorSample, ErrorStats, RunMetrics,
};
pub use pipeline::{
    calibrate_imu, cd_timeseries_plot, evaluate_run, filter_params_for, finish_run, marker_seed,
    reproduce_baiae_square, reproduce_marker_lab, run_tracker, static_imu_log, trajectory_plot, BaiaeReport,
    MarkerLabReport, SeedResult, TrackOutput, TrackerKind, CALIBRATION_SECONDS,
};
pub use plot::{colormap, plot_timeseries, plot_trajectory, segment_window, PlotExtras, Series, SeriesStyle};
pub use runlog::{files, read_run_log, write_estimate, write_run_log, write_streams, RunLog, TrackInfo};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("estimate and truth overlap for {overlap} s, need at least {required} s")]
    DisjointSpans { overlap: f64, required: f64 },
    #[error("nothing to plot: {0}")]
    EmptyPlot(&'static str),
    #[error("run directory is missing `{0}`")]
    MissingFile(String),
    #[error("{0}")]
    Invalid(String),
}
