use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::geometry::{quat_error, Trajectory};

/// Minimum overlap between estimate and truth for a meaningful evaluation.
pub const MIN_OVERLAP_SECONDS: f64 = 1.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub mean: f64,
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
    pub max: f64,
}

impl ErrorStats {
    pub fn from_values(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self {
            mean: values.iter().sum::<f64>() / values.len() as f64,
            p50: percentile(&sorted, 50.0),
            p90: percentile(&sorted, 90.0),
            p99: percentile(&sorted, 99.0),
            max: sorted[sorted.len() - 1],
        }
    }
}

/// Nearest-rank percentile of an ascending slice.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorSample {
    pub t: f64,
    pub position_m: f64,
    pub orientation_deg: f64,
}

/// Tracker bookkeeping carried alongside the error statistics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub updates_accepted: usize,
    pub updates_rejected: usize,
    pub reinitializations: usize,
    pub fixes_delivered: usize,
    pub fixes_lost: usize,
}

/// Error at re-anchoring instants against error halfway between them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ContinuityStats {
    pub gaps: usize,
    pub mean_error_at_fixes_m: f64,
    pub mean_error_at_gap_midpoints_m: f64,
    pub max_error_at_gap_midpoints_m: f64,
    /// Largest position jump between the sample before a fix and the fix.
    pub max_reset_jump_m: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub frames: usize,
    pub start_time: f64,
    pub end_time: f64,
    pub position_error_mm: ErrorStats,
    pub orientation_error_deg: ErrorStats,
    pub max_interframe_displacement_m: f64,
    pub effective_rate_hz: f64,
    pub counts: Option<Counts>,
    pub continuity: Option<ContinuityStats>,
    pub series: Vec<ErrorSample>,
}

/// Largest distance between consecutive estimate positions.
pub fn max_interframe_displacement(est: &Trajectory) -> f64 {
    est.samples()
        .windows(2)
        .map(|w| (w[1].position - w[0].position).norm())
        .fold(0.0, f64::max)
}

/// Compares an estimate with truth over their common time span; truth is
/// interpolated at each estimate timestamp.
pub fn evaluate(est: &Trajectory, truth: &Trajectory) -> Result<RunMetrics, HarnessError> {
    let start = est.start_time().max(truth.start_time());
    let end = est.end_time().min(truth.end_time());
    if end - start < MIN_OVERLAP_SECONDS {
        return Err(HarnessError::DisjointSpans {
            overlap: (end - start).max(0.0),
            required: MIN_OVERLAP_SECONDS,
        });
    }
    let in_span: Vec<_> = est.iter().filter(|p| p.t >= start && p.t <= end).copied().collect();
    let series: Vec<ErrorSample> = in_span
        .iter()
        .map(|p| {
            let reference = truth.sample_at(p.t).expect("time within truth span");
            ErrorSample {
                t: p.t,
                position_m: (p.position - reference.position).norm(),
                orientation_deg: quat_error(&p.orientation, &reference.orientation).to_degrees(),
            }
        })
        .collect();
    let pos_mm: Vec<f64> = series.iter().map(|s| s.position_m * 1000.0).collect();
    let ori: Vec<f64> = series.iter().map(|s| s.orientation_deg).collect();
    let span = in_span[in_span.len() - 1].t - in_span[0].t;
    let effective_rate_hz = if span > 0.0 {
        (in_span.len() - 1) as f64 / span
    } else {
        0.0
    };
    let max_step = in_span
        .windows(2)
        .map(|w| (w[1].position - w[0].position).norm())
        .fold(0.0, f64::max);
    Ok(RunMetrics {
        frames: series.len(),
        start_time: start,
        end_time: end,
        position_error_mm: ErrorStats::from_values(&pos_mm),
        orientation_error_deg: ErrorStats::from_values(&ori),
        max_interframe_displacement_m: max_step,
        effective_rate_hz,
        counts: None,
        continuity: None,
        series,
    })
}

impl RunMetrics {
    pub fn with_counts(mut self, counts: Counts) -> Self {
        self.counts = Some(counts);
        self
    }

    /// Adds continuity statistics given the indices of re-anchoring samples
    /// in `est` (the trajectory this report was computed from).
    pub fn with_continuity(mut self, est: &Trajectory, anchor_indices: &[usize]) -> Self {
        let error_at = |t: f64| {
            self.series
                .binary_search_by(|s| s.t.total_cmp(&t))
                .ok()
                .map(|i| self.series[i].position_m)
        };
        let samples = est.samples();
        let at_fixes: Vec<f64> = anchor_indices.iter().filter_map(|&i| error_at(samples[i].t)).collect();
        let midpoints: Vec<f64> = anchor_indices
            .windows(2)
            .filter_map(|w| error_at(samples[(w[0] + w[1]) / 2].t))
            .collect();
        let max_reset_jump_m = anchor_indices
            .iter()
            .filter(|&&i| i > 0)
            .map(|&i| (samples[i].position - samples[i - 1].position).norm())
            .fold(0.0, f64::max);
        let mean = |v: &[f64]| {
            if v.is_empty() {
                0.0
            } else {
                v.iter().sum::<f64>() / v.len() as f64
            }
        };
        self.continuity = Some(ContinuityStats {
            gaps: midpoints.len(),
            mean_error_at_fixes_m: mean(&at_fixes),
            mean_error_at_gap_midpoints_m: mean(&midpoints),
            max_error_at_gap_midpoints_m: midpoints.iter().copied().fold(0.0, f64::max),
            max_reset_jump_m,
        });
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Headline numbers without the per-frame series.
    pub fn summary_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("metrics serialize");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("series");
        }
        v
    }
}
