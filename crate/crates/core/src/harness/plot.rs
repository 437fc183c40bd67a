//! Self-contained SVG plots, written by hand.

use std::fmt::Write as _;

use nalgebra::Vector2;

use super::HarnessError;
use crate::geometry::Trajectory;
use crate::simworld::AcousticFix;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 640.0;
const MARGIN: f64 = 60.0;
const LEGEND_HEIGHT: f64 = 70.0;

/// Optional layers of the top-down plot.
#[derive(Clone, Debug, Default)]
pub struct PlotExtras {
    /// Delivered acoustic fixes, drawn as time-colored points.
    pub fixes: Vec<AcousticFix>,
    /// Draw a line between consecutive fixes.
    pub connect_fixes: bool,
    /// Labeled reference points such as course vertices.
    pub landmarks: Vec<(String, Vector2<f64>)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesStyle {
    Line,
    Points,
}

#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub style: SeriesStyle,
}

/// Maps data coordinates into the plot area, preserving aspect ratio when
/// asked to.
struct Frame {
    min: Vector2<f64>,
    scale: Vector2<f64>,
    top: f64,
    bottom: f64,
}

impl Frame {
    fn new(points: impl Iterator<Item = Vector2<f64>>, equal_aspect: bool) -> Self {
        let mut min = Vector2::repeat(f64::INFINITY);
        let mut max = Vector2::repeat(f64::NEG_INFINITY);
        for p in points {
            min = min.inf(&p);
            max = max.sup(&p);
        }
        let mut span = max - min;
        for i in 0..2 {
            if span[i] <= 0.0 {
                min[i] -= 0.5;
                span[i] = 1.0;
            }
        }
        min -= span * 0.03;
        span *= 1.06;
        let top = MARGIN;
        let bottom = HEIGHT - MARGIN - LEGEND_HEIGHT;
        let avail = Vector2::new(WIDTH - 2.0 * MARGIN, bottom - top);
        let mut scale = avail.component_div(&span);
        if equal_aspect {
            let s = scale.x.min(scale.y);
            scale = Vector2::repeat(s);
        }
        Self {
            min,
            scale,
            top,
            bottom,
        }
    }

    fn map(&self, p: Vector2<f64>) -> (f64, f64) {
        let d = (p - self.min).component_mul(&self.scale);
        (MARGIN + d.x, self.bottom - d.y)
    }

    fn unmap_x(&self, px: f64) -> f64 {
        self.min.x + (px - MARGIN) / self.scale.x
    }

    fn unmap_y(&self, py: f64) -> f64 {
        self.min.y + (self.bottom - py) / self.scale.y
    }
}

fn polyline(points: impl Iterator<Item = (f64, f64)>) -> String {
    let mut s = String::new();
    for (i, (x, y)) in points.enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{x:.2},{y:.2}");
    }
    s
}

/// Viridis-like ramp from violet (0) to yellow (1).
pub fn colormap(u: f64) -> String {
    const STOPS: [(f64, f64, f64); 5] = [
        (68.0, 1.0, 84.0),
        (59.0, 82.0, 139.0),
        (33.0, 145.0, 140.0),
        (94.0, 201.0, 98.0),
        (253.0, 231.0, 37.0),
    ];
    let u = u.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (u.floor() as usize).min(STOPS.len() - 2);
    let f = u - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let mix = |x: f64, y: f64| (x + (y - x) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{x}\" y=\"30\" text-anchor=\"middle\" font-size=\"16\">{title}</text>\n",
        x = WIDTH / 2.0,
        title = escape(title)
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(svg: &mut String, frame: &Frame, xlabel: &str, ylabel: &str) {
    let right = WIDTH - MARGIN;
    let _ = writeln!(
        svg,
        "<g id=\"axes\" stroke=\"#444\" fill=\"none\"><rect x=\"{MARGIN}\" y=\"{}\" width=\"{}\" height=\"{}\"/></g>",
        frame.top,
        right - MARGIN,
        frame.bottom - frame.top
    );
    let _ = writeln!(svg, "<g id=\"ticks\" fill=\"#444\">");
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let px = MARGIN + f * (right - MARGIN);
        let py = frame.bottom - f * (frame.bottom - frame.top);
        let _ = writeln!(
            svg,
            "<text x=\"{px:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{:.1}</text>",
            frame.bottom + 16.0,
            frame.unmap_x(px)
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{py:.1}\" text-anchor=\"end\">{:.1}</text>",
            MARGIN - 6.0,
            frame.unmap_y(py)
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
        WIDTH / 2.0,
        frame.bottom + 34.0,
        escape(xlabel)
    );
    let _ = writeln!(
        svg,
        "<text x=\"16\" y=\"{:.1}\" transform=\"rotate(-90 16 {:.1})\" text-anchor=\"middle\">{}</text>",
        (frame.top + frame.bottom) / 2.0,
        (frame.top + frame.bottom) / 2.0,
        escape(ylabel)
    );
    let _ = writeln!(svg, "</g>");
}

fn legend_entry(svg: &mut String, slot: usize, swatch: &str, label: &str) {
    let x = MARGIN + 190.0 * (slot % 4) as f64;
    let y = HEIGHT - LEGEND_HEIGHT + 10.0 + 20.0 * (slot / 4) as f64;
    let _ = writeln!(
        svg,
        "<g transform=\"translate({x:.1} {y:.1})\">{swatch}<text x=\"34\" y=\"4\">{}</text></g>",
        escape(label)
    );
}

/// Top-down xy view: truth dashed, estimate solid, acoustic fixes colored
/// by time.
pub fn plot_trajectory(est: &Trajectory, truth: &Trajectory, extras: &PlotExtras) -> Result<String, HarnessError> {
    if est.is_empty() || truth.is_empty() {
        return Err(HarnessError::EmptyPlot("trajectory"));
    }
    let fixes: Vec<&AcousticFix> = extras.fixes.iter().filter(|f| f.delivered).collect();
    let frame = Frame::new(
        truth
            .iter()
            .chain(est.iter())
            .map(|p| p.position.xy())
            .chain(fixes.iter().map(|f| Vector2::new(f.x, f.y)))
            .chain(extras.landmarks.iter().map(|(_, p)| *p)),
        true,
    );
    let mut svg = header("Top-down trajectory");
    axes(&mut svg, &frame, "x (east), m", "y (north), m");

    let _ = writeln!(
        svg,
        "<g id=\"truth\"><polyline fill=\"none\" stroke=\"#222\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\" points=\"{}\"/></g>",
        polyline(truth.iter().map(|p| frame.map(p.position.xy())))
    );
    let _ = writeln!(
        svg,
        "<g id=\"estimate\"><polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.2\" points=\"{}\"/></g>",
        polyline(est.iter().map(|p| frame.map(p.position.xy())))
    );
    legend_entry(
        &mut svg,
        0,
        "<line x1=\"0\" y1=\"0\" x2=\"28\" y2=\"0\" stroke=\"#222\" stroke-dasharray=\"6 4\"/>",
        "ground truth",
    );
    legend_entry(
        &mut svg,
        1,
        "<line x1=\"0\" y1=\"0\" x2=\"28\" y2=\"0\" stroke=\"#d62728\"/>",
        "estimate",
    );

    let mut slot = 2;
    if extras.connect_fixes && fixes.len() > 1 {
        let _ = writeln!(
            svg,
            "<g id=\"fix-connectors\"><polyline fill=\"none\" stroke=\"#888\" stroke-width=\"0.8\" points=\"{}\"/></g>",
            polyline(fixes.iter().map(|f| frame.map(Vector2::new(f.x, f.y))))
        );
        legend_entry(
            &mut svg,
            slot,
            "<line x1=\"0\" y1=\"0\" x2=\"28\" y2=\"0\" stroke=\"#888\"/>",
            "fix to fix",
        );
        slot += 1;
    }
    if !fixes.is_empty() {
        let t0 = fixes[0].t;
        let t1 = fixes[fixes.len() - 1].t;
        let span = (t1 - t0).max(f64::MIN_POSITIVE);
        let _ = writeln!(svg, "<g id=\"acoustic-fixes\">");
        for f in &fixes {
            let (x, y) = frame.map(Vector2::new(f.x, f.y));
            let _ = writeln!(
                svg,
                "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"{}\"/>",
                colormap((f.t - t0) / span)
            );
        }
        let _ = writeln!(svg, "</g>");
        let ramp: String = (0..=4)
            .map(|i| {
                format!(
                    "<rect x=\"{}\" y=\"-5\" width=\"6\" height=\"10\" fill=\"{}\"/>",
                    i * 6,
                    colormap(i as f64 / 4.0)
                )
            })
            .collect();
        // The ramp label is long; give it a row of its own.
        legend_entry(
            &mut svg,
            slot.div_ceil(4) * 4,
            &ramp,
            &format!("acoustic fix time: violet {t0:.0} s to yellow {t1:.0} s"),
        );
    }
    if !extras.landmarks.is_empty() {
        let _ = writeln!(svg, "<g id=\"landmarks\">");
        for (label, p) in &extras.landmarks {
            let (x, y) = frame.map(*p);
            let _ = writeln!(
                svg,
                "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"4\" fill=\"none\" stroke=\"#222\"/><text x=\"{:.2}\" y=\"{:.2}\">{}</text>",
                x + 6.0,
                y - 6.0,
                escape(label)
            );
        }
        let _ = writeln!(svg, "</g>");
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

const SERIES_COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#222222"];

/// Value-against-time plot; one layer per series.
pub fn plot_timeseries(title: &str, ylabel: &str, series: &[Series]) -> Result<String, HarnessError> {
    if series.is_empty() || series.iter().all(|s| s.points.is_empty()) {
        return Err(HarnessError::EmptyPlot("time series"));
    }
    let frame = Frame::new(
        series
            .iter()
            .flat_map(|s| s.points.iter().map(|&(t, v)| Vector2::new(t, v))),
        false,
    );
    let mut svg = header(title);
    axes(&mut svg, &frame, "time, s", ylabel);
    for (i, s) in series.iter().enumerate() {
        let color = SERIES_COLORS[i % SERIES_COLORS.len()];
        let _ = write!(svg, "<g class=\"series\" data-label=\"{}\">", escape(&s.label));
        match s.style {
            SeriesStyle::Line => {
                let _ = write!(
                    svg,
                    "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.2\" points=\"{}\"/>",
                    polyline(s.points.iter().map(|&(t, v)| frame.map(Vector2::new(t, v))))
                );
                legend_entry(
                    &mut svg,
                    i,
                    &format!("<line x1=\"0\" y1=\"0\" x2=\"28\" y2=\"0\" stroke=\"{color}\"/>"),
                    &s.label,
                );
            }
            SeriesStyle::Points => {
                for &(t, v) in &s.points {
                    let (x, y) = frame.map(Vector2::new(t, v));
                    let _ = write!(svg, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"{color}\"/>");
                }
                legend_entry(
                    &mut svg,
                    i,
                    &format!("<circle cx=\"14\" cy=\"0\" r=\"3\" fill=\"{color}\"/>"),
                    &s.label,
                );
            }
        }
        svg.push_str("</g>\n");
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Index range of the first stretch of `traj` that runs along the segment
/// `a -> b` (within `tol` of it, excluding `tol` at either end).
pub fn segment_window(traj: &Trajectory, a: Vector2<f64>, b: Vector2<f64>, tol: f64) -> Option<std::ops::Range<usize>> {
    let ab = b - a;
    let len = ab.norm();
    if len <= 2.0 * tol {
        return None;
    }
    let dir = ab / len;
    let on = |p: Vector2<f64>| {
        let s = (p - a).dot(&dir);
        let off = (p - a - dir * s).norm();
        s > tol && s < len - tol && off < tol
    };
    let samples = traj.samples();
    let start = samples.iter().position(|p| on(p.position.xy()))?;
    let end = samples[start..]
        .iter()
        .position(|p| !on(p.position.xy()))
        .map_or(samples.len(), |n| start + n);
    Some(start..end)
}
