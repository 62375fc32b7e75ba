//! Deterministic CSV and SVG export of configuration-curve families.
//!
//! The multi-curve CSV schema is `curve,t,x,y,theta`: one row per
//! sample, curves identified by the id column and kept in order of
//! first appearance. Values carry 17 significant digits, so parsing a
//! file back recovers every `f64` bit-exactly — rendering the parsed
//! curves reproduces the original SVG byte for byte.
//!
//! SVG output is a fixed 600×600 viewBox with one polyline per curve
//! and a legend keyed by curve id. Everything in the file is a pure
//! function of the curve data and the axis selection: no timestamps, no
//! randomness, no environment.

use crate::solver::format_g17;
use crate::symmetry::OrbitCurve;
use crate::solver::Trajectory;
use std::fmt::Write as _;
use std::io::{Read, Write};
use thiserror::Error;

/// Header of the multi-curve CSV format.
pub const CURVE_CSV_HEADER: &str = "curve,t,x,y,theta";

/// Side length of the SVG viewBox in user units.
pub const SVG_SIZE: u32 = 600;

/// Coordinate names, indexable by chart position.
pub const COORD_NAMES: [&str; 3] = ["x", "y", "theta"];

/// Stroke colors, cycled when a family has more curves than entries.
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
    "#17becf", "#7f7f7f",
];

const MARGIN_LEFT: f64 = 62.0;
const MARGIN_RIGHT: f64 = 22.0;
const MARGIN_TOP: f64 = 42.0;
const MARGIN_BOTTOM: f64 = 52.0;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("curve `{label}`: {times} times but {points} points")]
    LengthMismatch {
        label: String,
        times: usize,
        points: usize,
    },
    #[error("no curves to export")]
    Empty,
    #[error("bad multi-curve CSV header: expected `{expected}`, got `{got}`")]
    BadHeader { expected: String, got: String },
    #[error("CSV error: {0}")]
    Csv(String),
}

/// One labelled configuration curve: samples `(t, (x, y, θ))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub times: Vec<f64>,
    pub points: Vec<[f64; 3]>,
}

impl Curve {
    pub fn new(
        label: impl Into<String>,
        times: Vec<f64>,
        points: Vec<[f64; 3]>,
    ) -> Result<Self, PlotError> {
        let label = label.into();
        if times.len() != points.len() {
            return Err(PlotError::LengthMismatch {
                label,
                times: times.len(),
                points: points.len(),
            });
        }
        Ok(Self {
            label,
            times,
            points,
        })
    }

    /// Projects an integrated extremal down to its configuration part.
    pub fn from_trajectory(traj: &Trajectory, label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            times: traj.times.clone(),
            points: traj.states.iter().map(|s| [s.x, s.y, s.theta]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Labels each transformed curve of an orbit family `s=<value>` and
/// pairs it with the parameter samples of the base curve.
pub fn curves_from_orbits(
    orbits: &[OrbitCurve],
    times: &[f64],
) -> Result<Vec<Curve>, PlotError> {
    orbits
        .iter()
        .map(|o| {
            let points = o
                .points
                .iter()
                .map(|p| [p[0], p[1], p[2]])
                .collect::<Vec<_>>();
            Curve::new(format!("s={}", o.s), times.to_vec(), points)
        })
        .collect()
}

/// Writes a curve family as multi-curve CSV (17 significant digits).
pub fn write_curves_csv<W: Write>(curves: &[Curve], out: W) -> Result<(), PlotError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CURVE_CSV_HEADER.split(','))
        .map_err(|e| PlotError::Csv(e.to_string()))?;
    for c in curves {
        for (t, p) in c.times.iter().zip(&c.points) {
            let rec = [
                c.label.clone(),
                format_g17(*t),
                format_g17(p[0]),
                format_g17(p[1]),
                format_g17(p[2]),
            ];
            w.write_record(&rec)
                .map_err(|e| PlotError::Csv(e.to_string()))?;
        }
    }
    w.flush().map_err(|e| PlotError::Csv(e.to_string()))?;
    Ok(())
}

pub fn curves_to_csv_string(curves: &[Curve]) -> String {
    let mut buf = Vec::new();
    write_curves_csv(curves, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}

/// Parses a family written by [`write_curves_csv`]. Rows are grouped by
/// the id column; curve order follows first appearance.
pub fn curves_from_csv<R: Read>(input: R) -> Result<Vec<Curve>, PlotError> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(|e| PlotError::Csv(e.to_string()))?;
    let got: Vec<&str> = headers.iter().collect();
    let expected: Vec<&str> = CURVE_CSV_HEADER.split(',').collect();
    if got != expected {
        return Err(PlotError::BadHeader {
            expected: CURVE_CSV_HEADER.into(),
            got: got.join(","),
        });
    }
    let mut curves: Vec<Curve> = Vec::new();
    let mut index: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| PlotError::Csv(e.to_string()))?;
        if rec.len() != 5 {
            return Err(PlotError::Csv(format!("row has {} fields", rec.len())));
        }
        let label = rec[0].to_string();
        let vals: Result<Vec<f64>, _> = (1..5).map(|i| rec[i].parse::<f64>()).collect();
        let vals = vals.map_err(|e| PlotError::Csv(e.to_string()))?;
        let i = *index.entry(label.clone()).or_insert_with(|| {
            curves.push(Curve {
                label,
                times: Vec::new(),
                points: Vec::new(),
            });
            curves.len() - 1
        });
        curves[i].times.push(vals[0]);
        curves[i].points.push([vals[1], vals[2], vals[3]]);
    }
    if curves.is_empty() {
        return Err(PlotError::Empty);
    }
    Ok(curves)
}

pub fn curves_from_csv_str(text: &str) -> Result<Vec<Curve>, PlotError> {
    curves_from_csv(text.as_bytes())
}

fn finite_bounds(curves: &[Curve], axis: usize) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for c in curves {
        for p in &c.points {
            let v = p[axis];
            if v.is_finite() {
                min = min.min(v);
                max = max.max(v);
            }
        }
    }
    if !min.is_finite() {
        return (-1.0, 1.0);
    }
    let range = max - min;
    // Degenerate ranges get a symmetric unit pad so a constant curve
    // still lands mid-plot.
    let pad = if range < 1e-12 { 0.5 } else { 0.05 * range };
    (min - pad, max + pad)
}

fn fmt_px(v: f64) -> String {
    format!("{v:.2}")
}

fn fmt_tick(v: f64) -> String {
    format!("{v:.3}")
}

/// Renders a curve family as a standalone SVG line plot, projecting
/// each configuration point onto the chosen coordinate pair
/// (chart indices; `(0, 1)` plots the contact point path in the plane).
pub fn render_svg(curves: &[Curve], axes: (usize, usize), title: &str) -> String {
    assert!(axes.0 < 3 && axes.1 < 3, "axis index out of range");
    let (hmin, hmax) = finite_bounds(curves, axes.0);
    let (vmin, vmax) = finite_bounds(curves, axes.1);
    let size = f64::from(SVG_SIZE);
    let plot_w = size - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = size - MARGIN_TOP - MARGIN_BOTTOM;
    let to_px = |h: f64, v: f64| -> (f64, f64) {
        (
            MARGIN_LEFT + (h - hmin) / (hmax - hmin) * plot_w,
            MARGIN_TOP + plot_h - (v - vmin) / (vmax - vmin) * plot_h,
        )
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {SVG_SIZE} {SVG_SIZE}\" \
         width=\"{SVG_SIZE}\" height=\"{SVG_SIZE}\">"
    );
    let _ = writeln!(s, "<rect width=\"{SVG_SIZE}\" height=\"{SVG_SIZE}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" \
         stroke=\"#333333\" stroke-width=\"1\"/>",
        fmt_px(MARGIN_LEFT),
        fmt_px(MARGIN_TOP),
        fmt_px(plot_w),
        fmt_px(plot_h)
    );
    if !title.is_empty() {
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"26\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"15\" fill=\"#111111\">{}</text>",
            fmt_px(size / 2.0),
            escape_text(title)
        );
    }

    // Axis names and extreme tick labels.
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"13\" fill=\"#111111\">{}</text>",
        fmt_px(MARGIN_LEFT + plot_w / 2.0),
        fmt_px(size - 14.0),
        COORD_NAMES[axes.0]
    );
    let _ = writeln!(
        s,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"13\" fill=\"#111111\" transform=\"rotate(-90 16 {})\">{}</text>",
        fmt_px(MARGIN_TOP + plot_h / 2.0),
        fmt_px(MARGIN_TOP + plot_h / 2.0),
        COORD_NAMES[axes.1]
    );
    let ticks = [
        (MARGIN_LEFT, size - 32.0, "start", fmt_tick(hmin)),
        (MARGIN_LEFT + plot_w, size - 32.0, "end", fmt_tick(hmax)),
    ];
    for (x, y, anchor, label) in ticks {
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"{anchor}\" font-family=\"sans-serif\" \
             font-size=\"11\" fill=\"#444444\">{label}</text>",
            fmt_px(x),
            fmt_px(y)
        );
    }
    let vticks = [
        (MARGIN_TOP + plot_h, fmt_tick(vmin)),
        (MARGIN_TOP, fmt_tick(vmax)),
    ];
    for (y, label) in vticks {
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"sans-serif\" \
             font-size=\"11\" fill=\"#444444\">{label}</text>",
            fmt_px(MARGIN_LEFT - 6.0),
            fmt_px(y + 4.0)
        );
    }

    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut pts = String::new();
        for p in &c.points {
            let (h, v) = (p[axes.0], p[axes.1]);
            if !h.is_finite() || !v.is_finite() {
                continue;
            }
            let (px, py) = to_px(h, v);
            if !pts.is_empty() {
                pts.push(' ');
            }
            let _ = write!(pts, "{},{}", fmt_px(px), fmt_px(py));
        }
        let _ = writeln!(
            s,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{pts}\"/>"
        );
    }

    // Legend, top-left inside the plot area.
    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = MARGIN_TOP + 16.0 + 16.0 * i as f64;
        let _ = writeln!(
            s,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" stroke-width=\"2\"/>",
            fmt_px(MARGIN_LEFT + 8.0),
            fmt_px(y - 4.0),
            fmt_px(MARGIN_LEFT + 30.0),
            fmt_px(y - 4.0)
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" \
             fill=\"#111111\">{}</text>",
            fmt_px(MARGIN_LEFT + 36.0),
            fmt_px(y),
            escape_text(&c.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape_text(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
