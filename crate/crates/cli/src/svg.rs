//! Self-contained SVG 1.1 line plots and heatmaps.
//!
//! Output depends only on the input: fixed viewport, fixed palette and
//! coordinates printed with two decimals, so equal inputs give equal bytes.

use std::fmt::{self, Write};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 72.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 52.0;
const RIGHT_LINES: f64 = 24.0;
const RIGHT_HEATMAP: f64 = 96.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

/// Non-finite input, or input that cannot be placed on the axes.
#[derive(Clone, Debug, PartialEq)]
pub enum SvgError {
    /// `(series, sample)` for curves, `(row, column)` for heatmaps.
    NonFinite {
        indices: Vec<(usize, usize)>,
    },
    Shape(String),
}

impl fmt::Display for SvgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SvgError::NonFinite { indices } => {
                write!(f, "cannot plot non-finite or off-axis values at ")?;
                let shown: Vec<String> = indices.iter().take(20).map(|(a, b)| format!("({a}, {b})")).collect();
                write!(f, "{}", shown.join(", "))?;
                if indices.len() > 20 {
                    write!(f, " and {} more", indices.len() - 20)?;
                }
                Ok(())
            }
            SvgError::Shape(msg) => f.write_str(msg),
        }
    }
}

impl std::error::Error for SvgError {}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Axes {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
}

impl Axes {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Axes {
        Axes {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            ..Axes::default()
        }
    }

    pub fn log_log(mut self) -> Axes {
        self.log_x = true;
        self.log_y = true;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Palette index.
    pub color: usize,
    pub dashed: bool,
    pub width: f64,
}

impl Curve {
    pub fn new(label: &str, points: Vec<(f64, f64)>, color: usize) -> Curve {
        Curve {
            label: label.to_string(),
            points,
            color,
            dashed: false,
            width: 1.5,
        }
    }

    pub fn dashed(mut self) -> Curve {
        self.dashed = true;
        self
    }

    pub fn width(mut self, w: f64) -> Curve {
        self.width = w;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColorMap {
    /// Dark blue through green to yellow.
    Sequential,
    /// Blue below zero, white at zero, red above.
    Diverging,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Short tick label.
fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if !(1e-3..1e4).contains(&a) {
        let s = format!("{v:.0e}");
        return s.replace("e-0", "e-").replace("e0", "");
    }
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Linear or logarithmic map from data to `[0, 1]`.
#[derive(Clone, Copy, Debug)]
struct Scale {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Scale {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Scale {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if lo > hi {
            (lo, hi) = (0.0, 1.0);
        } else if lo == hi {
            (lo, hi) = (lo - 0.5, hi + 0.5);
        } else {
            let pad = 0.04 * (hi - lo);
            (lo, hi) = (lo - pad, hi + pad);
        }
        Scale { lo, hi, log }
    }

    fn unit(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    /// About five tick positions in data units.
    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let (a, b) = (self.lo.ceil() as i32, self.hi.floor() as i32);
            let stride = ((b - a) / 6 + 1).max(1);
            return (a..=b).step_by(stride as usize).map(|e| 10f64.powi(e)).collect();
        }
        let raw = (self.hi - self.lo) / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|&s| s >= raw)
            .unwrap_or(10.0 * mag);
        let first = (self.lo / step).ceil() as i64;
        let last = (self.hi / step).floor() as i64;
        (first..=last).map(|k| k as f64 * step).collect()
    }
}

struct Frame {
    right: f64,
}

impl Frame {
    fn plot_w(&self) -> f64 {
        WIDTH - LEFT - self.right
    }

    fn plot_h(&self) -> f64 {
        HEIGHT - TOP - BOTTOM
    }

    fn px(&self, u: f64) -> f64 {
        LEFT + u * self.plot_w()
    }

    fn py(&self, u: f64) -> f64 {
        TOP + (1.0 - u) * self.plot_h()
    }
}

fn header(out: &mut String, axes: &Axes, frame: &Frame) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + frame.plot_w() / 2.0,
        escape(&axes.title)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + frame.plot_w() / 2.0,
        HEIGHT - 12.0,
        escape(&axes.x_label)
    );
    let cy = TOP + frame.plot_h() / 2.0;
    let _ = writeln!(
        out,
        r#"<text x="16" y="{cy:.2}" text-anchor="middle" transform="rotate(-90 16 {cy:.2})">{}</text>"#,
        escape(&axes.y_label)
    );
}

fn frame_box(out: &mut String, frame: &Frame) {
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        frame.plot_w(),
        frame.plot_h()
    );
}

/// Tick marks and labels; `label_x`/`label_y` give the label at a unit
/// position.
fn ticks(out: &mut String, frame: &Frame, xt: &[(f64, String)], yt: &[(f64, String)]) {
    let bottom = TOP + frame.plot_h();
    for (u, label) in xt {
        let x = frame.px(*u);
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{bottom:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            bottom + 5.0,
            bottom + 18.0,
            escape(label)
        );
    }
    for (u, label) in yt {
        let y = frame.py(*u);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0,
            escape(label)
        );
    }
}

fn scale_ticks(s: &Scale) -> Vec<(f64, String)> {
    s.ticks()
        .into_iter()
        .map(|v| (s.unit(v), tick_label(v)))
        .filter(|(u, _)| (-1e-9..=1.0 + 1e-9).contains(u))
        .collect()
}

/// Curves on shared axes. Curves with one point are drawn as dots.
pub fn line_plot(axes: &Axes, curves: &[Curve]) -> Result<String, SvgError> {
    let bad: Vec<(usize, usize)> = curves
        .iter()
        .enumerate()
        .flat_map(|(c, curve)| {
            curve.points.iter().enumerate().filter_map(move |(k, &(x, y))| {
                let ok = x.is_finite() && y.is_finite() && (!axes.log_x || x > 0.0) && (!axes.log_y || y > 0.0);
                (!ok).then_some((c, k))
            })
        })
        .collect();
    if !bad.is_empty() {
        return Err(SvgError::NonFinite { indices: bad });
    }
    let all = || curves.iter().flat_map(|c| c.points.iter().copied());
    let sx = Scale::fit(all().map(|p| p.0), axes.log_x);
    let sy = Scale::fit(all().map(|p| p.1), axes.log_y);
    let frame = Frame { right: RIGHT_LINES };

    let mut out = String::new();
    header(&mut out, axes, &frame);
    ticks(&mut out, &frame, &scale_ticks(&sx), &scale_ticks(&sy));
    for curve in curves {
        let color = PALETTE[curve.color % PALETTE.len()];
        if let [(x, y)] = curve.points[..] {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                frame.px(sx.unit(x)),
                frame.py(sy.unit(y))
            );
            continue;
        }
        if curve.points.is_empty() {
            continue;
        }
        let coords: Vec<String> = curve
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(sx.unit(x)), frame.py(sy.unit(y))))
            .collect();
        let dash = if curve.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="{:.2}"{dash} points="{}"/>"#,
            curve.width,
            coords.join(" ")
        );
    }
    // Legend for labelled curves.
    let mut row = 0.0;
    for curve in curves.iter().filter(|c| !c.label.is_empty()) {
        let color = PALETTE[curve.color % PALETTE.len()];
        let y = TOP + 14.0 + 16.0 * row;
        let x = LEFT + 10.0;
        let dash = if curve.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"{dash}/><text x="{:.2}" y="{:.2}">{}</text>"#,
            x + 24.0,
            x + 30.0,
            y + 4.0,
            escape(&curve.label)
        );
        row += 1.0;
    }
    frame_box(&mut out, &frame);
    out.push_str("</svg>\n");
    Ok(out)
}

fn lerp_rgb(a: [f64; 3], b: [f64; 3], t: f64) -> [f64; 3] {
    [
        a[0] + (b[0] - a[0]) * t,
        a[1] + (b[1] - a[1]) * t,
        a[2] + (b[2] - a[2]) * t,
    ]
}

fn hex(c: [f64; 3]) -> String {
    let b = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
    format!("#{:02x}{:02x}{:02x}", b(c[0]), b(c[1]), b(c[2]))
}

/// Color of `u ∈ [0, 1]` (sequential) or `u ∈ [−1, 1]` (diverging).
fn color(map: ColorMap, u: f64) -> String {
    match map {
        ColorMap::Sequential => {
            const STOPS: [[f64; 3]; 5] = [
                [0.267, 0.005, 0.329],
                [0.230, 0.322, 0.546],
                [0.128, 0.567, 0.551],
                [0.369, 0.789, 0.383],
                [0.993, 0.906, 0.144],
            ];
            let t = u.clamp(0.0, 1.0) * 4.0;
            let k = (t.floor() as usize).min(3);
            hex(lerp_rgb(STOPS[k], STOPS[k + 1], t - k as f64))
        }
        ColorMap::Diverging => {
            const BLUE: [f64; 3] = [0.129, 0.400, 0.675];
            const RED: [f64; 3] = [0.698, 0.094, 0.169];
            const WHITE: [f64; 3] = [1.0, 1.0, 1.0];
            let u = u.clamp(-1.0, 1.0);
            if u < 0.0 {
                hex(lerp_rgb(WHITE, BLUE, -u))
            } else {
                hex(lerp_rgb(WHITE, RED, u))
            }
        }
    }
}

/// Index positions and labels for about five ticks along a grid axis.
fn grid_ticks(values: &[f64]) -> Vec<(f64, String)> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    let stride = (n / 5).max(1);
    (0..n)
        .step_by(stride)
        .map(|i| ((i as f64 + 0.5) / n as f64, tick_label(values[i])))
        .collect()
}

/// `values[i][j]` at `(xs[i], ys[j])`, one cell per grid point. Cells are
/// placed by index, so the axes follow the grid spacing.
pub fn heatmap(axes: &Axes, xs: &[f64], ys: &[f64], values: &[Vec<f64>], map: ColorMap) -> Result<String, SvgError> {
    if values.len() != xs.len() || values.iter().any(|r| r.len() != ys.len()) {
        return Err(SvgError::Shape(format!(
            "heatmap values must be {} rows of {} columns",
            xs.len(),
            ys.len()
        )));
    }
    let bad: Vec<(usize, usize)> = values
        .iter()
        .enumerate()
        .flat_map(|(i, r)| {
            r.iter()
                .enumerate()
                .filter(|(_, v)| !v.is_finite())
                .map(move |(j, _)| (i, j))
        })
        .chain(
            xs.iter()
                .enumerate()
                .filter(|(_, v)| !v.is_finite())
                .map(|(i, _)| (i, usize::MAX)),
        )
        .chain(
            ys.iter()
                .enumerate()
                .filter(|(_, v)| !v.is_finite())
                .map(|(j, _)| (usize::MAX, j)),
        )
        .collect();
    if !bad.is_empty() {
        return Err(SvgError::NonFinite { indices: bad });
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in values.iter().flatten() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo > hi {
        (lo, hi) = (0.0, 1.0);
    }
    let bound = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    let unit = |v: f64| match map {
        ColorMap::Sequential if hi > lo => (v - lo) / (hi - lo),
        ColorMap::Sequential => 0.5,
        ColorMap::Diverging => v / bound,
    };

    let frame = Frame { right: RIGHT_HEATMAP };
    let mut out = String::new();
    header(&mut out, axes, &frame);
    let (nx, ny) = (xs.len().max(1) as f64, ys.len().max(1) as f64);
    let (cw, ch) = (frame.plot_w() / nx, frame.plot_h() / ny);
    for (i, row) in values.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}" shape-rendering="crispEdges"/>"#,
                frame.px(i as f64 / nx),
                frame.py((j + 1) as f64 / ny),
                cw + 0.05,
                ch + 0.05,
                color(map, unit(v))
            );
        }
    }
    ticks(&mut out, &frame, &grid_ticks(xs), &grid_ticks(ys));
    frame_box(&mut out, &frame);

    // Color bar with the extreme values.
    let bar_x = WIDTH - RIGHT_HEATMAP + 16.0;
    let steps = 32;
    let (bar_lo, bar_hi) = match map {
        ColorMap::Sequential => (lo, hi),
        ColorMap::Diverging => (-bound, bound),
    };
    for k in 0..steps {
        let t = (k as f64 + 0.5) / steps as f64;
        let v = bar_lo + t * (bar_hi - bar_lo);
        let _ = writeln!(
            out,
            r#"<rect x="{bar_x:.2}" y="{:.2}" width="16" height="{:.2}" fill="{}" shape-rendering="crispEdges"/>"#,
            frame.py((k + 1) as f64 / steps as f64),
            frame.plot_h() / steps as f64 + 0.05,
            color(map, unit(v))
        );
    }
    for (u, v) in [(0.0, bar_lo), (1.0, bar_hi)] {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            bar_x + 20.0,
            frame.py(u) + 4.0,
            escape(&format!("{v:.3e}"))
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
