//! Minimal SVG line charts: one `<polyline>` per series on linear,
//! auto-scaled axes. Output depends only on the input, byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{domain, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Any SVG colour; a fixed palette is used when `None`.
    pub color: Option<String>,
    pub width: f64,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), points, color: None, width: 1.0 }
    }

    pub fn with_color(mut self, color: impl Into<String>) -> Self {
        self.color = Some(color.into());
        self
    }

    pub fn with_width(mut self, width: f64) -> Self {
        self.width = width;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartOptions {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub width: u32,
    pub height: u32,
}

impl Default for ChartOptions {
    fn default() -> Self {
        Self {
            title: String::new(),
            x_label: "k".into(),
            y_label: "||u(k)||_2".into(),
            width: 800,
            height: 500,
        }
    }
}

const PALETTE: [&str; 6] = ["#1f77b4", "#2ca02c", "#d62728", "#9467bd", "#ff7f0e", "#17becf"];
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.05 };
        (lo - pad, hi + pad)
    }
}

pub fn render_svg(series: &[Series], opts: &ChartOptions) -> Result<String> {
    if series.is_empty() {
        return Err(domain("at least one series is required"));
    }
    let all = series.iter().flat_map(|s| s.points.iter());
    let mut bounds = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        if !x.is_finite() || !y.is_finite() {
            return Err(domain("series contain non-finite points"));
        }
        bounds = (bounds.0.min(x), bounds.1.max(x), bounds.2.min(y), bounds.3.max(y));
    }
    if !bounds.0.is_finite() {
        return Err(domain("all series are empty"));
    }
    let (x0, x1) = padded(bounds.0, bounds.1);
    let (y0, y1) = padded(bounds.2, bounds.3);
    let (w, h) = (f64::from(opts.width), f64::from(opts.height));
    let plot_w = w - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = h - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
    let py = |y: f64| MARGIN_TOP + (y1 - y) / (y1 - y0) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        opts.width, opts.height, opts.width, opts.height
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if !opts.title.is_empty() {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
            w / 2.0,
            escape(&opts.title)
        );
    }
    let (left, right, top, bottom) = (MARGIN_LEFT, w - MARGIN_RIGHT, MARGIN_TOP, h - MARGIN_BOTTOM);
    let _ = writeln!(
        s,
        r#"<path d="M{left:.1},{top:.1} L{left:.1},{bottom:.1} L{right:.1},{bottom:.1}" fill="none" stroke="black"/>"#
    );
    for (value, x, y, anchor) in [
        (x0, left, bottom + 16.0, "start"),
        (x1, right, bottom + 16.0, "end"),
        (y0, left - 6.0, bottom, "end"),
        (y1, left - 6.0, top + 10.0, "end"),
    ] {
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{y:.1}" text-anchor="{anchor}" font-family="sans-serif" font-size="11">{value:.6}</text>"#
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="13">{}</text>"#,
        (left + right) / 2.0,
        h - 12.0,
        escape(&opts.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 18 {:.1})">{}</text>"#,
        (top + bottom) / 2.0,
        (top + bottom) / 2.0,
        escape(&opts.y_label)
    );
    for (idx, series) in series.iter().enumerate() {
        let color = series.color.clone().unwrap_or_else(|| PALETTE[idx % PALETTE.len()].to_string());
        let mut pts = String::with_capacity(series.points.len() * 16);
        for (n, &(x, y)) in series.points.iter().enumerate() {
            if n > 0 {
                pts.push(' ');
            }
            let _ = write!(pts, "{:.3},{:.3}", px(x), py(y));
        }
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{}" stroke-width="{}" points="{}"><title>{}</title></polyline>"#,
            escape(&color),
            series.width,
            pts,
            escape(&series.label)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_svg_lines(series: &[Series], opts: &ChartOptions, path: &Path) -> std::io::Result<()> {
    let svg = render_svg(series, opts)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e.to_string()))?;
    std::fs::write(path, svg)
}

/// Parsed `points` attribute of every polyline, in document order.
pub fn polyline_points(svg: &str) -> Vec<Vec<(f64, f64)>> {
    svg.match_indices("points=\"")
        .map(|(at, m)| {
            let rest = &svg[at + m.len()..];
            let body = &rest[..rest.find('"').unwrap_or(rest.len())];
            body.split_whitespace()
                .filter_map(|pair| {
                    let (x, y) = pair.split_once(',')?;
                    Some((x.parse().ok()?, y.parse().ok()?))
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_is_horizontal() {
        let s = Series::new("flat", (0..10).map(|k| (k as f64, 2.5)).collect());
        let svg = render_svg(&[s], &ChartOptions::default()).unwrap();
        let lines = polyline_points(&svg);
        assert_eq!(lines.len(), 1);
        let y = lines[0][0].1;
        assert!(lines[0].iter().all(|p| p.1 == y));
    }

    #[test]
    fn identical_series_share_path_data() {
        let pts: Vec<(f64, f64)> = (0..50).map(|k| (k as f64, (k as f64).sin())).collect();
        let svg = render_svg(
            &[Series::new("a", pts.clone()), Series::new("b", pts)],
            &ChartOptions::default(),
        )
        .unwrap();
        let bodies: Vec<&str> = svg
            .match_indices("points=\"")
            .map(|(at, m)| {
                let rest = &svg[at + m.len()..];
                &rest[..rest.find('"').unwrap()]
            })
            .collect();
        assert_eq!(bodies.len(), 2);
        assert_eq!(bodies[0], bodies[1]);
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(render_svg(&[], &ChartOptions::default()).is_err());
        assert!(render_svg(&[Series::new("e", vec![])], &ChartOptions::default()).is_err());
        let nan = Series::new("n", vec![(0.0, f64::NAN)]);
        assert!(render_svg(&[nan], &ChartOptions::default()).is_err());
    }

    #[test]
    fn labels_are_escaped_and_output_is_stable() {
        let opts = ChartOptions { title: "a < b & c".into(), ..ChartOptions::default() };
        let s = Series::new("<run>", vec![(0.0, 0.0), (1.0, 1.0)]);
        let a = render_svg(std::slice::from_ref(&s), &opts).unwrap();
        let b = render_svg(&[s], &opts).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("a &lt; b &amp; c"));
        assert!(a.contains("<title>&lt;run&gt;</title>"));
    }
}
