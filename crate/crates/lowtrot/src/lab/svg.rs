//! Minimal hand-rolled log-log plot output: a two-column text block per
//! series (gnuplot-style `.dat`) and a self-contained SVG with decade grid
//! lines. Only points with strictly positive coordinates are drawable on
//! log axes; others are silently dropped.

use std::fmt::Write as _;
use std::path::Path;

use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            points,
        }
    }
}

/// Two-column text blocks: `# label`, then `x y` lines, blank line between
/// series.
pub fn render_dat(series: &[Series]) -> String {
    let mut out = String::new();
    for s in series {
        let _ = writeln!(out, "# {}", s.label);
        for (x, y) in &s.points {
            let _ = writeln!(out, "{x} {y}");
        }
        out.push('\n');
    }
    out
}

pub fn write_dat(path: &Path, series: &[Series]) -> Result<()> {
    std::fs::write(path, render_dat(series))?;
    Ok(())
}

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];
const W: f64 = 640.0;
const H: f64 = 480.0;
const ML: f64 = 70.0; // left margin
const MR: f64 = 20.0;
const MT: f64 = 40.0;
const MB: f64 = 50.0;

/// Render a log-log SVG plot. Fails if no series contributes a positive
/// point.
pub fn render_loglog_svg(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    series: &[Series],
) -> Result<String> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in series {
        for &(x, y) in &s.points {
            if x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite() {
                xs.push(x.log10());
                ys.push(y.log10());
            }
        }
    }
    if xs.is_empty() {
        return Err(Error::InvalidInput(
            "log-log plot needs at least one positive finite point".into(),
        ));
    }
    let lo = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = |a: f64, b: f64| {
        if (b - a).abs() < 1e-12 {
            (a - 0.5, b + 0.5)
        } else {
            (a - 0.05 * (b - a), b + 0.05 * (b - a))
        }
    };
    let (x0, x1) = pad(lo(&xs), hi(&xs));
    let (y0, y1) = pad(lo(&ys), hi(&ys));
    let px = |x: f64| ML + (x - x0) / (x1 - x0) * (W - ML - MR);
    let py = |y: f64| H - MB - (y - y0) / (y1 - y0) * (H - MT - MB);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{W}" height="{H}" fill="white"/><text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        W / 2.0,
        xml_escape(title)
    );
    // Decade grid and tick labels.
    for d in (x0.floor() as i64)..=(x1.ceil() as i64) {
        let x = d as f64;
        if x < x0 || x > x1 {
            continue;
        }
        let _ = writeln!(
            svg,
            r##"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="#dddddd"/><text x="{0:.2}" y="{3:.2}" text-anchor="middle" font-family="sans-serif" font-size="11">1e{4}</text>"##,
            px(x),
            py(y0),
            py(y1),
            H - MB + 18.0,
            d
        );
    }
    for d in (y0.floor() as i64)..=(y1.ceil() as i64) {
        let y = d as f64;
        if y < y0 || y > y1 {
            continue;
        }
        let _ = writeln!(
            svg,
            r##"<line x1="{0:.2}" y1="{1:.2}" x2="{2:.2}" y2="{1:.2}" stroke="#dddddd"/><text x="{3:.2}" y="{4:.2}" text-anchor="end" font-family="sans-serif" font-size="11">1e{5}</text>"##,
            px(x0),
            py(y),
            px(x1),
            ML - 6.0,
            py(y) + 4.0,
            d
        );
    }
    // Axes.
    let _ = writeln!(
        svg,
        r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        px(x0),
        py(y1),
        px(x1) - px(x0),
        py(y0) - py(y1)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">{}</text>"#,
        (ML + W - MR) / 2.0,
        H - 12.0,
        xml_escape(xlabel)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 16 {})">{}</text>"#,
        (MT + H - MB) / 2.0,
        (MT + H - MB) / 2.0,
        xml_escape(ylabel)
    );
    // Series polylines + markers + legend.
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut path = String::new();
        for &(x, y) in &s.points {
            if x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite() {
                let _ = write!(path, "{:.2},{:.2} ", px(x.log10()), py(y.log10()));
            }
        }
        if !path.is_empty() {
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                path.trim_end()
            );
            for &(x, y) in &s.points {
                if x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite() {
                    let _ = writeln!(
                        svg,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#,
                        px(x.log10()),
                        py(y.log10())
                    );
                }
            }
        }
        let ly = MT + 14.0 * i as f64 + 10.0;
        let _ = writeln!(
            svg,
            r#"<rect x="{:.2}" y="{:.2}" width="10" height="10" fill="{color}"/><text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11">{}</text>"#,
            ML + 8.0,
            ly - 9.0,
            ML + 22.0,
            ly,
            xml_escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn write_loglog_svg(
    path: &Path,
    title: &str,
    xlabel: &str,
    ylabel: &str,
    series: &[Series],
) -> Result<()> {
    std::fs::write(path, render_loglog_svg(title, xlabel, ylabel, series)?)?;
    Ok(())
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
