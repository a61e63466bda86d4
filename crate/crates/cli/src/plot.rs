//! Minimal hand-written SVG charts.

use std::fmt::Write;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

pub struct Series<'a> {
    pub label: &'a str,
    pub values: &'a [f64],
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-9 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn header(out: &mut String, title: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = write!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = write!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn y_axis(out: &mut String, lo: f64, hi: f64, label: &str) {
    let plot_h = HEIGHT - TOP - BOTTOM;
    let _ = write!(
        out,
        r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{}" stroke="black"/>"#,
        HEIGHT - BOTTOM
    );
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let y = HEIGHT - BOTTOM - plot_h * k as f64 / 4.0;
        let _ = write!(
            out,
            r##"<line x1="{LEFT}" y1="{y:.1}" x2="{}" y2="{y:.1}" stroke="#ddd"/><text x="{}" y="{:.1}" text-anchor="end">{v:.2}</text>"##,
            WIDTH - RIGHT,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let _ = write!(
        out,
        r#"<text x="16" y="{:.1}" transform="rotate(-90 16 {:.1})" text-anchor="middle">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(label)
    );
}

/// Line chart of equally spaced series; `x_labels` are spread along the axis.
pub fn line_chart(title: &str, y_label: &str, x_labels: &[String], series: &[Series]) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let (lo, hi) = range(series.iter().flat_map(|s| s.values.iter().copied()));
    y_axis(&mut out, lo, hi, y_label);
    let n = series.iter().map(|s| s.values.len()).max().unwrap_or(0);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let x = |i: usize| LEFT + if n > 1 { plot_w * i as f64 / (n - 1) as f64 } else { 0.0 };
    let y = |v: f64| HEIGHT - BOTTOM - plot_h * (v - lo) / (hi - lo);
    let _ = write!(
        out,
        r#"<line x1="{LEFT}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/>"#,
        HEIGHT - BOTTOM,
        WIDTH - RIGHT
    );
    if n > 0 && !x_labels.is_empty() {
        let ticks = 4.min(n - 1).max(1);
        for k in 0..=ticks {
            let i = (n - 1) * k / ticks;
            if let Some(label) = x_labels.get(i) {
                let _ = write!(
                    out,
                    r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                    x(i),
                    HEIGHT - BOTTOM + 18.0,
                    escape(label)
                );
            }
        }
    }
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let points: Vec<String> = s
            .values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .map(|(i, v)| format!("{:.1},{:.1}", x(i), y(*v)))
            .collect();
        let _ = write!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let ly = TOP + 14.0 * k as f64 + 6.0;
        let _ = write!(
            out,
            r#"<line x1="{0:.1}" y1="{ly:.1}" x2="{1:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{2:.1}" y="{3:.1}">{4}</text>"#,
            LEFT + 10.0,
            LEFT + 30.0,
            LEFT + 36.0,
            ly + 4.0,
            escape(s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Vertical bars with optional error whiskers.
pub fn bar_chart(title: &str, y_label: &str, labels: &[String], values: &[f64], errors: &[f64]) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let whisker = |i: usize| errors.get(i).copied().unwrap_or(0.0);
    let lo = values.iter().enumerate().map(|(i, v)| v - whisker(i)).fold(0.0, f64::min);
    let hi = values.iter().enumerate().map(|(i, v)| v + whisker(i)).fold(0.0, f64::max);
    let (lo, hi) = range([lo, hi].into_iter());
    y_axis(&mut out, lo, hi, y_label);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let y = |v: f64| HEIGHT - BOTTOM - plot_h * (v - lo) / (hi - lo);
    let slot = plot_w / values.len().max(1) as f64;
    for (i, v) in values.iter().enumerate() {
        let x0 = LEFT + slot * i as f64 + slot * 0.15;
        let (top, bottom) = if *v >= 0.0 { (y(*v), y(0.0)) } else { (y(0.0), y(*v)) };
        let _ = write!(
            out,
            r#"<rect x="{x0:.1}" y="{top:.1}" width="{:.1}" height="{:.1}" fill="{}"/>"#,
            slot * 0.7,
            (bottom - top).max(0.0),
            COLORS[0]
        );
        let e = whisker(i);
        let cx = x0 + slot * 0.35;
        if e > 0.0 {
            let _ = write!(
                out,
                r#"<line x1="{cx:.1}" y1="{:.1}" x2="{cx:.1}" y2="{:.1}" stroke="black"/>"#,
                y(v + e),
                y(v - e)
            );
        }
        if let Some(label) = labels.get(i) {
            let ly = HEIGHT - BOTTOM + 12.0;
            let _ = write!(
                out,
                r#"<text x="{cx:.1}" y="{ly:.1}" text-anchor="end" transform="rotate(-40 {cx:.1} {ly:.1})" font-size="10">{}</text>"#,
                escape(label)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
