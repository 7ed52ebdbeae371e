//! Minimal SVG line chart: one data series, one horizontal reference line and
//! a legend on a fixed 800x600 canvas.

use std::fmt::Write as _;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 40.0;
const MARGIN_TOP: f64 = 60.0;
const MARGIN_BOTTOM: f64 = 70.0;
const TICKS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series_label: String,
    /// `(x, y)` pairs, drawn in the given order.
    pub series: Vec<(f64, f64)>,
    pub reference_label: String,
    pub reference: f64,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = if lo == 0.0 { 0.5 } else { lo.abs() * 0.01 };
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

impl LineChart {
    pub fn render(&self) -> String {
        let (x0, x1) = range(self.series.iter().map(|p| p.0));
        let (y0, y1) = range(self.series.iter().map(|p| p.1).chain([self.reference]));
        let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| MARGIN_TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;

        let mut s = String::new();
        let w = &mut s;
        writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
        writeln!(
            w,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        )
        .unwrap();
        writeln!(
            w,
            r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        )
        .unwrap();
        writeln!(
            w,
            r#"<text x="{}" y="30" text-anchor="middle" font-family="sans-serif" font-size="18">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        )
        .unwrap();
        // axes
        let (bx, by) = (MARGIN_LEFT, HEIGHT - MARGIN_BOTTOM);
        writeln!(
            w,
            r#"<path d="M{bx} {MARGIN_TOP} L{bx} {by} L{} {by}" fill="none" stroke="black"/>"#,
            WIDTH - MARGIN_RIGHT
        )
        .unwrap();
        for i in 0..=TICKS {
            let t = i as f64 / TICKS as f64;
            let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
            let (px, py) = (sx(xv), sy(yv));
            writeln!(
                w,
                r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="12">{xv:.4}</text>"#,
                by + 20.0
            )
            .unwrap();
            writeln!(
                w,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="12">{yv:.4}</text>"#,
                bx - 8.0,
                py + 4.0
            )
            .unwrap();
        }
        writeln!(
            w,
            r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
            MARGIN_LEFT + pw / 2.0,
            HEIGHT - 20.0,
            escape(&self.x_label)
        )
        .unwrap();
        writeln!(
            w,
            r#"<text x="20" y="{y}" text-anchor="middle" font-family="sans-serif" font-size="14" transform="rotate(-90 20 {y})">{}</text>"#,
            escape(&self.y_label),
            y = MARGIN_TOP + ph / 2.0
        )
        .unwrap();

        let points: Vec<String> = self
            .series
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        writeln!(
            w,
            r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
            points.join(" ")
        )
        .unwrap();
        let ry = sy(self.reference);
        writeln!(
            w,
            r#"<polyline points="{:.2},{ry:.2} {:.2},{ry:.2}" fill="none" stroke="red" stroke-width="2" stroke-dasharray="6 4"/>"#,
            MARGIN_LEFT,
            WIDTH - MARGIN_RIGHT
        )
        .unwrap();

        // legend
        let lx = WIDTH - MARGIN_RIGHT - 220.0;
        for (i, (label, color)) in [
            (&self.series_label, "steelblue"),
            (&self.reference_label, "red"),
        ]
        .into_iter()
        .enumerate()
        {
            let ly = MARGIN_TOP + 15.0 + 20.0 * i as f64;
            writeln!(
                w,
                r#"<rect x="{lx}" y="{}" width="20" height="4" fill="{color}"/>"#,
                ly - 4.0
            )
            .unwrap();
            writeln!(
                w,
                r#"<text x="{}" y="{ly}" font-family="sans-serif" font-size="12">{}</text>"#,
                lx + 28.0,
                escape(label)
            )
            .unwrap();
        }
        writeln!(w, "</svg>").unwrap();
        s
    }
}
