//! Self-contained SVG rendering of control charts: one panel per chart with
//! the observations, step-wise limits and marked signals.

use std::fmt::Write;

use betachart_core::charts::{detect_signals, ChartResult};

const WIDTH: f64 = 900.0;
const PANEL: f64 = 260.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 40.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Scale {
    lo: f64,
    hi: f64,
    top: f64,
    height: f64,
}

impl Scale {
    fn y(&self, v: f64) -> f64 {
        self.top + self.height * (self.hi - v) / (self.hi - self.lo)
    }
}

fn x_of(t: f64, n: usize) -> f64 {
    LEFT + (WIDTH - LEFT - RIGHT) * (t - 0.5) / n as f64
}

fn panel(out: &mut String, c: &ChartResult, top: f64) {
    let n = c.rows.len();
    let height = PANEL - TOP - BOTTOM;
    let (mut lo, mut hi) = c
        .rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.lcl).min(r.y), hi.max(r.ucl).max(r.y)));
    let pad = 0.05 * (hi - lo).max(1e-12);
    lo -= pad;
    hi += pad;
    let s = Scale { lo, hi, top: top + TOP, height };
    let signals = detect_signals(c);
    let legend = if signals.is_empty() {
        "no signals".to_string()
    } else {
        format!("signals: {}", signals.iter().map(usize::to_string).collect::<Vec<_>>().join(", "))
    };

    let _ = writeln!(out, r#"<g class="chart" id="{}">"#, escape(c.kind.name()));
    let _ = writeln!(
        out,
        r#"<text x="{LEFT}" y="{:.1}" font-size="14" font-weight="bold">{} (alpha = {})</text>"#,
        top + 22.0,
        escape(c.kind.name()),
        c.alpha
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="end">{}</text>"#,
        WIDTH - RIGHT,
        top + 22.0,
        escape(&legend)
    );
    let _ = writeln!(
        out,
        r##"<rect x="{LEFT}" y="{:.1}" width="{:.1}" height="{height:.1}" fill="none" stroke="#444"/>"##,
        s.top,
        WIDTH - LEFT - RIGHT
    );
    for i in 0..=4 {
        let v = lo + (hi - lo) * i as f64 / 4.0;
        let y = s.y(v);
        let _ = writeln!(
            out,
            r##"<line x1="{:.1}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="#444"/><text x="{:.1}" y="{:.2}" font-size="10" text-anchor="end">{v:.4}</text>"##,
            LEFT - 4.0,
            LEFT - 6.0,
            y + 3.0
        );
    }
    let step = n.div_ceil(20).max(1);
    for t in (1..=n).filter(|t| (t - 1) % step == 0) {
        let x = x_of(t as f64, n);
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{:.1}" font-size="10" text-anchor="middle">{t}</text>"#,
            s.top + height + 14.0
        );
    }
    if lo < 0.0 && hi > 0.0 {
        let y = s.y(0.0);
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.1}" y2="{y:.2}" stroke="#999" stroke-dasharray="4 3"/>"##,
            WIDTH - RIGHT
        );
    }
    for (name, color, pick) in [("LCL", "#1f77b4", 0usize), ("UCL", "#d62728", 1)] {
        let mut pts = String::new();
        for r in &c.rows {
            let v = if pick == 0 { r.lcl } else { r.ucl };
            let y = s.y(v);
            let _ = write!(pts, "{:.2},{y:.2} {:.2},{y:.2} ", x_of(r.t as f64 - 0.5, n), x_of(r.t as f64 + 0.5, n));
        }
        let _ = writeln!(
            out,
            r#"<polyline class="{name}" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            pts.trim_end()
        );
    }
    let mut line = String::new();
    for r in &c.rows {
        let _ = write!(line, "{:.2},{:.2} ", x_of(r.t as f64, n), s.y(r.y));
    }
    let _ = writeln!(out, r##"<polyline points="{}" fill="none" stroke="#888"/>"##, line.trim_end());
    for r in &c.rows {
        let (x, y) = (x_of(r.t as f64, n), s.y(r.y));
        if r.signal {
            let _ = writeln!(
                out,
                r#"<circle class="signal" cx="{x:.2}" cy="{y:.2}" r="6" fill="none" stroke="red" stroke-width="2"/><circle cx="{x:.2}" cy="{y:.2}" r="3" fill="red"/>"#
            );
        } else {
            let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="black"/>"#);
        }
    }
    out.push_str("</g>\n");
}

/// Stacked panels, one per chart.
pub fn render(charts: &[ChartResult], title: &str) -> String {
    let height = 30.0 + PANEL * charts.len().max(1) as f64;
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    out.push_str(r#"<rect width="100%" height="100%" fill="white"/>"#);
    out.push('\n');
    let _ = writeln!(out, r#"<text x="{LEFT}" y="20" font-size="16">{}</text>"#, escape(title));
    for (i, c) in charts.iter().enumerate() {
        panel(&mut out, c, 30.0 + PANEL * i as f64);
    }
    out.push_str("</svg>\n");
    out
}
