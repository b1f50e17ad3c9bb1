use std::fmt::Write;

use super::format_time;

#[derive(Debug, Clone, PartialEq)]
pub struct GanttRow {
    pub label: String,
    pub start: f64,
    pub duration: f64,
}

/// Tick spacing of 1, 2 or 5 times a power of ten giving at most ~10 ticks.
fn tick_step(span: f64) -> f64 {
    if span <= 0.0 {
        return 1.0;
    }
    let raw = span / 10.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0].into_iter().map(|m| m * mag).find(|&s| s >= raw).unwrap_or(10.0 * mag)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

const ROW_H: f64 = 22.0;
const LABEL_W: f64 = 260.0;
const CHART_W: f64 = 640.0;
const TOP: f64 = 30.0;

/// Static SVG: one row per step, a bar from start to end and a time axis.
pub fn gantt_svg(rows: &[GanttRow]) -> String {
    let span = rows.iter().map(|r| r.start + r.duration).fold(0.0, f64::max);
    let step = tick_step(span);
    let axis_end = if span > 0.0 { (span / step).ceil() * step } else { step };
    let x = |t: f64| LABEL_W + t / axis_end * CHART_W;
    let height = TOP + ROW_H * rows.len() as f64 + 20.0;
    let width = LABEL_W + CHART_W + 20.0;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="monospace" font-size="12">"#
    );
    let mut t = 0.0;
    while t <= axis_end + step * 1e-9 {
        let px = x(t);
        let _ = writeln!(
            out,
            r##"<line class="tick" x1="{px:.1}" y1="{:.1}" x2="{px:.1}" y2="{:.1}" stroke="#ccc"/><text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"##,
            TOP - 5.0,
            height - 20.0,
            TOP - 10.0,
            format_time(t)
        );
        t += step;
    }
    for (i, r) in rows.iter().enumerate() {
        let y = TOP + ROW_H * i as f64;
        let w = (x(r.start + r.duration) - x(r.start)).max(1.0);
        let _ = writeln!(
            out,
            r##"<g class="bar"><title>{}: {} [{}]</title><text x="4" y="{:.1}">{}</text><rect x="{:.1}" y="{:.1}" width="{w:.1}" height="{:.1}" fill="#4a7ab5"/></g>"##,
            format_time(r.start),
            escape(&r.label),
            format_time(r.duration),
            y + ROW_H * 0.7,
            escape(&r.label),
            x(r.start),
            y + 3.0,
            ROW_H - 6.0
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Aligned text chart, `width` columns for the time span.
pub fn gantt_text(rows: &[GanttRow], width: usize) -> String {
    let span = rows.iter().map(|r| r.start + r.duration).fold(0.0, f64::max);
    let label_w = rows.iter().map(|r| r.label.len()).max().unwrap_or(0);
    let col = |t: f64| if span > 0.0 { ((t / span) * width as f64).round() as usize } else { 0 };
    let mut out = String::new();
    let _ = writeln!(out, "{:label_w$} |0{:>w$}|", "", format_time(span), w = width.saturating_sub(1));
    for r in rows {
        let (a, b) = (col(r.start), col(r.start + r.duration).min(width));
        let bar = if b > a { "#".repeat(b - a) } else { "|".into() };
        let line = format!("{}{}", " ".repeat(a), bar);
        let _ = writeln!(out, "{:label_w$} |{:width$}|", r.label, line);
    }
    out
}
