//! Trace CSV, JSON report and SVG plots.
//!
//! `delta_trace.csv` has the header `t,delta,mstar_1,mstar_2,resamples`. Row `t`
//! holds the distance before generation `t`, the first two coordinates of the
//! step selected in that generation, and the number of rejected draws it took.
//! Floats are written in the shortest form that parses back to the same value.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use lincon_es_core::analysis::TraceRow;

pub const TRACE_FILE: &str = "delta_trace.csv";
pub const REPORT_FILE: &str = "report.json";
pub const HISTOGRAM_FILE: &str = "delta_histogram.svg";
pub const RATE_FILE: &str = "running_rate.svg";
pub const TRACE_HEADER: &str = "t,delta,mstar_1,mstar_2,resamples";

pub fn write_trace_csv(out: impl Write, rows: &[TraceRow]) -> io::Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "{TRACE_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{:?},{:?},{:?},{}", r.t, r.delta, r.mstar_1, r.mstar_2, r.resamples)?;
    }
    w.flush()
}

pub fn read_trace_csv(text: &str) -> Result<Vec<TraceRow>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == TRACE_HEADER => {}
        other => return Err(format!("unexpected header {other:?}")),
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(format!("line {}: expected 5 fields", i + 2));
            }
            let bad = |e: &dyn std::fmt::Display| format!("line {}: {e}", i + 2);
            Ok(TraceRow {
                t: f[0].parse().map_err(|e| bad(&e))?,
                delta: f[1].parse().map_err(|e| bad(&e))?,
                mstar_1: f[2].parse().map_err(|e| bad(&e))?,
                mstar_2: f[3].parse().map_err(|e| bad(&e))?,
                resamples: f[4].parse().map_err(|e| bad(&e))?,
            })
        })
        .collect()
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;

fn svg_frame(title: &str, x_label: &str, x: (f64, f64), y: (f64, f64), body: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{title}</text>"#, WIDTH / 2.0);
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(s, r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" stroke="black" fill="none"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#, WIDTH / 2.0, HEIGHT - 12.0);
    let _ = writeln!(s, r#"<text x="{x0}" y="{}" text-anchor="middle">{:.3}</text>"#, y0 + 16.0, x.0);
    let _ = writeln!(s, r#"<text x="{x1}" y="{}" text-anchor="middle">{:.3}</text>"#, y0 + 16.0, x.1);
    let _ = writeln!(s, r#"<text x="{}" y="{y0}" text-anchor="end">{:.3}</text>"#, x0 - 4.0, y.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{:.3}</text>"#, x0 - 4.0, y1 + 4.0, y.1);
    s.push_str(body);
    s.push_str("</svg>\n");
    s
}

fn scale(v: f64, (lo, hi): (f64, f64), (a, b): (f64, f64)) -> f64 {
    if hi > lo {
        a + (v - lo) / (hi - lo) * (b - a)
    } else {
        0.5 * (a + b)
    }
}

/// Histogram of the recorded distances.
pub fn delta_histogram_svg(rows: &[TraceRow], bins: usize) -> String {
    let deltas: Vec<f64> = rows.iter().map(|r| r.delta).filter(|d| d.is_finite()).collect();
    let lo = deltas.iter().copied().fold(f64::INFINITY, f64::min).min(0.0);
    let hi = deltas.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(lo + 1e-12);
    let bins = bins.max(1);
    let mut counts = vec![0u64; bins];
    for d in &deltas {
        let k = (((d - lo) / (hi - lo)) * bins as f64) as usize;
        counts[k.min(bins - 1)] += 1;
    }
    let top = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let mut body = String::new();
    let bar = (WIDTH - 2.0 * MARGIN) / bins as f64;
    for (k, &c) in counts.iter().enumerate() {
        let h = c as f64 / top * (HEIGHT - 2.0 * MARGIN);
        let _ = writeln!(
            body,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#4a7ebb"/>"##,
            MARGIN + k as f64 * bar,
            HEIGHT - MARGIN - h,
            bar,
            h
        );
    }
    svg_frame("distance to the constraint", "delta", (lo, hi), (0.0, top), &body)
}

/// Running mean of `σ [M⋆]₁` against `t`.
pub fn running_rate_svg(rows: &[TraceRow], sigma: f64) -> String {
    const POINTS: usize = 500;
    let mut acc = 0.0;
    let mut pts = Vec::with_capacity(POINTS + 1);
    let stride = (rows.len() / POINTS).max(1);
    for (i, r) in rows.iter().enumerate() {
        acc += sigma * r.mstar_1;
        if (i + 1) % stride == 0 || i + 1 == rows.len() {
            pts.push((r.t as f64, acc / (i + 1) as f64));
        }
    }
    let xr = (pts.first().map_or(0.0, |p| p.0), pts.last().map_or(1.0, |p| p.0));
    let ylo = pts.iter().map(|p| p.1).fold(0.0, f64::min);
    let yhi = pts.iter().map(|p| p.1).fold(ylo + 1e-12, f64::max);
    let mut path = String::new();
    for (i, (x, y)) in pts.iter().enumerate() {
        let px = scale(*x, xr, (MARGIN, WIDTH - MARGIN));
        let py = scale(*y, (ylo, yhi), (HEIGHT - MARGIN, MARGIN));
        let _ = write!(path, "{}{:.2} {:.2} ", if i == 0 { "M" } else { "L" }, px, py);
    }
    let body = format!("<path d=\"{}\" stroke=\"#bb4a4a\" fill=\"none\"/>\n", path.trim_end());
    svg_frame("running divergence-rate estimate", "t", xr, (ylo, yhi), &body)
}

pub fn write_file(dir: &Path, name: &str, contents: &[u8]) -> io::Result<()> {
    fs::write(dir.join(name), contents)
}
