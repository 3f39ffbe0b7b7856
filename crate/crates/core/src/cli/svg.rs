//! Static SVG plot of total coverage against the sweep axis.

use std::fmt::Write as _;

use super::config::Axis;
use super::sweep::{Engine, Row};

const W: f64 = 640.0;
const H: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

struct Scale {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Scale {
    fn t(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        if self.hi > self.lo {
            (v - self.lo) / (self.hi - self.lo)
        } else {
            0.5
        }
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let (a, b) = (self.lo.floor() as i32, self.hi.ceil() as i32);
            return (a..=b)
                .map(|e| 10f64.powi(e))
                .filter(|&v| (self.lo..=self.hi).contains(&v.log10()))
                .collect();
        }
        if self.hi <= self.lo {
            return vec![self.lo];
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
        (first..=last).map(|i| i as f64 * step).collect()
    }
}

fn x_scale(axis: Axis, rows: &[Row]) -> Scale {
    let xs: Vec<f64> = rows
        .iter()
        .map(|r| r.sweep_value)
        .filter(|v| v.is_finite())
        .collect();
    let log = axis != Axis::TauDb && xs.iter().all(|&v| v > 0.0);
    let map = |v: f64| if log { v.log10() } else { v };
    let lo = xs.iter().copied().map(map).fold(f64::INFINITY, f64::min);
    let hi = xs
        .iter()
        .copied()
        .map(map)
        .fold(f64::NEG_INFINITY, f64::max);
    if lo.is_finite() {
        Scale { lo, hi, log }
    } else {
        Scale {
            lo: 0.0,
            hi: 1.0,
            log: false,
        }
    }
}

fn px(s: &Scale, v: f64) -> f64 {
    LEFT + s.t(v) * (W - LEFT - RIGHT)
}

fn py(p: f64) -> f64 {
    H - BOTTOM - p.clamp(0.0, 1.0) * (H - TOP - BOTTOM)
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Analytic rows become a line, MC rows points with 95% error bars.
pub fn render(axis: Axis, rows: &[Row]) -> String {
    let xs = x_scale(axis, rows);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, H - BOTTOM, TOP);
    let _ = writeln!(
        s,
        r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );

    for i in 0..=5 {
        let p = i as f64 / 5.0;
        let y = py(p);
        let _ = writeln!(
            s,
            r##"<line x1="{x0}" y1="{y:.2}" x2="{x1}" y2="{y:.2}" stroke="#ddd"/>"##
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            y + 4.0,
            fmt_tick(p)
        );
    }
    for t in xs.ticks() {
        let x = px(&xs, t);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{y1}" stroke="#ddd"/>"##
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#,
            y0 + 16.0,
            fmt_tick(t)
        );
    }
    let xlabel = match axis {
        Axis::TauDb => "SINR threshold (dB)",
        Axis::SigmaM => "cluster size (m)",
        Axis::ParentDensityRatio => "parent density ratio",
    };
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{xlabel}</text>"#,
        (x0 + x1) / 2.0,
        H - 18.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">coverage probability</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    let analytic: Vec<String> = rows
        .iter()
        .filter(|r| r.engine == Engine::Analytic && r.pc_total.is_finite())
        .map(|r| format!("{:.2},{:.2}", px(&xs, r.sweep_value), py(r.pc_total)))
        .collect();
    if !analytic.is_empty() {
        let _ = writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="2"/>"##,
            analytic.join(" ")
        );
    }
    for r in rows
        .iter()
        .filter(|r| r.engine == Engine::Mc && r.pc_total.is_finite())
    {
        let x = px(&xs, r.sweep_value);
        let ci = r.mc_ci_halfwidth.unwrap_or(0.0);
        let (ya, yb) = (py(r.pc_total - ci), py(r.pc_total + ci));
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{ya:.2}" x2="{x:.2}" y2="{yb:.2}" stroke="#d62728"/>"##
        );
        let _ = writeln!(
            s,
            r##"<circle cx="{x:.2}" cy="{:.2}" r="3.5" fill="none" stroke="#d62728"/>"##,
            py(r.pc_total)
        );
    }

    let lx = x1 - 150.0;
    let _ = writeln!(
        s,
        r##"<line x1="{lx}" y1="{}" x2="{}" y2="{}" stroke="#1f77b4" stroke-width="2"/>"##,
        y1 + 16.0,
        lx + 24.0,
        y1 + 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}">analytic</text>"#,
        lx + 30.0,
        y1 + 20.0
    );
    let _ = writeln!(
        s,
        r##"<circle cx="{}" cy="{}" r="3.5" fill="none" stroke="#d62728"/>"##,
        lx + 12.0,
        y1 + 34.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}">Monte Carlo (95% CI)</text>"#,
        lx + 30.0,
        y1 + 38.0
    );
    s.push_str("</svg>\n");
    s
}
