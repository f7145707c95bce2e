//! Static SVG drawings: step-function overlays and grid sets.

use std::fmt::Write;

use crate::num::Dyadic;
use crate::plane::DyadicSet;
use crate::stepfn::{Profile, StepFunction};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;
const TICKS: usize = 4;

struct Frame {
    x_max: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        MARGIN + v / self.x_max * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN - v / self.y_max * (HEIGHT - 2.0 * MARGIN)
    }
}

/// Pieces `(start, end, value)` of a step function as a polyline.
fn staircase(frame: &Frame, pieces: &[(f64, f64, f64)]) -> String {
    let mut pts = Vec::new();
    for &(a, b, v) in pieces {
        pts.push(format!("{:.2},{:.2}", frame.x(a), frame.y(v)));
        pts.push(format!("{:.2},{:.2}", frame.x(b), frame.y(v)));
    }
    pts.join(" ")
}

fn profile_pieces(p: &Profile, until: f64) -> Vec<(f64, f64, f64)> {
    let mut start = 0.0;
    let mut out = Vec::new();
    for &(end, value) in p.pieces() {
        out.push((start, end.to_f64(), value.to_f64()));
        start = end.to_f64();
    }
    if start < until {
        out.push((start, until, 0.0));
    }
    out
}

fn axes(svg: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let (x0, y0) = (frame.x(0.0), frame.y(0.0));
    let (x1, y1) = (frame.x(frame.x_max), frame.y(frame.y_max));
    let _ = writeln!(svg, r#"<g stroke="black" stroke-width="1">"#);
    let _ = writeln!(svg, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}"/>"#);
    let _ = writeln!(svg, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}"/>"#);
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, r#"<g font-family="sans-serif" font-size="12" fill="black">"#);
    for i in 0..=TICKS {
        let xv = frame.x_max * i as f64 / TICKS as f64;
        let yv = frame.y_max * i as f64 / TICKS as f64;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            frame.x(xv),
            y0 + 16.0,
            trim(xv)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            frame.y(yv) + 4.0,
            trim(yv)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x_label}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 14.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{y_label}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
    let _ = writeln!(svg, "</g>");
}

fn trim(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn open(svg: &mut String) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
}

/// Overlay of `f`, its nonincreasing rearrangement and its distribution
/// function. The horizontal axis covers both `[0, 1]` and `[0, max f]`.
pub fn plot_marginal(f: &StepFunction, title: &str) -> String {
    let top = f.max_value().to_f64();
    let span = top.max(1.0);
    let frame = Frame { x_max: span, y_max: span };
    let series = [
        ("#1f77b4", "f", f.pieces().map(|(a, b, v)| (a.to_f64(), b.to_f64(), v.to_f64())).collect::<Vec<_>>()),
        ("#d62728", "f*", profile_pieces(&f.rearrangement_profile(), 1.0)),
        ("#2ca02c", "λ_f", profile_pieces(&f.distribution_profile(), span)),
    ];
    let mut svg = String::new();
    open(&mut svg);
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    axes(&mut svg, &frame, "x, t, s", "value");
    for (i, (colour, name, pieces)) in series.iter().enumerate() {
        let dash = if i == 0 { "" } else { r#" stroke-dasharray="6 3""# };
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="2"{dash} points="{}"/>"#,
            staircase(&frame, pieces)
        );
        let ly = MARGIN + 18.0 * i as f64;
        let lx = WIDTH - MARGIN - 80.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{colour}" stroke-width="2"{dash}/>"#,
            lx + 24.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{name}</text>"#,
            lx + 30.0,
            ly + 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// The set drawn in the unit square, one rectangle per nonempty cell.
pub fn plot_set(set: &DyadicSet) -> String {
    let params = set.params();
    let side = params.side();
    let frame = Frame { x_max: 1.0, y_max: 1.0 };
    let cell = Dyadic::unit(params.depth()).to_f64();
    let mut svg = String::new();
    open(&mut svg);
    axes(&mut svg, &frame, "x", "y");
    let _ = writeln!(svg, r##"<g fill="#333333" stroke="none">"##);
    for row in 0..side {
        for col in 0..side {
            let w = set.fill(row, col);
            if w == 0 {
                continue;
            }
            let frac = w as f64 / params.capacity() as f64;
            let (x0, y1) = (frame.x(col as f64 * cell), frame.y((row + 1) as f64 * cell));
            let (x1, y0) = (frame.x((col as f64 + frac) * cell), frame.y(row as f64 * cell));
            let _ = writeln!(
                svg,
                r#"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}"/>"#,
                x1 - x0,
                y0 - y1
            );
        }
    }
    let _ = writeln!(svg, "</g>");
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
