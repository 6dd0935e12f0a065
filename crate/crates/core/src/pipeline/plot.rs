//! Deterministic SVG renderings of a trace: the input diagram, the singular
//! braid and the tracked root trajectories.

use std::f64::consts::TAU;
use std::fmt::Write;

use super::{PipelineTrace, Trajectory};
use crate::braid::{BraidWord, Sign};
use crate::parametrize::StrandSystem;

pub const PLOT_FILES: [&str; 3] = ["input_braid.svg", "singular_braid.svg", "trajectories.svg"];

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 40.0;
const CURVE_SAMPLES: usize = 512;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Canvas {
    body: String,
    x_range: (f64, f64),
    y_range: (f64, f64),
}

impl Canvas {
    fn new(title: &str, x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        let mut body = String::new();
        let _ = writeln!(
            body,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(body, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            body,
            r#"<text x="{MARGIN}" y="24" font-family="sans-serif" font-size="14">{}</text>"#,
            escape(title)
        );
        Self { body, x_range, y_range }
    }

    fn x(&self, v: f64) -> f64 {
        let (a, b) = self.x_range;
        MARGIN + (v - a) / (b - a) * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, v: f64) -> f64 {
        let (a, b) = self.y_range;
        HEIGHT - MARGIN - (v - a) / (b - a) * (HEIGHT - 2.0 * MARGIN)
    }

    fn polyline(&mut self, pts: &[(f64, f64)], color: &str) {
        if pts.len() < 2 {
            return;
        }
        let coords: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", self.x(x), self.y(y)))
            .collect();
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            coords.join(" ")
        );
    }

    fn dot(&mut self, x: f64, y: f64) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="black"/>"#,
            self.x(x),
            self.y(y)
        );
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn color(i: usize) -> &'static str {
    COLORS[i % COLORS.len()]
}

/// Letters as straight crossings between lanes, with a gap in the
/// understrand. Lane `p` is drawn at height `p + 1`.
fn input_svg(word: &BraidWord) -> String {
    let s = word.strands();
    let l = word.len().max(1);
    let title = if word.is_empty() {
        format!("input: trivial braid on {s} strands")
    } else {
        format!("input: {word}")
    };
    let mut cv = Canvas::new(&title, (0.0, l as f64), (0.5, s as f64 + 0.5));
    let mut lane_of: Vec<usize> = (0..s).collect();
    for i in 0..l {
        let letter = word.letters().get(i);
        for (strand, lane) in lane_of.clone().iter().enumerate() {
            let x0 = i as f64;
            let y0 = (*lane + 1) as f64;
            let col = color(strand);
            match letter {
                Some(lt) if *lane + 1 == lt.index || *lane == lt.index => {
                    let j = lt.index - 1;
                    let up = *lane == j;
                    let y1 = if up { y0 + 1.0 } else { y0 - 1.0 };
                    // the strand moving up passes over for a positive letter
                    let over = up == (lt.sign == Sign::Pos);
                    if over {
                        cv.polyline(&[(x0, y0), (x0 + 1.0, y1)], col);
                    } else {
                        let a = (x0 + 0.4, y0 + 0.4 * (y1 - y0));
                        let b = (x0 + 0.6, y0 + 0.6 * (y1 - y0));
                        cv.polyline(&[(x0, y0), a], col);
                        cv.polyline(&[b, (x0 + 1.0, y1)], col);
                    }
                    lane_of[strand] = if up { j + 1 } else { j };
                }
                _ => cv.polyline(&[(x0, y0), (x0 + 1.0, y0)], col),
            }
        }
    }
    cv.finish()
}

/// Strand values of the generic system over one period, crossings marked.
fn singular_svg(system: &StrandSystem, crossing_times: &[f64]) -> String {
    let ts: Vec<f64> = (0..=CURVE_SAMPLES).map(|i| TAU * i as f64 / CURVE_SAMPLES as f64).collect();
    let values: Vec<Vec<f64>> = ts.iter().map(|&t| system.values_at(t)).collect();
    let s = system.strand_count();
    let (lo, hi) = values
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let pad = 0.1 * (hi - lo).max(1.0);
    let mut cv = Canvas::new("singular braid", (0.0, TAU), (lo - pad, hi + pad));
    for j in 0..s {
        let pts: Vec<(f64, f64)> = ts.iter().zip(&values).map(|(&t, v)| (t, v[j])).collect();
        cv.polyline(&pts, color(j));
    }
    for &t in crossing_times {
        let v = system.values_at(t);
        let mut sorted = v.clone();
        sorted.sort_by(f64::total_cmp);
        // the two closest values meet at the crossing
        let y = sorted
            .windows(2)
            .min_by(|a, b| (a[1] - a[0]).total_cmp(&(b[1] - b[0])))
            .map_or(sorted.first().copied().unwrap_or(0.0), |w| 0.5 * (w[0] + w[1]));
        cv.dot(t, y);
    }
    cv.finish()
}

/// `Re(w)` against `t`; the understrand (larger `Im`) is interrupted at
/// every crossing.
fn trajectory_svg(tr: Option<&Trajectory>, s: usize) -> String {
    let Some(tr) = tr else {
        let cv = Canvas::new("trajectories: not verified", (0.0, TAU), (0.0, 1.0));
        return cv.finish();
    };
    let (lo, hi) = tr
        .re
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let pad = 0.1 * (hi - lo).max(1e-3);
    let (t0, t1) = (
        tr.times.first().copied().unwrap_or(0.0),
        tr.times.last().copied().unwrap_or(TAU),
    );
    let title = format!("Re(u / r^2k) at r = {:.3e}", tr.r);
    let mut cv = Canvas::new(&title, (t0, t1.max(t0 + 1e-9)), (lo - pad, hi + pad));
    let gap = 0.01 * (t1 - t0);
    for j in 0..s {
        let under: Vec<f64> = tr
            .crossings
            .iter()
            .filter(|c| {
                let under_strand = if c.sign == Sign::Pos { c.pair.1 } else { c.pair.0 };
                under_strand == j
            })
            .map(|c| {
                // crossing times are reported modulo 2π
                if c.t < t0 { c.t + TAU } else { c.t }
            })
            .collect();
        let mut piece: Vec<(f64, f64)> = Vec::new();
        for (i, &t) in tr.times.iter().enumerate() {
            if under.iter().any(|&c| (t - c).abs() < gap) {
                cv.polyline(&piece, color(j));
                piece.clear();
            } else {
                piece.push((t, tr.re[j][i]));
            }
        }
        cv.polyline(&piece, color(j));
    }
    cv.finish()
}

/// The three SVG documents, named as in [`PLOT_FILES`].
pub fn render_plots(trace: &PipelineTrace) -> Vec<(&'static str, String)> {
    vec![
        (PLOT_FILES[0], input_svg(&trace.input)),
        (
            PLOT_FILES[1],
            singular_svg(&trace.system, &trace.genericity.b_sing.crossing_times),
        ),
        (
            PLOT_FILES[2],
            trajectory_svg(trace.trajectory.as_ref(), trace.word.strands()),
        ),
    ]
}
