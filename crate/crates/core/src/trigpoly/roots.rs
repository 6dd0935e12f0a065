use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{TrigError, TrigPoly};

/// Equispaced samples used by the bracketing scan.
pub const SCAN_SAMPLES: usize = 4096;
/// Absolute residual on `|T|` accepted at a root.
pub const TAU_ROOT: f64 = 1e-10;
/// `|T'|` at a root below which the contact is reported as tangential.
pub const TAU_TAN: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootKind {
    Simple,
    Tangential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleRoot {
    pub t: f64,
    pub kind: RootKind,
}

/// Bisection on a bracket `f(lo)·f(hi) ≤ 0`, then a guarded Newton step.
fn refine(f: &dyn Fn(f64) -> f64, df: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    if f(hi) == 0.0 {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let best = if f(lo).abs() <= f(hi).abs() { lo } else { hi };
    let d = df(best);
    if d != 0.0 {
        let polished = best - f(best) / d;
        if polished >= lo && polished <= hi && f(polished).abs() < f(best).abs() {
            return polished;
        }
    }
    best
}

/// Roots of a real trigonometric polynomial in `[a, b)`.
///
/// Each scan cell is split at the sign changes of `T'`, so every monotone
/// piece holds at most one root; local extrema with `|T| ≤ τ_root` are
/// tangential roots.
pub fn real_roots_in(poly: &TrigPoly, a: f64, b: f64) -> Result<Vec<CircleRoot>, TrigError> {
    if poly.is_zero() {
        return Err(TrigError::IdenticallyZero);
    }
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(TrigError::InvalidInput(format!("bad interval [{a}, {b})")));
    }
    let dpoly = poly.derivative();
    let f = |t: f64| poly.eval_re(t);
    let df = |t: f64| dpoly.eval_re(t);
    let ddpoly = dpoly.derivative();
    let ddf = |t: f64| ddpoly.eval_re(t);

    let n = SCAN_SAMPLES;
    let h = (b - a) / n as f64;
    let xs: Vec<f64> = (0..=n).map(|i| if i == n { b } else { a + h * i as f64 }).collect();
    let dvals: Vec<f64> = xs.iter().map(|&x| df(x)).collect();

    let mut found: Vec<CircleRoot> = Vec::new();
    for i in 0..n {
        let (x0, x1) = (xs[i], xs[i + 1]);
        // split points: critical points of T inside the cell
        let mut cuts = vec![x0];
        if dvals[i] == 0.0 || (dvals[i] < 0.0) != (dvals[i + 1] < 0.0) {
            let c = refine(&df, &ddf, x0, x1);
            if f(c).abs() <= TAU_ROOT {
                found.push(CircleRoot {
                    t: c,
                    kind: RootKind::Tangential,
                });
            }
            if c > x0 && c < x1 {
                cuts.push(c);
            }
        }
        cuts.push(x1);
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let (flo, fhi) = (f(lo), f(hi));
            if flo == 0.0 || fhi == 0.0 || (flo < 0.0) != (fhi < 0.0) {
                let t = refine(&f, &df, lo, hi);
                if f(t).abs() > TAU_ROOT.max(1e-13 * poly.max_coeff_abs()) {
                    continue;
                }
                let kind = if df(t).abs() <= TAU_TAN {
                    RootKind::Tangential
                } else {
                    RootKind::Simple
                };
                found.push(CircleRoot { t, kind });
            }
        }
    }

    found.sort_by(|p, q| p.t.total_cmp(&q.t));
    let mut out: Vec<CircleRoot> = Vec::new();
    for r in found {
        match out.last_mut() {
            Some(last) if (r.t - last.t).abs() <= merge_distance(last, &r) => {
                if r.kind == RootKind::Tangential {
                    last.kind = RootKind::Tangential;
                }
            }
            _ => out.push(r),
        }
    }
    out.retain(|r| r.t < b);
    Ok(out)
}

/// Even-order roots are only located to about the square root of the
/// working precision, so they merge over a wider window.
fn merge_distance(a: &CircleRoot, b: &CircleRoot) -> f64 {
    if a.kind == RootKind::Tangential || b.kind == RootKind::Tangential {
        1e-6
    } else {
        1e-9
    }
}

/// Roots in `[0, 2π)`.
///
/// For integer frequencies the circle wraps, so a root found at `2π` is
/// reported at `0`.
pub fn real_roots_on_circle(poly: &TrigPoly) -> Result<Vec<CircleRoot>, TrigError> {
    let mut roots = real_roots_in(poly, 0.0, TAU)?;
    if poly.base_den() == 1 && !roots.is_empty() {
        let last = *roots.last().expect("nonempty");
        let first = roots[0];
        if roots.len() >= 2 && first.t + TAU - last.t <= merge_distance(&first, &last) {
            roots.pop();
            if last.kind == RootKind::Tangential {
                roots[0].kind = RootKind::Tangential;
            }
        } else if TAU - last.t <= 1e-9 {
            roots.pop();
            roots.insert(0, CircleRoot { t: 0.0, ..last });
        }
    }
    Ok(roots)
}
