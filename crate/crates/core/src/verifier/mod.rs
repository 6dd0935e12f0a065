//! Numerical certification of a constructed polynomial: root tracking on
//! tori `ℂ × rS¹`, braid extraction, closure invariants, weak isolation and
//! degree bounds.
//!
//! Tracking works in scaled coordinates `w = u / r^{2k}` where the strands
//! have unit size; at radius `r` the scaled polynomial is
//! `g(w, e^{it}) + r^{m−2ks} A(e^{it})` for pipeline output.

mod roots;

use std::f64::consts::TAU;

use num_complex::Complex64;
use pathfinding::prelude::{kuhn_munkres_min, Matrix};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assemble::MixedPoly;
use crate::braid::{
    components, invariants, permutation, BraidError, BraidWord, Letter, LinkInvariants,
    Permutation, Sign,
};

pub use roots::{aberth, roots_at, MAX_ITERATIONS, TAU_RES};

/// Minimum scaled pairwise root distance; see also [`track_braid`] for the
/// conditioning floor.
pub const TAU_SEP: f64 = 1e-8;
/// Two Re-swaps closer than this in `t` cannot be ordered.
pub const TAU_MERGE: f64 = 1e-7;
pub const DEFAULT_SAMPLES: usize = 256;
pub const RADIUS_START: f64 = 0.2;
pub const RADIUS_FLOOR: f64 = 1e-4;
/// Largest perturbation size `r^{m−2ks}` in the radius schedule.
pub const DELTA_START: f64 = 1e-2;
/// Below this the resolved crossings approach the collision floor.
pub const DELTA_FLOOR: f64 = 1e-10;
/// A step may move each root by at most this fraction of the smallest gap,
/// both as predicted from the velocities and as corrected.
const STEP_FRACTION: f64 = 0.25;
/// Hard cap on accepted samples per circle.
const MAX_TRACK_SAMPLES: usize = 1 << 20;
/// Smallest step the adaptive tracker will take.
const MIN_STEP: f64 = 1e-11;
/// Fraction of the first sample cell used as start time, keeping symmetric
/// crossings off the sample grid.
const START_FRACTION: f64 = 0.381_966_011_250_105;

#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
pub enum VerifyError {
    #[error("root finder did not converge at t = {t}")]
    NoConvergence { t: f64 },
    #[error("strand collision at r = {r}, t = {t}: gap {gap:e}")]
    StrandCollision { r: f64, t: f64, gap: f64 },
    #[error("simultaneous crossings at r = {r} near t = {t}")]
    SimultaneousCrossings { r: f64, t: f64 },
    #[error("roots at t0 + 2pi do not match the roots at t0 (r = {r})")]
    ClosureMismatch { r: f64 },
    #[error("extracted word permutation differs from the strand permutation at r = {r}")]
    PermutationMismatch { r: f64 },
    #[error("extracted closure invariants differ from the input")]
    InvariantMismatch,
    #[error("no two consecutive radii agreed above {floor}")]
    NoStabilization { floor: f64 },
    #[error("structural check failed: {0}")]
    StructuralFailure(String),
    #[error("derivative margin {margin:e} at r = {r} is not above the threshold")]
    MarginZero { r: f64, margin: f64 },
    #[error("degree bound violated: {0}")]
    BoundViolated(String),
    #[error("polynomial has u-degree {found}, word has {expected} strands")]
    StrandCountMismatch { expected: usize, found: usize },
    #[error("invalid radius {0}")]
    InvalidRadius(f64),
    #[error("braid error: {0}")]
    Braid(String),
}

impl From<BraidError> for VerifyError {
    fn from(e: BraidError) -> Self {
        VerifyError::Braid(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackedCrossing {
    pub t: f64,
    /// Strand labels (Re-rank at the start time), left one first.
    pub pair: (usize, usize),
    /// 1-based generator index.
    pub generator: usize,
    pub sign: Sign,
}

/// Roots of `f(·, re^{it})` followed around the circle. `roots[i][j]` is
/// strand `j` at `times[i]`, in scaled coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackedBraid {
    pub r: f64,
    /// Exponent `e` with `u = r^e w`.
    pub scale_exponent: u32,
    pub times: Vec<f64>,
    pub roots: Vec<Vec<Complex64>>,
    /// Strand `j` ends where strand `closure[j]` started.
    pub closure: Vec<usize>,
    pub crossings: Vec<TrackedCrossing>,
    pub min_gap: f64,
}

impl TrackedBraid {
    pub fn strand_count(&self) -> usize {
        self.roots.first().map_or(0, Vec::len)
    }
}

/// Scale exponent `2k` recorded in the polynomial; `k = 0` means unscaled.
fn scale_exponent(f: &MixedPoly) -> u32 {
    2 * f.k()
}

/// Coefficients in `w` of `f(r^e w, re^{it}) / r^{e·s}`.
fn scaled_coeffs(f: &MixedPoly, r: f64, t: f64) -> Vec<Complex64> {
    let e = scale_exponent(f) as i64;
    let s = f.deg_u() as i64;
    f.coeffs_on_circle(r, t, |a| e * (s - a as i64))
}

/// Root velocities `dw/dt = −F_t / F_w`.
fn velocities(f: &MixedPoly, r: f64, t: f64, roots: &[Complex64]) -> Vec<Complex64> {
    let e = scale_exponent(f) as i64;
    let s = f.deg_u() as i64;
    let n = f.deg_u() as usize + 1;
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    let mut dc = vec![Complex64::new(0.0, 0.0); n];
    for ((a, k1, k2), coef) in f.terms() {
        let q = k1 as f64 - k2 as f64;
        let pw = (k1 + k2) as i64 - e * (s - a as i64);
        let term = coef * r.powi(pw as i32) * Complex64::cis(q * t);
        c[a as usize] += term;
        dc[a as usize] += term * Complex64::new(0.0, q);
    }
    roots
        .iter()
        .map(|&w| {
            let ft = dc.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, x| acc * w + x);
            let fw = c
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, (a, x)| acc * w + x * a as f64);
            let v = -ft / fw;
            if v.is_finite() {
                v
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect()
}

/// Gap below which two roots count as collided: [`TAU_SEP`], or the
/// resolution limit `√ε (1 + max |c_a|)` of a double root when larger.
fn separation_floor(f: &MixedPoly, r: f64) -> f64 {
    let e = scale_exponent(f) as i64;
    let s = f.deg_u() as i64;
    let mut size = vec![0.0f64; f.deg_u() as usize + 1];
    for ((a, k1, k2), c) in f.terms() {
        let pw = (k1 + k2) as i64 - e * (s - a as i64);
        size[a as usize] += c.norm() * r.powi(pw as i32);
    }
    let cmax = size.iter().copied().fold(0.0, f64::max);
    TAU_SEP.max(f64::EPSILON.sqrt() * (1.0 + cmax))
}

fn min_gap(roots: &[Complex64]) -> f64 {
    let mut g = f64::INFINITY;
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            g = g.min((roots[i] - roots[j]).norm());
        }
    }
    g
}

/// Reorders `next` so that `next[j]` continues `prev[j]`; returns the
/// largest displacement.
fn match_roots(prev: &[Complex64], next: &[Complex64]) -> (Vec<Complex64>, f64) {
    let n = prev.len();
    if n <= 1 {
        let d = if n == 1 { (prev[0] - next[0]).norm() } else { 0.0 };
        return (next.to_vec(), d);
    }
    let weights = Matrix::from_fn(n, n, |(i, j)| {
        let d = (prev[i] - next[j]).norm().min(1e6);
        (d * (1u64 << 40) as f64) as i64
    });
    let (_, assign) = kuhn_munkres_min(&weights);
    let matched: Vec<Complex64> = assign.iter().map(|&j| next[j]).collect();
    let d = prev
        .iter()
        .zip(&matched)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    (matched, d)
}

/// Strand labels sorted by real part.
fn re_order(roots: &[Complex64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..roots.len()).collect();
    idx.sort_by(|&a, &b| roots[a].re.total_cmp(&roots[b].re));
    idx
}

fn inversions(a: &[usize], b: &[usize]) -> usize {
    let mut pos = vec![0; b.len()];
    for (i, &x) in b.iter().enumerate() {
        pos[x] = i;
    }
    let mapped: Vec<usize> = a.iter().map(|&x| pos[x]).collect();
    let mut count = 0;
    for i in 0..mapped.len() {
        for j in i + 1..mapped.len() {
            if mapped[i] > mapped[j] {
                count += 1;
            }
        }
    }
    count
}

/// Follows the roots once around the circle of radius `r`. Steps are
/// limited so that the velocity predictor moves no root by more than a
/// quarter of the smallest gap, and are halved until the corrected roots
/// stay within that distance of the prediction and at most one adjacent
/// pair swaps its Re-order.
pub fn track_braid(f: &MixedPoly, r: f64, samples: usize) -> Result<TrackedBraid, VerifyError> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(VerifyError::InvalidRadius(r));
    }
    let samples = samples.max(8);
    let h = TAU / samples as f64;
    let t0 = START_FRACTION * h;
    let solve = |t: f64, start: Option<&[Complex64]>| {
        aberth(&scaled_coeffs(f, r, t), start).map_err(|_| VerifyError::NoConvergence { t })
    };
    let sep = separation_floor(f, r);

    let mut first = solve(t0, None)?;
    first.sort_by(|a, b| a.re.total_cmp(&b.re));
    let mut overall_gap = min_gap(&first);
    if overall_gap < sep {
        return Err(VerifyError::StrandCollision { r, t: t0, gap: overall_gap });
    }
    let mut times = vec![t0];
    let mut roots = vec![first.clone()];
    let mut cur_t = t0;
    let mut cur = first.clone();

    for i in 1..=samples {
        let target = t0 + h * i as f64;
        while cur_t < target {
            let vel = velocities(f, r, cur_t, &cur);
            let gap_cur = min_gap(&cur);
            let vmax = vel.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let mut dt = target - cur_t;
            if vmax > 0.0 {
                dt = dt.min(STEP_FRACTION * gap_cur / vmax);
            }
            loop {
                let tb = if dt >= target - cur_t { target } else { cur_t + dt };
                let predicted: Vec<Complex64> =
                    cur.iter().zip(&vel).map(|(w, v)| w + v * (tb - cur_t)).collect();
                let raw = solve(tb, Some(&predicted)).or_else(|_| solve(tb, None))?;
                let gap_new = min_gap(&raw);
                if gap_new < sep {
                    return Err(VerifyError::StrandCollision { r, t: tb, gap: gap_new });
                }
                let (next, disp) = match_roots(&predicted, &raw);
                let gap = gap_cur.min(gap_new);
                let smooth = disp < STEP_FRACTION * gap;
                let swaps = inversions(&re_order(&cur), &re_order(&next));
                if smooth && swaps <= 1 {
                    cur_t = tb;
                    cur = next;
                    overall_gap = overall_gap.min(gap_new);
                    times.push(cur_t);
                    roots.push(cur.clone());
                    break;
                }
                if smooth && dt < TAU_MERGE {
                    return Err(VerifyError::SimultaneousCrossings { r, t: cur_t });
                }
                if dt < MIN_STEP {
                    return Err(VerifyError::StrandCollision { r, t: cur_t, gap });
                }
                dt = 0.5 * dt.min(target - cur_t);
            }
            if times.len() > MAX_TRACK_SAMPLES {
                return Err(VerifyError::StrandCollision { r, t: cur_t, gap: min_gap(&cur) });
            }
        }
    }

    // closure: strand j ends at the start position of strand closure[j]
    let last = roots.last().expect("at least one sample");
    let mut closure = vec![usize::MAX; first.len()];
    for (j, w) in last.iter().enumerate() {
        let (k, d) = first
            .iter()
            .enumerate()
            .map(|(k, z)| (k, (z - w).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        if d > 1e-6 * (1.0 + w.norm()) || closure.contains(&k) {
            return Err(VerifyError::ClosureMismatch { r });
        }
        closure[j] = k;
    }

    let mut tb = TrackedBraid {
        r,
        scale_exponent: scale_exponent(f),
        times,
        roots,
        closure,
        crossings: Vec::new(),
        min_gap: overall_gap,
    };
    tb.crossings = locate_crossings(&tb);
    log::debug!(
        "r = {r:e}: {} samples, {} crossings, min gap {:e}",
        tb.times.len(),
        tb.crossings.len(),
        tb.min_gap
    );
    Ok(tb)
}

/// Re-swaps between consecutive samples, placed on the linear interpolant.
fn locate_crossings(tb: &TrackedBraid) -> Vec<TrackedCrossing> {
    let mut out = Vec::new();
    for i in 0..tb.times.len().saturating_sub(1) {
        let (r0, r1) = (&tb.roots[i], &tb.roots[i + 1]);
        let (o0, o1) = (re_order(r0), re_order(r1));
        if o0 == o1 {
            continue;
        }
        let p = (0..o0.len() - 1)
            .find(|&p| o0[p] != o1[p])
            .expect("orders differ");
        let (a, b) = (o0[p], o0[p + 1]);
        let d0 = r0[a].re - r0[b].re;
        let d1 = r1[a].re - r1[b].re;
        let lam = (d0 / (d0 - d1)).clamp(0.0, 1.0);
        let (t0, t1) = (tb.times[i], tb.times[i + 1]);
        let t = t0 + lam * (t1 - t0);
        let im = |z: &[Complex64], j: usize| z[j].im;
        let im_a = im(r0, a) + lam * (im(r1, a) - im(r0, a));
        let im_b = im(r0, b) + lam * (im(r1, b) - im(r0, b));
        // the smaller Im passes over; positive when that is the strand on the left
        let sign = if im_a < im_b { Sign::Pos } else { Sign::Neg };
        out.push(TrackedCrossing {
            t: t.rem_euclid(TAU),
            pair: (a, b),
            generator: p + 1,
            sign,
        });
    }
    out
}

/// The braid word read off the tracked crossings, checked against the strand
/// permutation.
pub fn extract_word(tb: &TrackedBraid) -> Result<BraidWord, VerifyError> {
    let s = tb.strand_count();
    let letters = tb
        .crossings
        .iter()
        .map(|c| Letter::new(c.generator, c.sign))
        .collect();
    let word = BraidWord::new(s, letters)?;
    // lane of strand j at the start is j; at the end it is closure[j]
    let expect = Permutation::from_images(tb.closure.clone())
        .ok_or(VerifyError::PermutationMismatch { r: tb.r })?;
    if permutation(&word) != expect {
        return Err(VerifyError::PermutationMismatch { r: tb.r });
    }
    Ok(word)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub radius_start: f64,
    pub radius_floor: f64,
    pub samples: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            radius_start: RADIUS_START,
            radius_floor: RADIUS_FLOOR,
            samples: DEFAULT_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusResult {
    pub r: f64,
    pub word: Option<BraidWord>,
    pub invariants: Option<LinkInvariants>,
    pub crossings: Vec<TrackedCrossing>,
    pub samples: usize,
    pub min_gap: Option<f64>,
    pub error: Option<VerifyError>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSection {
    pub expected: LinkInvariants,
    pub radii: Vec<RadiusResult>,
    /// The two consecutive radii whose words agreed, larger first.
    pub certified: Option<(f64, f64)>,
    pub extracted: Option<LinkInvariants>,
    pub extracted_word: Option<BraidWord>,
    pub passed: bool,
    pub failure: Option<VerifyError>,
}

/// Excess weighted degree `e` of the perturbation: the smallest
/// `2k·a + k₁ + k₂ − 2ks` over monomials above the homogeneous part, so the
/// scaled polynomial is `g + O(r^e)`. `None` for weighted homogeneous `f`.
pub fn perturbation_order(f: &MixedPoly) -> Option<u32> {
    let e = scale_exponent(f) as u64;
    let base = e * f.deg_u() as u64;
    if e == 0 {
        return None;
    }
    f.terms()
        .map(|((a, k1, k2), _)| e * a as u64 + k1 as u64 + k2 as u64)
        .filter(|&d| d > base)
        .map(|d| (d - base) as u32)
        .min()
}

/// Decreasing radii to try. With a perturbation of order `e` the radii are
/// spaced so that `δ = r^e` drops by a decade per step from
/// [`DELTA_START`] to [`DELTA_FLOOR`], capped at the start radius; otherwise
/// `r_start · 2^{−n}`. Radii below the floor are never used.
pub fn radius_schedule(f: &MixedPoly, opts: &VerifyOptions) -> Vec<f64> {
    let floor = opts.radius_floor * (1.0 - 1e-9);
    let mut out: Vec<f64> = Vec::new();
    match perturbation_order(f) {
        Some(e) => {
            let mut delta = DELTA_START;
            while delta >= DELTA_FLOOR * (1.0 - 1e-9) {
                let r = delta.powf(1.0 / e as f64).min(opts.radius_start);
                if r < floor {
                    break;
                }
                if out.last().is_none_or(|&p| r < p * (1.0 - 1e-12)) {
                    out.push(r);
                }
                delta /= 10.0;
            }
        }
        None => {
            let mut r = opts.radius_start;
            while r >= floor {
                out.push(r);
                r *= 0.5;
            }
        }
    }
    out
}

/// Extracts words on shrinking tori until two consecutive radii agree, then
/// compares with the closure invariants of `word`.
pub fn verify_link(
    f: &MixedPoly,
    word: &BraidWord,
    opts: &VerifyOptions,
) -> Result<LinkSection, VerifyError> {
    let expected = invariants(word)?;
    let mut section = LinkSection {
        expected: expected.clone(),
        radii: Vec::new(),
        certified: None,
        extracted: None,
        extracted_word: None,
        passed: false,
        failure: None,
    };
    if f.deg_u() as usize != word.strands() {
        section.failure = Some(VerifyError::StrandCountMismatch {
            expected: word.strands(),
            found: f.deg_u() as usize,
        });
        return Ok(section);
    }
    let mut last_error = None;
    for r in radius_schedule(f, opts) {
        let result = match track_braid(f, r, opts.samples).and_then(|tb| {
            let w = extract_word(&tb)?;
            let inv = invariants(&w)?;
            Ok((tb, w, inv))
        }) {
            Ok((tb, w, inv)) => RadiusResult {
                r,
                word: Some(w),
                invariants: Some(inv),
                crossings: tb.crossings,
                samples: tb.times.len(),
                min_gap: Some(tb.min_gap),
                error: None,
            },
            Err(e) => {
                log::info!("r = {r:e}: {e}");
                last_error = Some(e.clone());
                RadiusResult {
                    r,
                    word: None,
                    invariants: None,
                    crossings: Vec::new(),
                    samples: 0,
                    min_gap: None,
                    error: Some(e),
                }
            }
        };
        let agreed = match (section.radii.last(), &result.invariants) {
            (Some(prev), Some(inv)) => prev.invariants.as_ref().is_some_and(|p| p.same_link(inv)),
            _ => false,
        };
        let prev_r = section.radii.last().map(|p| p.r);
        section.radii.push(result);
        if agreed {
            let cur = section.radii.last().expect("just pushed");
            let inv = cur.invariants.clone().expect("agreed implies success");
            section.certified = Some((prev_r.expect("agreed implies previous"), r));
            section.passed = inv.same_link(&expected);
            if !section.passed {
                section.failure = Some(VerifyError::InvariantMismatch);
            }
            section.extracted = Some(inv);
            section.extracted_word = cur.word.clone();
            return Ok(section);
        }
    }
    section.failure = Some(last_error.unwrap_or(VerifyError::NoStabilization {
        floor: opts.radius_floor,
    }));
    Ok(section)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginSample {
    pub r: f64,
    /// `min |∂F/∂w|` over tracked zeros of the scaled polynomial.
    pub margin: f64,
    /// The same quantity for `∂f/∂u` itself, `r^{e(s−1)}` times smaller.
    pub raw_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolationSection {
    pub vanishes_at_origin: bool,
    pub critical_at_origin: bool,
    pub slice_is_u_power: bool,
    pub margins: Vec<MarginSample>,
    pub passed: bool,
    pub failure: Option<VerifyError>,
}

/// Structural checks at the origin and derivative margins over tracked
/// zeros at each of `radii`.
pub fn verify_weak_isolation(f: &MixedPoly, radii: &[f64], samples: usize) -> IsolationSection {
    let s = f.deg_u();
    let min_deg = f.min_total_degree();
    let vanishes = f.terms().all(|(e, _)| e.0 + e.1 + e.2 >= 1);
    let critical = min_deg >= 2;
    let slice: Vec<_> = f.terms().filter(|(e, _)| e.1 == 0 && e.2 == 0).collect();
    let slice_ok = slice.len() == 1
        && slice[0].0 == (s, 0, 0)
        && (slice[0].1 - Complex64::new(1.0, 0.0)).norm() <= 1e-12;
    let mut section = IsolationSection {
        vanishes_at_origin: vanishes,
        critical_at_origin: critical,
        slice_is_u_power: slice_ok,
        margins: Vec::new(),
        passed: false,
        failure: None,
    };
    if !(vanishes && critical && slice_ok) || s < 2 {
        section.failure = Some(VerifyError::StructuralFailure(format!(
            "f(O) = 0: {vanishes}, Df(O) = 0: {critical}, f(u, 0) = u^s: {slice_ok}, s = {s}"
        )));
        return section;
    }
    let e = scale_exponent(f) as i32;
    for &rr in radii {
        let tb = match track_braid(f, rr, samples) {
            Ok(tb) => tb,
            Err(err) => {
                section.failure = Some(err);
                return section;
            }
        };
        let mut margin = f64::INFINITY;
        for (i, &t) in tb.times.iter().enumerate() {
            let c = scaled_coeffs(f, rr, t);
            for w in &tb.roots[i] {
                let d = c
                    .iter()
                    .enumerate()
                    .skip(1)
                    .rev()
                    .fold(Complex64::new(0.0, 0.0), |acc, (a, ca)| acc * w + ca * a as f64);
                margin = margin.min(d.norm());
            }
        }
        let raw = margin * rr.powi(e * (s as i32 - 1));
        section.margins.push(MarginSample {
            r: rr,
            margin,
            raw_margin: raw,
        });
        // NaN fails too
        if margin.partial_cmp(&(10.0 * TAU_RES)) != Some(std::cmp::Ordering::Greater) {
            section.failure = Some(VerifyError::MarginZero { r: rr, margin });
            return section;
        }
    }
    section.passed = true;
    section
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeSection {
    pub degree: u32,
    pub degree_u: u32,
    pub strands: usize,
    pub bound: u64,
    pub single_component_bound: Option<u64>,
    /// Set when the closure is the unknot and the bounds do not apply.
    pub skipped: bool,
    pub passed: bool,
    pub failure: Option<VerifyError>,
}

/// `sℓ(2+s) + 1 + Σ_C s_C² ℓ`, and `2sℓ(s+1) + 1` for a knot.
pub fn degree_bounds(word: &BraidWord) -> (u64, Option<u64>) {
    let s = word.strands() as u64;
    let l = word.len() as u64;
    let comps = components(word);
    let sum: u64 = comps.iter().map(|c| (c.strand_count() as u64).pow(2) * l).sum();
    let bound = s * l * (2 + s) + 1 + sum;
    let single = (comps.len() == 1).then(|| 2 * s * l * (s + 1) + 1);
    (bound, single)
}

fn is_unknot(word: &BraidWord) -> Result<bool, VerifyError> {
    let unknot = invariants(&BraidWord::new(1, Vec::new())?)?;
    let inv = invariants(word)?;
    Ok(inv.component_count == 1 && inv.jones == unknot.jones)
}

pub fn verify_degree_bounds(f: &MixedPoly, word: &BraidWord) -> Result<DegreeSection, VerifyError> {
    let (bound, single) = degree_bounds(word);
    let degree = f.total_degree();
    let degree_u = f.deg_u();
    let mut section = DegreeSection {
        degree,
        degree_u,
        strands: word.strands(),
        bound,
        single_component_bound: single,
        skipped: false,
        passed: false,
        failure: None,
    };
    if degree_u as usize != word.strands() {
        section.failure = Some(VerifyError::StrandCountMismatch {
            expected: word.strands(),
            found: degree_u as usize,
        });
        return Ok(section);
    }
    if is_unknot(word)? {
        log::info!("closure is the unknot; degree bounds skipped");
        section.skipped = true;
        section.passed = true;
        return Ok(section);
    }
    let limit = single.map_or(bound, |b| b.min(bound));
    if degree as u64 > limit {
        section.failure = Some(VerifyError::BoundViolated(format!(
            "deg f = {degree} exceeds {limit}"
        )));
        return Ok(section);
    }
    section.passed = true;
    Ok(section)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub word: BraidWord,
    pub link: LinkSection,
    pub isolation: Option<IsolationSection>,
    pub degree: DegreeSection,
    pub passed: bool,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        crate::json::to_string_pretty(self)
    }
}

/// All checks. The isolation margins are taken at the two certified radii
/// and the next radius of the schedule.
pub fn verify(
    f: &MixedPoly,
    word: &BraidWord,
    opts: &VerifyOptions,
) -> Result<VerificationReport, VerifyError> {
    let link = verify_link(f, word, opts)?;
    let isolation = link.certified.map(|(r1, r2)| {
        let r3 = radius_schedule(f, opts)
            .into_iter()
            .find(|&r| r < r2)
            .unwrap_or(r2 / 2.0);
        verify_weak_isolation(f, &[r1, r2, r3], opts.samples)
    });
    let degree = verify_degree_bounds(f, word)?;
    let passed = link.passed && isolation.as_ref().is_some_and(|i| i.passed) && degree.passed;
    Ok(VerificationReport {
        word: word.clone(),
        link,
        isolation,
        degree,
        passed,
    })
}
