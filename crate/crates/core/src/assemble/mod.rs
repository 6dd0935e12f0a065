//! Steps 3 to 6: the polynomial `g` of the doubled singular braid, its
//! homogeneous lift `p_k`, the resolving term `A` and the final
//! semiholomorphic polynomial `f = p_k + r^m A`.

mod mixed;

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::braid::{Sign, SingularBraidWord};
use crate::parametrize::StrandSystem;
use crate::trigpoly::{hermite_interpolate, Ratio, TrigError, TrigPoly};

pub use mixed::{radial_weighted_degree, Exponents, MixedPoly, MixedPolyError, WeightedDegree, MAX_EXPONENT};

/// Tolerance on odd or fractional frequencies and on imaginary residue of `g`.
pub const STRUCTURE_TOL: f64 = 1e-10;
/// Coefficients below this fraction of the largest are dropped after expansion.
pub const TRUNCATE_REL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssembleError {
    #[error("g has a coefficient {magnitude:e} at non-even frequency {frequency}")]
    EvennessViolated { frequency: f64, magnitude: f64 },
    #[error("g has complex coefficients")]
    RealnessViolated,
    #[error("negative exponent while lifting frequency {frequency} of u^{power}")]
    NegativeExponent { power: usize, frequency: i64 },
    #[error("critical sign at t = {t} differs on the two sides")]
    SideSignMismatch { t: f64 },
    #[error("A has an even frequency {0}")]
    EvenFrequencyPresent(i64),
    #[error("crossing time {0} must differ from pi")]
    CrossingAtPi(f64),
    #[error("{0} crossing times but {1} signs")]
    SignCount(usize, usize),
    #[error(transparent)]
    Trig(#[from] TrigError),
}

/// `g(u, e^{it}) = Σ_a c_a(t) u^a`, monic of degree `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UPolyTrig {
    pub coeffs: Vec<TrigPoly>,
}

impl UPolyTrig {
    pub fn degree_u(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Largest `|q|` over all coefficients (integer frequencies).
    pub fn degree_t(&self) -> i64 {
        self.coeffs.iter().map(TrigPoly::max_abs_freq).max().unwrap_or(0)
    }

    pub fn eval(&self, u: f64, t: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * u + c.eval_re(t))
    }

    pub fn eval_du(&self, u: f64, t: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (a, c)| acc * u + a as f64 * c.eval_re(t))
    }

    pub fn eval_complex(&self, u: Complex64, t: f64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * u + c.evaluate(t))
    }
}

/// Expands `Π (u − F̃_C((2t + 2πj)/s_C))` over all strands.
pub fn build_g(system: &StrandSystem) -> Result<UPolyTrig, AssembleError> {
    let mut coeffs = vec![TrigPoly::constant(1.0)];
    for id in system.strand_ids() {
        let root = system.strand_poly(id).shift_scale(Ratio::integer(2), 0.0);
        let mut next = vec![TrigPoly::zero(); coeffs.len() + 1];
        for (a, c) in coeffs.iter().enumerate() {
            next[a + 1] = next[a + 1].add(c);
            next[a] = next[a].sub(&c.multiply(&root));
        }
        coeffs = next;
    }
    let scale = coeffs.iter().map(TrigPoly::max_coeff_abs).fold(0.0, f64::max);
    let mut cleaned = Vec::with_capacity(coeffs.len());
    for c in &coeffs {
        let l = c.base_den();
        let mut keep = Vec::new();
        for (&q, &z) in c.coeffs() {
            let even_integer = q % l == 0 && (q / l) % 2 == 0;
            if even_integer {
                if z.norm() >= TRUNCATE_REL * scale {
                    keep.push((q / l, z));
                }
            } else if z.norm() > STRUCTURE_TOL * scale {
                return Err(AssembleError::EvennessViolated {
                    frequency: q as f64 / l as f64,
                    magnitude: z.norm(),
                });
            }
        }
        let p = TrigPoly::from_coeffs(1, keep);
        if !p.is_real(STRUCTURE_TOL) {
            return Err(AssembleError::RealnessViolated);
        }
        cleaned.push(p.realify());
    }
    Ok(UPolyTrig { coeffs: cleaned })
}

/// Smallest `k ≥ 1` such that every `c_a(t) r^{2k(s−a)}` is a polynomial in
/// `v, v̄`: `2k(s − a) ≥ deg c_a` for all `a` (so in particular
/// `2ks ≥ deg_t g`).
pub fn choose_k(g: &UPolyTrig, s: usize) -> u32 {
    let mut k = 1u32;
    loop {
        let ok = g
            .coeffs
            .iter()
            .enumerate()
            .all(|(a, c)| c.max_abs_freq() <= 2 * k as i64 * (s - a) as i64);
        if ok {
            return k;
        }
        k += 1;
    }
}

/// `p_k(u, r e^{it}) = r^{2ks} g(u / r^{2k}, e^{it})` as a mixed polynomial.
pub fn lift_to_pk(g: &UPolyTrig, k: u32, s: usize) -> Result<MixedPoly, AssembleError> {
    let mut p = MixedPoly::new(s as u32, k, 0);
    for (a, c) in g.coeffs.iter().enumerate() {
        let power = 2 * k as i64 * (s - a) as i64;
        for (&q, &z) in c.coeffs() {
            let rest = power - q.abs();
            if rest < 0 || rest % 2 != 0 {
                return Err(AssembleError::NegativeExponent { power: a, frequency: q });
            }
            let half = (rest / 2) as u32;
            let exps = if q >= 0 {
                (a as u32, q as u32 + half, half)
            } else {
                (a as u32, half, (-q) as u32 + half)
            };
            p.add_term(exps, z);
        }
    }
    Ok(p)
}

/// Data of the Hermite problem at one crossing of the singular braid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingDatum {
    pub t: f64,
    /// 1-based generator index of the crossing.
    pub generator: usize,
    pub critical_sign: i8,
    pub z: i8,
    pub y: f64,
    /// Side offset used in `g`-time.
    pub h: f64,
}

/// Sign of `g` at the critical point between the roots of rank `j − 1` and
/// `j` (0-based), evaluated at `g`-time `tg`.
fn critical_sign_at(
    g: &UPolyTrig,
    system: &StrandSystem,
    generator: usize,
    tg: f64,
) -> Result<f64, AssembleError> {
    let mut vals = system.values_at(2.0 * tg);
    vals.sort_by(f64::total_cmp);
    let (mut lo, mut hi) = (vals[generator - 1], vals[generator]);
    let scale = 1.0 + g.coeffs.iter().map(TrigPoly::max_coeff_abs).fold(0.0, f64::max);
    for &x in &vals {
        if g.eval(x, tg).abs() > 1e-8 * scale {
            return Err(AssembleError::Trig(TrigError::InvalidInput(format!(
                "strand value {x} is not a root of g at t = {tg}"
            ))));
        }
    }
    let d_lo = g.eval_du(lo, tg);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (g.eval_du(mid, tg) < 0.0) == (d_lo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(g.eval(0.5 * (lo + hi), tg).signum())
}

/// Critical signs on both sides of every crossing (that are required to
/// agree) and the resulting `y_k = sign · cos(t_k / 2)`, `z_k = ε_k`.
pub fn crossing_data(
    g: &UPolyTrig,
    system: &StrandSystem,
    b_sing: &SingularBraidWord,
    signs: &[Sign],
) -> Result<Vec<CrossingDatum>, AssembleError> {
    if signs.len() != b_sing.len() {
        return Err(AssembleError::SignCount(b_sing.len(), signs.len()));
    }
    let times = &b_sing.crossing_times;
    let n = times.len();
    let min_gap = (0..n)
        .map(|i| {
            if i + 1 < n {
                times[i + 1] - times[i]
            } else {
                times[0] + TAU - times[n - 1]
            }
        })
        .fold(TAU, f64::min);
    let mut out = Vec::with_capacity(n);
    for ((&t, &j), &eps) in times.iter().zip(&b_sing.letters).zip(signs) {
        if (t - std::f64::consts::PI).abs() < 1e-12 {
            return Err(AssembleError::CrossingAtPi(t));
        }
        let mut h = min_gap / 10.0;
        let sign = loop {
            let before = critical_sign_at(g, system, j, t / 2.0 - h)?;
            let after = critical_sign_at(g, system, j, t / 2.0 + h)?;
            if before == after && before != 0.0 {
                break before;
            }
            h /= 2.0;
            if h < 1e-12 {
                return Err(AssembleError::SideSignMismatch { t });
            }
        };
        out.push(CrossingDatum {
            t,
            generator: j,
            critical_sign: sign as i8,
            z: eps.value() as i8,
            y: sign * (t / 2.0).cos(),
            h,
        });
    }
    Ok(out)
}

/// Hermite problem: `Ã(t_k) = y_k / cos(t_k/2)` and `Ã'(t_k) = i z_k Ã(t_k)`,
/// so `∂ arg Ã / ∂t = z_k` with stationary modulus at the nodes.
pub fn solve_star(data: &[CrossingDatum]) -> Result<TrigPoly, AssembleError> {
    let nodes: Vec<f64> = data.iter().map(|d| d.t).collect();
    if let Some(&t) = nodes.iter().find(|t| (**t - std::f64::consts::PI).abs() < 1e-12) {
        return Err(AssembleError::CrossingAtPi(t));
    }
    let w: Vec<Complex64> = data
        .iter()
        .map(|d| Complex64::new(d.y / (d.t / 2.0).cos(), 0.0))
        .collect();
    let dw: Vec<Complex64> = data
        .iter()
        .zip(&w)
        .map(|(d, &wk)| Complex64::new(0.0, d.z as f64) * wk)
        .collect();
    Ok(hermite_interpolate(&nodes, &w, &dw)?)
}

/// `∂ arg T / ∂t` at `t`.
pub fn arg_derivative(p: &TrigPoly, t: f64) -> f64 {
    let a = p.evaluate(t);
    let d = p.derivative().evaluate(t);
    (a.re * d.im - a.im * d.re) / a.norm_sqr()
}

/// `A(e^{it}) = Ã(e^{2it}) cos t`; only odd frequencies survive.
pub fn build_a(a_tilde: &TrigPoly) -> Result<TrigPoly, AssembleError> {
    let a = a_tilde
        .shift_scale(Ratio::integer(2), 0.0)
        .multiply(&TrigPoly::cos());
    if let Some(&q) = a.coeffs().keys().find(|q| *q % 2 == 0) {
        return Err(AssembleError::EvenFrequencyPresent(q));
    }
    Ok(a)
}

/// Smallest odd `m` exceeding both `deg A` and `2ks`.
pub fn choose_m(a: &TrigPoly, k: u32, s: usize) -> u32 {
    let floor = (a.max_abs_freq() as u32).max(2 * k * s as u32);
    let m = floor + 1;
    if m % 2 == 1 {
        m
    } else {
        m + 1
    }
}

/// `f = p_k + r^m A(e^{it})`.
pub fn assemble_f(p_k: &MixedPoly, a: &TrigPoly, m: u32) -> Result<MixedPoly, AssembleError> {
    let mut f = p_k.clone();
    f.set_m(m);
    for (&q, &c) in a.coeffs() {
        let rest = m as i64 - q.abs();
        if rest < 0 || rest % 2 != 0 {
            return Err(AssembleError::NegativeExponent { power: 0, frequency: q });
        }
        let half = (rest / 2) as u32;
        let exps = if q >= 0 {
            (0, q as u32 + half, half)
        } else {
            (0, half, (-q) as u32 + half)
        };
        f.add_term(exps, c);
    }
    Ok(f)
}

/// Everything produced by Steps 3 to 6.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Construction {
    pub g: UPolyTrig,
    pub k: u32,
    pub p_k: MixedPoly,
    pub data: Vec<CrossingDatum>,
    pub a_tilde: TrigPoly,
    pub a: TrigPoly,
    pub m: u32,
    pub f: MixedPoly,
}

pub fn assemble(
    system: &StrandSystem,
    b_sing: &SingularBraidWord,
    signs: &[Sign],
) -> Result<Construction, AssembleError> {
    let s = system.strand_count();
    let g = build_g(system)?;
    let k = choose_k(&g, s);
    let p_k = lift_to_pk(&g, k, s)?;
    let data = crossing_data(&g, system, b_sing, signs)?;
    let a_tilde = solve_star(&data)?;
    let a = build_a(&a_tilde)?;
    let m = choose_m(&a, k, s);
    let f = assemble_f(&p_k, &a, m)?;
    log::debug!(
        "deg_t g = {}, k = {k}, deg A = {}, m = {m}, {} monomials",
        g.degree_t(),
        a.max_abs_freq(),
        f.len()
    );
    Ok(Construction {
        g,
        k,
        p_k,
        data,
        a_tilde,
        a,
        m,
        f,
    })
}
