//! Finite Fourier series with exact rational frequencies.
//!
//! A [`TrigPoly`] stores integer frequencies `q` over a shared denominator
//! `L`, representing `Σ c_q e^{i q t / L}`. Only the coefficients are
//! floating point, so time rescalings such as `t ↦ (t + 2πj)/s` and the
//! frequency doubling in `g` stay exact and evenness of frequencies is an
//! integer test.

mod interp;
mod roots;

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use interp::{hermite_interpolate, interpolate, INTERP_RESIDUAL};
pub use roots::{
    real_roots_in, real_roots_on_circle, CircleRoot, RootKind, SCAN_SAMPLES, TAU_ROOT, TAU_TAN,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrigError {
    #[error("interpolation residual {residual:e} above tolerance {tolerance:e} (clustered nodes?)")]
    IllConditioned { residual: f64, tolerance: f64 },
    #[error("trigonometric polynomial is identically zero")]
    IdenticallyZero,
    #[error("{0}")]
    InvalidInput(String),
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn lcm(a: i64, b: i64) -> i64 {
    a / gcd(a, b) * b
}

/// A nonzero rational `num / den` with `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    num: i64,
    den: i64,
}

impl Ratio {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num, den).max(1);
        let s = if den < 0 { -1 } else { 1 };
        Self {
            num: s * num / g,
            den: s * den / g,
        }
    }

    pub fn integer(n: i64) -> Self {
        Self::new(n, 1)
    }

    pub fn num(self) -> i64 {
        self.num
    }

    pub fn den(self) -> i64 {
        self.den
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TrigPolyRepr")]
pub struct TrigPoly {
    /// Frequencies are `q / base_den`.
    base_den: i64,
    coeffs: BTreeMap<i64, Complex64>,
}

/// Largest frequency numerator or denominator accepted when decoding.
const MAX_DECODED_FREQ: i64 = 1 << 40;

#[derive(Deserialize)]
struct TrigPolyRepr {
    base_den: i64,
    coeffs: BTreeMap<i64, Complex64>,
}

impl TryFrom<TrigPolyRepr> for TrigPoly {
    type Error = TrigError;
    fn try_from(r: TrigPolyRepr) -> Result<Self, TrigError> {
        if !(1..=MAX_DECODED_FREQ).contains(&r.base_den) {
            return Err(TrigError::InvalidInput(format!("base_den {}", r.base_den)));
        }
        if r.coeffs.keys().any(|q| q.abs() > MAX_DECODED_FREQ) {
            return Err(TrigError::InvalidInput("frequency out of range".into()));
        }
        if r.coeffs.values().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(TrigError::InvalidInput("non-finite coefficient".into()));
        }
        Ok(TrigPoly::from_coeffs(r.base_den, r.coeffs))
    }
}

impl Default for TrigPoly {
    fn default() -> Self {
        Self::zero()
    }
}

impl TrigPoly {
    pub fn zero() -> Self {
        Self {
            base_den: 1,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(c: impl Into<Complex64>) -> Self {
        Self::monomial(c.into(), 0, 1)
    }

    /// `c · e^{i q t / den}`.
    pub fn monomial(c: Complex64, q: i64, den: i64) -> Self {
        let mut p = Self {
            base_den: den,
            coeffs: BTreeMap::new(),
        };
        if c != Complex64::new(0.0, 0.0) {
            p.coeffs.insert(q, c);
        }
        p.canonicalize();
        p
    }

    /// Builds from `(q, c)` pairs over `den`; repeated frequencies add up.
    pub fn from_coeffs<I: IntoIterator<Item = (i64, Complex64)>>(den: i64, coeffs: I) -> Self {
        assert!(den > 0, "frequency denominator must be positive");
        let mut map: BTreeMap<i64, Complex64> = BTreeMap::new();
        for (q, c) in coeffs {
            *map.entry(q).or_default() += c;
        }
        let mut p = Self {
            base_den: den,
            coeffs: map,
        };
        p.canonicalize();
        p
    }

    /// `cos(t)`.
    pub fn cos() -> Self {
        Self::from_coeffs(1, [(1, Complex64::new(0.5, 0.0)), (-1, Complex64::new(0.5, 0.0))])
    }

    /// `sin(t)`.
    pub fn sin() -> Self {
        Self::from_coeffs(1, [(1, Complex64::new(0.0, -0.5)), (-1, Complex64::new(0.0, 0.5))])
    }

    /// `a cos(ω t) + b sin(ω t)` with rational `ω = q / den`.
    pub fn cos_sin(a: f64, b: f64, q: i64, den: i64) -> Self {
        let plus = Complex64::new(a / 2.0, -b / 2.0);
        Self::from_coeffs(den, [(q, plus), (-q, plus.conj())])
    }

    pub fn base_den(&self) -> i64 {
        self.base_den
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, Complex64> {
        &self.coeffs
    }

    pub fn coeff(&self, q: i64) -> Complex64 {
        self.coeffs.get(&q).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest stored `|q|` (numerator over `base_den`).
    pub fn max_abs_freq(&self) -> i64 {
        self.coeffs.keys().map(|q| q.abs()).max().unwrap_or(0)
    }

    /// `max |q| / L` as a real number.
    pub fn degree(&self) -> f64 {
        self.max_abs_freq() as f64 / self.base_den as f64
    }

    /// Integer degree; `None` if some frequency is not an integer.
    pub fn integer_degree(&self) -> Option<i64> {
        (self.base_den == 1).then(|| self.max_abs_freq())
    }

    pub fn max_coeff_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drops zero coefficients and reduces the denominator.
    fn canonicalize(&mut self) {
        self.coeffs.retain(|_, c| c.re != 0.0 || c.im != 0.0);
        let g = self
            .coeffs
            .keys()
            .fold(self.base_den, |g, &q| gcd(g, q));
        if g > 1 {
            self.base_den /= g;
            self.coeffs = std::mem::take(&mut self.coeffs)
                .into_iter()
                .map(|(q, c)| (q / g, c))
                .collect();
        }
        if self.coeffs.is_empty() {
            self.base_den = 1;
        }
    }

    /// Coefficients over a denominator that is a multiple of `base_den`.
    fn over(&self, den: i64) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        debug_assert_eq!(den % self.base_den, 0);
        let f = den / self.base_den;
        self.coeffs.iter().map(move |(&q, &c)| (q * f, c))
    }

    pub fn evaluate(&self, t: f64) -> Complex64 {
        let l = self.base_den as f64;
        self.coeffs
            .iter()
            .map(|(&q, &c)| c * Complex64::cis(q as f64 * t / l))
            .sum()
    }

    /// Real part of the value, for real polynomials.
    pub fn eval_re(&self, t: f64) -> f64 {
        self.evaluate(t).re
    }

    pub fn derivative(&self) -> Self {
        let l = self.base_den as f64;
        Self::from_coeffs(
            self.base_den,
            self.coeffs
                .iter()
                .map(|(&q, &c)| (q, c * Complex64::new(0.0, q as f64 / l))),
        )
    }

    pub fn add(&self, other: &TrigPoly) -> Self {
        let den = lcm(self.base_den, other.base_den);
        Self::from_coeffs(den, self.over(den).chain(other.over(den)))
    }

    pub fn sub(&self, other: &TrigPoly) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self::from_coeffs(self.base_den, self.coeffs.iter().map(|(&q, &c)| (q, c * factor)))
    }

    pub fn multiply(&self, other: &TrigPoly) -> Self {
        let den = lcm(self.base_den, other.base_den);
        let rhs: Vec<(i64, Complex64)> = other.over(den).collect();
        let mut terms = Vec::with_capacity(self.coeffs.len() * rhs.len());
        for (q1, c1) in self.over(den) {
            for &(q2, c2) in &rhs {
                terms.push((q1 + q2, c1 * c2));
            }
        }
        Self::from_coeffs(den, terms)
    }

    /// `t ↦ T(α t + β)` with rational `α`.
    pub fn shift_scale(&self, alpha: Ratio, beta: f64) -> Self {
        let l = self.base_den as f64;
        Self::from_coeffs(
            self.base_den * alpha.den(),
            self.coeffs
                .iter()
                .map(|(&q, &c)| (q * alpha.num(), c * Complex64::cis(q as f64 * beta / l))),
        )
    }

    /// True iff `c_{-q} = conj(c_q)` within `tol · (1 + max|c|)`.
    pub fn is_real(&self, tol: f64) -> bool {
        let scale = tol * (1.0 + self.max_coeff_abs());
        self.coeffs
            .iter()
            .all(|(&q, &c)| (self.coeff(-q) - c.conj()).norm() <= scale)
    }

    /// Projects onto real-valued polynomials: `(T + conj(T)) / 2`.
    pub fn realify(&self) -> Self {
        let mut terms = Vec::new();
        for (&q, &c) in &self.coeffs {
            terms.push((q, c * 0.5));
            terms.push((-q, c.conj() * 0.5));
        }
        Self::from_coeffs(self.base_den, terms)
    }

    /// Drops coefficients below `rel · max|c|`.
    pub fn truncate(&self, rel: f64) -> Self {
        let cut = rel * self.max_coeff_abs();
        Self::from_coeffs(
            self.base_den,
            self.coeffs
                .iter()
                .filter(|(_, c)| c.norm() >= cut)
                .map(|(&q, &c)| (q, c)),
        )
    }

    /// Largest coefficientwise difference.
    pub fn max_diff(&self, other: &TrigPoly) -> f64 {
        self.sub(other).max_coeff_abs()
    }
}

impl fmt::Display for TrigPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(&q, c)| format!("({:.6}{:+.6}i)e^(i{q}t/{})", c.re, c.im, self.base_den))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
