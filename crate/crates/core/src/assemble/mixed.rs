use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MixedPolyError {
    #[error("malformed polynomial JSON: {0}")]
    Json(String),
    #[error("u-degree {found} does not match declared s = {declared}")]
    DegreeMismatch { declared: u32, found: u32 },
    #[error("non-finite coefficient for u^{u} v^{v} vbar^{vbar}")]
    NonFinite { u: u32, v: u32, vbar: u32 },
    #[error("declared s must be positive")]
    ZeroDegree,
    #[error("exponent above the supported maximum {MAX_EXPONENT}")]
    ExponentTooLarge,
}

/// Largest exponent accepted when decoding.
pub const MAX_EXPONENT: u32 = 4096;

/// Exponents `(a, k₁, k₂)` of `u^a v^{k₁} v̄^{k₂}`.
pub type Exponents = (u32, u32, u32);

/// A semiholomorphic polynomial: sums of `c·u^a v^{k₁} v̄^{k₂}`. The type has
/// no slot for `ū`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MixedPolyRepr", into = "MixedPolyRepr")]
pub struct MixedPoly {
    s: u32,
    k: u32,
    m: u32,
    terms: BTreeMap<Exponents, Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MonomialRepr {
    u: u32,
    v: u32,
    vbar: u32,
    re: f64,
    im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MixedPolyRepr {
    s: u32,
    k: u32,
    m: u32,
    monomials: Vec<MonomialRepr>,
}

impl TryFrom<MixedPolyRepr> for MixedPoly {
    type Error = MixedPolyError;
    fn try_from(r: MixedPolyRepr) -> Result<Self, MixedPolyError> {
        if r.s == 0 {
            return Err(MixedPolyError::ZeroDegree);
        }
        let mut p = MixedPoly::new(r.s, r.k, r.m);
        if r.s > MAX_EXPONENT {
            return Err(MixedPolyError::ExponentTooLarge);
        }
        for t in r.monomials {
            if t.u.max(t.v).max(t.vbar) > MAX_EXPONENT {
                return Err(MixedPolyError::ExponentTooLarge);
            }
            if !(t.re.is_finite() && t.im.is_finite()) {
                return Err(MixedPolyError::NonFinite {
                    u: t.u,
                    v: t.v,
                    vbar: t.vbar,
                });
            }
            p.add_term((t.u, t.v, t.vbar), Complex64::new(t.re, t.im));
        }
        let found = p.deg_u();
        if found != r.s {
            return Err(MixedPolyError::DegreeMismatch {
                declared: r.s,
                found,
            });
        }
        Ok(p)
    }
}

impl From<MixedPoly> for MixedPolyRepr {
    fn from(p: MixedPoly) -> Self {
        MixedPolyRepr {
            s: p.s,
            k: p.k,
            m: p.m,
            monomials: p
                .terms
                .iter()
                .map(|(&(u, v, vbar), c)| MonomialRepr {
                    u,
                    v,
                    vbar,
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }
}

impl MixedPoly {
    /// Empty polynomial with metadata `s` (u-degree), `k` and `m`.
    pub fn new(s: u32, k: u32, m: u32) -> Self {
        Self {
            s,
            k,
            m,
            terms: BTreeMap::new(),
        }
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn set_m(&mut self, m: u32) {
        self.m = m;
    }

    /// Adds `c` to the coefficient of the monomial, dropping exact zeros.
    pub fn add_term(&mut self, exps: Exponents, c: Complex64) {
        let e = self.terms.entry(exps).or_default();
        *e += c;
        if *e == Complex64::new(0.0, 0.0) {
            self.terms.remove(&exps);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (Exponents, Complex64)> + '_ {
        self.terms.iter().map(|(&e, &c)| (e, c))
    }

    pub fn coeff(&self, exps: Exponents) -> Complex64 {
        self.terms.get(&exps).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn deg_u(&self) -> u32 {
        self.terms.keys().map(|e| e.0).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.0 + e.1 + e.2).max().unwrap_or(0)
    }

    /// Smallest `a + k₁ + k₂` over the monomials.
    pub fn min_total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.0 + e.1 + e.2).min().unwrap_or(0)
    }

    pub fn max_coeff_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Coefficients of `u^0..=u^s` at fixed `v`.
    pub fn coeffs_in_u(&self, v: Complex64) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.deg_u() as usize + 1];
        let vb = v.conj();
        for (&(a, k1, k2), &c) in &self.terms {
            out[a as usize] += c * v.powu(k1) * vb.powu(k2);
        }
        out
    }

    /// Coefficients of `u^a` on the circle `v = r e^{it}`, computed from
    /// `r^{k₁+k₂} e^{i(k₁−k₂)t}` and multiplied by `r^{-shift(a)}` so that
    /// tiny radii do not underflow.
    pub fn coeffs_on_circle(&self, r: f64, t: f64, shift: impl Fn(u32) -> i64) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.deg_u() as usize + 1];
        for (&(a, k1, k2), &c) in &self.terms {
            let e = (k1 + k2) as i64 - shift(a);
            let phase = Complex64::cis((k1 as f64 - k2 as f64) * t);
            out[a as usize] += c * r.powi(e as i32) * phase;
        }
        out
    }

    pub fn evaluate(&self, u: Complex64, v: Complex64) -> Complex64 {
        let vb = v.conj();
        self.terms
            .iter()
            .map(|(&(a, k1, k2), &c)| c * u.powu(a) * v.powu(k1) * vb.powu(k2))
            .sum()
    }

    /// `∂f/∂u`.
    pub fn du(&self, u: Complex64, v: Complex64) -> Complex64 {
        let vb = v.conj();
        self.terms
            .iter()
            .filter(|(e, _)| e.0 > 0)
            .map(|(&(a, k1, k2), &c)| c * a as f64 * u.powu(a - 1) * v.powu(k1) * vb.powu(k2))
            .sum()
    }

    /// The monomials of weighted degree `p₁a + p₂(k₁+k₂)` below `limit`.
    pub fn filter_weighted_below(&self, p1: u32, p2: u32, limit: u64) -> MixedPoly {
        let mut out = MixedPoly::new(self.s, self.k, self.m);
        for (&e, &c) in &self.terms {
            if weighted(e, p1, p2) < limit {
                out.add_term(e, c);
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        crate::json::to_string_pretty(self)
    }

    pub fn from_json(text: &str) -> Result<Self, MixedPolyError> {
        let repr: MixedPolyRepr =
            serde_json::from_str(text).map_err(|e| MixedPolyError::Json(e.to_string()))?;
        repr.try_into()
    }
}

fn weighted(e: Exponents, p1: u32, p2: u32) -> u64 {
    p1 as u64 * e.0 as u64 + p2 as u64 * (e.1 as u64 + e.2 as u64)
}

/// Result of [`radial_weighted_degree`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedDegree {
    pub homogeneous: bool,
    pub min: u64,
    pub max: u64,
}

/// Weighted degrees `p₁a + p₂(k₁+k₂)` over all monomials.
pub fn radial_weighted_degree(poly: &MixedPoly, p1: u32, p2: u32) -> WeightedDegree {
    let degs: Vec<u64> = poly.terms.keys().map(|&e| weighted(e, p1, p2)).collect();
    let min = degs.iter().copied().min().unwrap_or(0);
    let max = degs.iter().copied().max().unwrap_or(0);
    WeightedDegree {
        homogeneous: min == max,
        min,
        max,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// `u² − v³v̄`.
    fn hopf() -> MixedPoly {
        let mut p = MixedPoly::new(2, 1, 0);
        p.add_term((2, 0, 0), c(1.0));
        p.add_term((0, 3, 1), c(-1.0));
        p
    }

    #[test]
    fn weighted_degree_examples() {
        let p = hopf();
        assert_eq!(
            radial_weighted_degree(&p, 2, 1),
            WeightedDegree {
                homogeneous: true,
                min: 4,
                max: 4
            }
        );
        let mut u = MixedPoly::new(1, 1, 0);
        u.add_term((1, 0, 0), c(1.0));
        let d = radial_weighted_degree(&u, 5, 1);
        assert!(d.homogeneous && d.max == 5);
    }

    #[test]
    fn evaluation_and_derivative() {
        let p = hopf();
        let v = Complex64::from_polar(0.3, 0.7);
        let u = Complex64::new(0.2, -0.1);
        let expect = u * u - v.powu(3) * v.conj();
        assert!((p.evaluate(u, v) - expect).norm() < 1e-15);
        assert!((p.du(u, v) - u * 2.0).norm() < 1e-15);
        let cs = p.coeffs_in_u(v);
        assert_eq!(cs.len(), 3);
        assert!((cs[0] + v.powu(3) * v.conj()).norm() < 1e-15);
        let scaled = p.coeffs_on_circle(0.3, 0.7, |a| 2 * (2 - a as i64));
        assert!((scaled[0] + Complex64::cis(1.4)).norm() < 1e-14);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let mut p = hopf();
        p.add_term((0, 4, 3), Complex64::new(0.1 + 0.2, -1.0 / 3.0));
        p.set_m(7);
        let text = p.to_json();
        let q = MixedPoly::from_json(&text).unwrap();
        assert_eq!(p, q);
        assert_eq!(text, q.to_json());
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(MixedPoly::from_json("{").is_err());
        let wrong_s = r#"{"s":3,"k":1,"m":0,"monomials":[{"u":2,"v":0,"vbar":0,"re":1,"im":0}]}"#;
        assert!(matches!(
            MixedPoly::from_json(wrong_s),
            Err(MixedPolyError::DegreeMismatch { .. })
        ));
        let zero = r#"{"s":0,"k":1,"m":0,"monomials":[]}"#;
        assert!(MixedPoly::from_json(zero).is_err());
    }
}
