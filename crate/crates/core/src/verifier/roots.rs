use num_complex::Complex64;

use crate::assemble::MixedPoly;

/// Residual tolerance, relative to `1 + max |c_a|`.
pub const TAU_RES: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoConvergence;

fn horner(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// All roots of `Σ c_a u^a` by Aberth-Ehrlich iteration.
///
/// Without `start` the initial guesses lie on a circle of radius
/// `1 + max |c_a / c_s|`, rotated off the axes.
pub fn aberth(coeffs: &[Complex64], start: Option<&[Complex64]>) -> Result<Vec<Complex64>, NoConvergence> {
    let mut c = coeffs.to_vec();
    while c.len() > 1 && c.last().is_some_and(|z| z.norm() == 0.0) {
        c.pop();
    }
    let n = c.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = c[n];
    let monic: Vec<Complex64> = c.iter().map(|z| z / lead).collect();
    let bound = 1.0 + monic[..n].iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = match start {
        Some(s) if s.len() == n => s.to_vec(),
        _ => (0..n)
            .map(|i| Complex64::from_polar(bound, std::f64::consts::TAU * i as f64 / n as f64 + 0.4))
            .collect(),
    };
    let tol = TAU_RES * (1.0 + coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max));
    let residual_ok = |z: &[Complex64]| z.iter().all(|&x| horner(&c, x).0.norm() <= tol);

    for _ in 0..MAX_ITERATIONS {
        let mut biggest = 0.0f64;
        for i in 0..n {
            let (p, dp) = horner(&monic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = z[i] - z[j];
                    if d.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[i] -= step;
                biggest = biggest.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if biggest <= 4.0 * f64::EPSILON && residual_ok(&z) {
            return Ok(z);
        }
    }
    if residual_ok(&z) {
        Ok(z)
    } else {
        Err(NoConvergence)
    }
}

/// The `s` roots of `f(·, v)` in the original coordinates.
pub fn roots_at(f: &MixedPoly, v: Complex64) -> Result<Vec<Complex64>, NoConvergence> {
    aberth(&f.coeffs_in_u(v), None)
}
