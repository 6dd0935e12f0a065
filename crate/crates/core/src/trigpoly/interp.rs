use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{TrigError, TrigPoly};

/// Residual tolerance for both interpolation problems, relative to
/// `1 + max |data|`.
pub const INTERP_RESIDUAL: f64 = 1e-9;

/// Minimum-norm solution of the underdetermined (or square) system `a x = b`
/// with full row rank, through a QR factorization of `a^H`. `None` when the
/// triangular factor is singular.
fn min_norm_solve(a: DMatrix<Complex64>, b: &DVector<Complex64>) -> Option<DVector<Complex64>> {
    let qr = a.adjoint().qr();
    let y = qr.r().adjoint().solve_lower_triangular(b)?;
    Some(qr.q() * y)
}

fn singular() -> TrigError {
    TrigError::IllConditioned {
        residual: f64::INFINITY,
        tolerance: INTERP_RESIDUAL,
    }
}

fn check_nodes(nodes: &[f64]) -> Result<(), TrigError> {
    if nodes.iter().any(|t| !t.is_finite()) {
        return Err(TrigError::InvalidInput("non-finite node".into()));
    }
    Ok(())
}

fn assemble(n: i64, x: &DVector<Complex64>, real: bool) -> TrigPoly {
    let p = TrigPoly::from_coeffs(1, (-n..=n).zip(x.iter().copied()));
    if real {
        p.realify()
    } else {
        p
    }
}

/// Trigonometric interpolation through `x` nodes with degree `⌊x/2⌋`. For an
/// even node count the spare degree of freedom is fixed by minimizing the
/// coefficient norm; real data give a real polynomial.
pub fn interpolate(nodes: &[f64], values: &[Complex64]) -> Result<TrigPoly, TrigError> {
    if nodes.len() != values.len() {
        return Err(TrigError::InvalidInput(format!(
            "{} nodes but {} values",
            nodes.len(),
            values.len()
        )));
    }
    if nodes.is_empty() {
        return Ok(TrigPoly::zero());
    }
    check_nodes(nodes)?;
    let n = (nodes.len() / 2) as i64;
    let freqs: Vec<i64> = (-n..=n).collect();
    let a = DMatrix::from_fn(nodes.len(), freqs.len(), |r, c| {
        Complex64::cis(freqs[c] as f64 * nodes[r])
    });
    let b = DVector::from_column_slice(values);
    let x = min_norm_solve(a, &b).ok_or_else(singular)?;
    let real = values.iter().all(|v| v.im == 0.0);
    let p = assemble(n, &x, real);

    let scale = 1.0 + values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let residual = nodes
        .iter()
        .zip(values)
        .map(|(&t, &v)| (p.evaluate(t) - v).norm())
        .fold(0.0, f64::max);
    if residual > INTERP_RESIDUAL * scale {
        return Err(TrigError::IllConditioned {
            residual,
            tolerance: INTERP_RESIDUAL * scale,
        });
    }
    Ok(p)
}

/// Hermite trigonometric interpolation: matches values and first
/// derivatives at `ℓ'` nodes with frequencies `-ℓ'..=ℓ'`, minimum-norm.
pub fn hermite_interpolate(
    nodes: &[f64],
    values: &[Complex64],
    derivatives: &[Complex64],
) -> Result<TrigPoly, TrigError> {
    if nodes.len() != values.len() || nodes.len() != derivatives.len() {
        return Err(TrigError::InvalidInput("mismatched Hermite data lengths".into()));
    }
    if nodes.is_empty() {
        return Ok(TrigPoly::zero());
    }
    check_nodes(nodes)?;
    let k = nodes.len();
    let n = k as i64;
    let freqs: Vec<i64> = (-n..=n).collect();
    let a = DMatrix::from_fn(2 * k, freqs.len(), |r, c| {
        let q = freqs[c] as f64;
        let e = Complex64::cis(q * nodes[r % k]);
        if r < k {
            e
        } else {
            e * Complex64::new(0.0, q)
        }
    });
    let b = DVector::from_iterator(2 * k, values.iter().chain(derivatives).copied());
    let x = min_norm_solve(a, &b).ok_or_else(singular)?;
    let p = assemble(n, &x, false);

    let dp = p.derivative();
    let scale = 1.0
        + values
            .iter()
            .chain(derivatives)
            .map(|v| v.norm())
            .fold(0.0, f64::max);
    let residual = nodes
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            (p.evaluate(t) - values[i])
                .norm()
                .max((dp.evaluate(t) - derivatives[i]).norm())
        })
        .fold(0.0, f64::max);
    if residual > INTERP_RESIDUAL * scale {
        return Err(TrigError::IllConditioned {
            residual,
            tolerance: INTERP_RESIDUAL * scale,
        });
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn cos_from_third_roots() {
        let nodes = [0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0];
        let p = interpolate(&nodes, &[c(1.0), c(-0.5), c(-0.5)]).unwrap();
        assert!(p.max_diff(&TrigPoly::cos()) < 1e-12);
        assert_eq!(p.integer_degree(), Some(1));
    }

    #[test]
    fn constants_stay_constant() {
        let nodes = [0.1, 0.9, 2.0, 4.4, 5.0];
        let p = interpolate(&nodes, &[c(3.25); 5]).unwrap();
        assert!(p.max_diff(&TrigPoly::constant(3.25)) < 1e-12);
    }

    #[test]
    fn six_random_nodes() {
        // fixed pseudo-random data
        let nodes = [0.31, 1.17, 2.05, 3.9, 4.42, 5.87];
        let values = [c(0.4), c(-1.3), c(2.2), c(0.0), c(0.75), c(-0.6)];
        let p = interpolate(&nodes, &values).unwrap();
        assert_eq!(p.integer_degree(), Some(3));
        assert!(p.is_real(1e-14));
        for (t, v) in nodes.iter().zip(values) {
            assert!((p.evaluate(*t) - v).norm() <= 1e-9 * 3.2);
        }
    }

    #[test]
    fn clustered_nodes_are_reported_or_accurate() {
        let nodes = [0.0, 1e-13, 1.0];
        match interpolate(&nodes, &[c(0.0), c(1.0), c(0.0)]) {
            Err(TrigError::IllConditioned { .. }) => {}
            Ok(p) => {
                for (t, v) in nodes.iter().zip([0.0, 1.0, 0.0]) {
                    assert!((p.evaluate(*t) - c(v)).norm() <= 2e-9);
                }
            }
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn hermite_single_node() {
        let i = Complex64::new(0.0, 1.0);
        for (wp, freq_sign) in [(i, 1.0), (-i, -1.0)] {
            let p = hermite_interpolate(&[0.0], &[c(1.0)], &[wp]).unwrap();
            // e^{±it} satisfies the same data; check the contract itself
            assert!((p.evaluate(0.0) - c(1.0)).norm() < 1e-12);
            assert!((p.derivative().evaluate(0.0) - wp).norm() < 1e-12);
            assert!(p.degree() <= 1.0);
            let e = TrigPoly::monomial(c(1.0), freq_sign as i64, 1);
            assert!((e.derivative().evaluate(0.0) - wp).norm() < 1e-15);
        }
    }

    #[test]
    fn hermite_two_nodes() {
        let i = Complex64::new(0.0, 1.0);
        let nodes = [0.8, 4.1];
        let vals = [c(1.0), c(-1.0)];
        let ders = [i, i * -1.0 * -1.0];
        let p = hermite_interpolate(&nodes, &vals, &ders).unwrap();
        let dp = p.derivative();
        for k in 0..2 {
            assert!((p.evaluate(nodes[k]) - vals[k]).norm() <= 1e-9);
            assert!((dp.evaluate(nodes[k]) - ders[k]).norm() <= 1e-9);
        }
        assert!(p.degree() <= 2.0);
    }

    proptest! {
        #[test]
        fn interpolation_reproduces_data(n in 1usize..=50, seed in 0u64..1000) {
            // equally spaced jittered nodes keep the problem well posed
            let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64
            };
            let h = 2.0 * PI / n as f64;
            let nodes: Vec<f64> = (0..n).map(|i| (i as f64 + 0.3 * next()) * h).collect();
            let values: Vec<Complex64> = (0..n).map(|_| c(4.0 * next() - 2.0)).collect();
            let p = interpolate(&nodes, &values).unwrap();
            prop_assert_eq!(p.integer_degree().unwrap_or(0), (n / 2) as i64 * (p.max_abs_freq() > 0) as i64);
            for (t, v) in nodes.iter().zip(&values) {
                prop_assert!((p.evaluate(*t) - v).norm() <= 1e-9 * 3.0);
            }
        }
    }
}
