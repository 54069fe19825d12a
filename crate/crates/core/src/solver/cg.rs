use num_complex::Complex;

use crate::scalar::Real;
use crate::vector::{axpy, dot, norm, norm_sqr, sub};

/// Outcome of a conjugate-gradient solve.
#[derive(Clone, Debug)]
pub struct CgOutcome<T: Real> {
    pub x: Vec<Complex<T>>,
    pub iterations: usize,
    /// `‖b − H x‖ / ‖b‖` at exit.
    pub relative_residual: T,
}

/// Solves `H x = b` for Hermitian positive (semi-)definite `H`, starting
/// from `x0`, until `‖b − H x‖ ≤ tol ‖b‖` or `max_iter` iterations.
/// Stops early once the search direction has negligible curvature.
pub fn conjugate_gradient<T: Real>(
    apply: impl Fn(&[Complex<T>]) -> Vec<Complex<T>>,
    b: &[Complex<T>],
    x0: Vec<Complex<T>>,
    tol: T,
    max_iter: usize,
) -> CgOutcome<T> {
    conjugate_gradient_min(apply, b, x0, tol, 0, max_iter)
}

/// [`conjugate_gradient`] that always takes at least `min_iter` steps
/// (unless the residual vanishes), so a warm start keeps improving.
pub fn conjugate_gradient_min<T: Real>(
    apply: impl Fn(&[Complex<T>]) -> Vec<Complex<T>>,
    b: &[Complex<T>],
    x0: Vec<Complex<T>>,
    tol: T,
    min_iter: usize,
    max_iter: usize,
) -> CgOutcome<T> {
    let b_norm = norm(b);
    let mut x = x0;
    if b_norm == T::zero() {
        x.iter_mut().for_each(|v| *v = Complex::default());
        return CgOutcome {
            x,
            iterations: 0,
            relative_residual: T::zero(),
        };
    }
    let mut r = sub(b, &apply(&x));
    let mut rs = norm_sqr(&r);
    let target = tol * b_norm;
    let mut p = r.clone();
    let mut it = 0;
    let mut peak = T::zero();
    while (rs.sqrt() > target || it < min_iter) && rs > T::zero() && it < max_iter {
        let hp = apply(&p);
        let curvature = dot(&p, &hp).re;
        // a search direction in the numerical null space of a singular H
        let rayleigh = curvature / norm_sqr(&p);
        peak = peak.max(rayleigh);
        if !(curvature > T::zero()) || rayleigh <= T::lit(1e-10) * peak {
            break;
        }
        let step = rs / curvature;
        axpy(step, &p, &mut x);
        axpy(-step, &hp, &mut r);
        let rs_next = norm_sqr(&r);
        let beta = rs_next / rs;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = *ri + *pi * beta;
        }
        rs = rs_next;
        it += 1;
    }
    CgOutcome {
        x,
        iterations: it,
        relative_residual: rs.sqrt() / b_norm,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::testing::random_vector;
    use crate::vector::distance;

    #[test]
    fn solves_diagonal_system() {
        let d: Vec<f64> = (1..=20).map(|k| 1.0 + k as f64 / 20.0).collect();
        let apply = |x: &[Complex<f64>]| x.iter().zip(&d).map(|(v, s)| v * s).collect::<Vec<_>>();
        let truth = random_vector::<f64>(20, 4);
        let b = apply(&truth);
        let out = conjugate_gradient(apply, &b, vec![Complex::default(); 20], 1e-12, 100);
        assert!(distance(&out.x, &truth) < 1e-10);
        assert!(out.relative_residual <= 1e-12);
    }

    #[test]
    fn singular_system_stays_bounded() {
        // projection onto the first half; rhs has a tiny null-space component
        let apply = |x: &[Complex<f64>]| {
            x.iter()
                .enumerate()
                .map(|(i, v)| if i < 10 { *v } else { Complex::default() })
                .collect::<Vec<_>>()
        };
        let mut b = random_vector::<f64>(20, 2);
        for v in b.iter_mut().skip(10) {
            *v *= 1e-15;
        }
        let out = conjugate_gradient(apply, &b, vec![Complex::default(); 20], 1e-18, 50);
        assert!(norm(&out.x) < 2.0 * norm(&b));
        assert!(distance(&out.x[..10], &b[..10]) < 1e-12);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let out = conjugate_gradient(
            |x: &[Complex<f64>]| x.to_vec(),
            &[Complex::default(); 3],
            random_vector(3, 1),
            1e-9,
            10,
        );
        assert_eq!(out.iterations, 0);
        assert!(out.x.iter().all(|z| *z == Complex::default()));
    }
}
