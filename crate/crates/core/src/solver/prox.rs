use num_complex::Complex;

use crate::error::{Error, Result};
use crate::image::ComplexImage;
use crate::scalar::Real;
use crate::sparsity::{divergence, gradient};
use crate::vector::{distance, norm_sqr};

/// Proximity operator of `τ‖·‖₁`: shrinks every modulus by `τ`, keeping phase.
pub fn soft_threshold<T: Real>(x: &[Complex<T>], tau: T) -> Vec<Complex<T>> {
    x.iter()
        .map(|&z| {
            let m = z.norm();
            if m > tau {
                z * ((m - tau) / m)
            } else {
                Complex::default()
            }
        })
        .collect()
}

/// Euclidean projection of `r` onto the ball of radius `eps` around `center`.
pub fn project_l2_ball<T: Real>(
    r: &[Complex<T>],
    center: &[Complex<T>],
    eps: T,
) -> Vec<Complex<T>> {
    let d = distance(r, center);
    if d <= eps {
        return r.to_vec();
    }
    let s = eps / d;
    r.iter()
        .zip(center)
        .map(|(&ri, &ci)| ci + (ri - ci) * s)
        .collect()
}

/// Proximity operator of `λ TV` by projected gradient on the dual field,
/// `u = x + λ div p` with `p ← Proj_{|p|≤1}(p + ∇(x/λ + div p)/(4d))`.
///
/// The dual field persists between calls so repeated proxes of nearby
/// inputs start warm.
#[derive(Clone, Debug)]
pub struct TvProx<T: Real> {
    dims: Vec<usize>,
    dual: Vec<Vec<Complex<T>>>,
    iterations: usize,
}

impl<T: Real> TvProx<T> {
    pub fn new(dims: &[usize], iterations: usize) -> Self {
        let len = dims.iter().product();
        Self {
            dims: dims.to_vec(),
            dual: vec![vec![Complex::default(); len]; dims.len()],
            iterations,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Forgets the warm-start dual field.
    pub fn reset(&mut self) {
        self.dual
            .iter_mut()
            .for_each(|c| c.iter_mut().for_each(|z| *z = Complex::default()));
    }

    pub fn apply(&mut self, x: &[Complex<T>], lambda: T) -> Vec<Complex<T>> {
        self.apply_traced(x, lambda, |_| {})
    }

    /// Like [`Self::apply`], reporting `½‖x + λ div p‖²` after every inner
    /// iteration. This dual objective never increases.
    pub fn apply_traced(
        &mut self,
        x: &[Complex<T>],
        lambda: T,
        mut observe: impl FnMut(T),
    ) -> Vec<Complex<T>> {
        if lambda <= T::zero() {
            return x.to_vec();
        }
        let step = T::one() / T::count(4 * self.dims.len());
        let inv = T::one() / lambda;
        let half = T::lit(0.5);
        for _ in 0..self.iterations {
            let mut w = divergence(&self.dual, &self.dims);
            for (wi, xi) in w.iter_mut().zip(x) {
                *wi = *wi + *xi * inv;
            }
            let g = gradient(&w, &self.dims);
            for (pc, gc) in self.dual.iter_mut().zip(&g) {
                for (p, gi) in pc.iter_mut().zip(gc) {
                    *p = *p + *gi * step;
                }
            }
            let len = x.len();
            for i in 0..len {
                let mag = self.dual.iter().map(|c| c[i].norm_sqr()).sum::<T>().sqrt();
                if mag > T::one() {
                    for c in self.dual.iter_mut() {
                        c[i] = c[i] / mag;
                    }
                }
            }
            let u = self.primal(x, lambda);
            observe(half * norm_sqr(&u));
        }
        self.primal(x, lambda)
    }

    fn primal(&self, x: &[Complex<T>], lambda: T) -> Vec<Complex<T>> {
        let div = divergence(&self.dual, &self.dims);
        x.iter()
            .zip(&div)
            .map(|(&xi, &di)| xi + di * lambda)
            .collect()
    }
}

/// Approximate minimizer of `½‖u − x‖² + λ TV(u)` after `iterations` dual steps.
pub fn prox_tv<T: Real>(
    x: &ComplexImage<T>,
    lambda: T,
    iterations: usize,
) -> Result<ComplexImage<T>> {
    if !(lambda >= T::zero()) {
        return Err(Error::invalid("TV weight must be non-negative"));
    }
    let mut prox = TvProx::new(x.dims(), iterations);
    x.with_data(prox.apply(x.data(), lambda))
}
