//! Small dense helpers on complex slices.

use num_complex::Complex;

use crate::scalar::Real;

/// `⟨a, b⟩ = Σ conj(a_i) b_i`.
pub fn dot<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| {
            acc + x.conj() * y
        })
}

pub fn norm_sqr<T: Real>(a: &[Complex<T>]) -> T {
    a.iter().map(|z| z.norm_sqr()).sum()
}

pub fn norm<T: Real>(a: &[Complex<T>]) -> T {
    norm_sqr(a).sqrt()
}

/// `‖a - b‖₂`.
pub fn distance<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<T>()
        .sqrt()
}

pub fn l1_norm<T: Real>(a: &[Complex<T>]) -> T {
    a.iter().map(|z| z.norm()).sum()
}

/// `y += s x`.
pub fn axpy<T: Real>(s: T, x: &[Complex<T>], y: &mut [Complex<T>]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = *yi + xi * s;
    }
}

pub fn add<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Vec<Complex<T>> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Vec<Complex<T>> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale<T: Real>(a: &mut [Complex<T>], s: T) {
    for z in a {
        *z = *z * s;
    }
}

pub fn zeros<T: Real>(n: usize) -> Vec<Complex<T>> {
    vec![Complex::new(T::zero(), T::zero()); n]
}

pub fn all_finite<T: Real>(a: &[Complex<T>]) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}
