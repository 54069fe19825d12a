//! Unitary multi-dimensional DFT built from per-axis rustfft plans.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::lines::for_each_line;
use super::LinearOperator;
use crate::image::ComplexImage;
use crate::scalar::Real;
use crate::vector::zeros;

/// Signed frequency of DFT index `k` on an `n`-point grid. For even `n` the
/// Nyquist index `n/2` is assigned to `-n/2`.
#[inline]
pub fn signed_frequency(k: usize, n: usize) -> isize {
    if k < n.div_ceil(2) {
        k as isize
    } else {
        k as isize - n as isize
    }
}

/// DFT index of signed frequency `s` on an `n`-point grid.
#[inline]
pub fn frequency_index(s: isize, n: usize) -> usize {
    s.rem_euclid(n as isize) as usize
}

/// Forward and inverse plans for one line length, normalized to be unitary.
#[derive(Clone)]
pub(crate) struct UnitaryFft<T: Real> {
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    scale: T,
}

impl<T: Real> UnitaryFft<T> {
    pub(crate) fn new(planner: &mut FftPlanner<T>, n: usize) -> Self {
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            scale: T::one() / T::count(n).sqrt(),
        }
    }

    pub(crate) fn forward(&self, line: &mut [Complex<T>]) {
        let mut scratch = zeros(self.forward.get_inplace_scratch_len());
        self.forward.process_with_scratch(line, &mut scratch);
        line.iter_mut().for_each(|z| *z = *z * self.scale);
    }

    pub(crate) fn inverse(&self, line: &mut [Complex<T>]) {
        let mut scratch = zeros(self.inverse.get_inplace_scratch_len());
        self.inverse.process_with_scratch(line, &mut scratch);
        line.iter_mut().for_each(|z| *z = *z * self.scale);
    }
}

/// Unitary DFT over a fixed grid; can transform all axes or a subset.
#[derive(Clone)]
pub struct Fourier<T: Real> {
    dims: Vec<usize>,
    plans: Vec<UnitaryFft<T>>,
}

impl<T: Real> Fourier<T> {
    pub fn new(dims: &[usize]) -> Self {
        let mut planner = FftPlanner::new();
        let plans = dims
            .iter()
            .map(|&n| UnitaryFft::new(&mut planner, n))
            .collect();
        Self {
            dims: dims.to_vec(),
            plans,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Forward transform along the listed axes, in place.
    pub fn forward_axes(&self, data: &mut [Complex<T>], axes: &[usize]) {
        for &axis in axes {
            if self.dims[axis] > 1 {
                let plan = &self.plans[axis];
                for_each_line(data, &self.dims, axis, |line| plan.forward(line));
            }
        }
    }

    /// Inverse transform along the listed axes, in place.
    pub fn inverse_axes(&self, data: &mut [Complex<T>], axes: &[usize]) {
        for &axis in axes {
            if self.dims[axis] > 1 {
                let plan = &self.plans[axis];
                for_each_line(data, &self.dims, axis, |line| plan.inverse(line));
            }
        }
    }

    pub fn forward_in_place(&self, data: &mut [Complex<T>]) {
        let axes: Vec<usize> = (0..self.dims.len()).collect();
        self.forward_axes(data, &axes);
    }

    pub fn inverse_in_place(&self, data: &mut [Complex<T>]) {
        let axes: Vec<usize> = (0..self.dims.len()).collect();
        self.inverse_axes(data, &axes);
    }
}

impl<T: Real> LinearOperator<T> for Fourier<T> {
    fn input_len(&self) -> usize {
        self.dims.iter().product()
    }

    fn output_len(&self) -> usize {
        self.input_len()
    }

    fn forward(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut out = x.to_vec();
        self.forward_in_place(&mut out);
        out
    }

    fn adjoint(&self, y: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut out = y.to_vec();
        self.inverse_in_place(&mut out);
        out
    }
}

/// Unitary forward DFT of an image.
pub fn fourier_forward<T: Real>(img: &ComplexImage<T>) -> ComplexImage<T> {
    let mut out = img.clone();
    Fourier::new(img.dims()).forward_in_place(out.data_mut());
    out
}

/// Unitary inverse DFT of an image.
pub fn fourier_inverse<T: Real>(img: &ComplexImage<T>) -> ComplexImage<T> {
    let mut out = img.clone();
    Fourier::new(img.dims()).inverse_in_place(out.data_mut());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::testing::random_vector;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    #[test]
    fn delta_and_constant() {
        let delta = ComplexImage::new(vec![4], vec![c(1.0), c(0.0), c(0.0), c(0.0)]).unwrap();
        let f = fourier_forward(&delta);
        for z in f.data() {
            assert!((z - c(0.5)).norm() < 1e-15);
        }
        let ones = ComplexImage::new(vec![4], vec![c(1.0); 4]).unwrap();
        let f = fourier_forward(&ones);
        let expected = [c(2.0), c(0.0), c(0.0), c(0.0)];
        for (z, e) in f.data().iter().zip(expected) {
            assert!((z - e).norm() < 1e-15);
        }
    }

    #[test]
    fn unitary_and_invertible() {
        for dims in [vec![7], vec![16, 9], vec![4, 6, 5]] {
            let n = dims.iter().product();
            let x = ComplexImage::new(dims.clone(), random_vector::<f64>(n, 3)).unwrap();
            let fx = fourier_forward(&x);
            assert!((fx.norm() - x.norm()).abs() < 1e-12 * x.norm());
            let back = fourier_inverse(&fx);
            for (a, b) in back.data().iter().zip(x.data()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn frequency_convention() {
        assert_eq!(
            (0..4).map(|k| signed_frequency(k, 4)).collect::<Vec<_>>(),
            vec![0, 1, -2, -1]
        );
        assert_eq!(
            (0..5).map(|k| signed_frequency(k, 5)).collect::<Vec<_>>(),
            vec![0, 1, 2, -2, -1]
        );
        for n in 1..12 {
            for k in 0..n {
                assert_eq!(frequency_index(signed_frequency(k, n), n), k);
            }
        }
    }
}
