//! Fourier-domain zero padding (up-sampling) and its adjoint, frequency
//! cropping (down-sampling).
//!
//! Both are applied axis by axis. The source spectrum is embedded around DC
//! following [`signed_frequency`], so for even sizes the Nyquist bin lands on
//! the negative side and is carried over unsplit.

use num_complex::Complex;
use rustfft::FftPlanner;

use super::fourier::{frequency_index, signed_frequency, UnitaryFft};
use super::lines::map_lines;
use super::LinearOperator;
use crate::error::{Error, Result};
use crate::image::ComplexImage;
use crate::scalar::Real;

/// Isometric up-sampling from a small grid to a larger one.
#[derive(Clone)]
pub struct Resample<T: Real> {
    small: Vec<usize>,
    large: Vec<usize>,
    small_plans: Vec<UnitaryFft<T>>,
    large_plans: Vec<UnitaryFft<T>>,
}

impl<T: Real> Resample<T> {
    pub fn new(small: &[usize], large: &[usize]) -> Result<Self> {
        if small.len() != large.len() {
            return Err(Error::invalid(format!(
                "rank mismatch: {small:?} vs {large:?}"
            )));
        }
        if small.iter().zip(large).any(|(s, l)| s > l || *s == 0) {
            return Err(Error::invalid(format!(
                "target grid {large:?} is smaller than source grid {small:?}"
            )));
        }
        let mut planner = FftPlanner::new();
        let small_plans = small
            .iter()
            .map(|&n| UnitaryFft::new(&mut planner, n))
            .collect();
        let large_plans = large
            .iter()
            .map(|&n| UnitaryFft::new(&mut planner, n))
            .collect();
        Ok(Self {
            small: small.to_vec(),
            large: large.to_vec(),
            small_plans,
            large_plans,
        })
    }

    pub fn small_dims(&self) -> &[usize] {
        &self.small
    }

    pub fn large_dims(&self) -> &[usize] {
        &self.large
    }

    fn is_identity(&self) -> bool {
        self.small == self.large
    }

    /// Up-samples `x` (on the small grid) to the large grid.
    pub fn upsample(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut data = x.to_vec();
        if self.is_identity() {
            return data;
        }
        let mut dims = self.small.clone();
        for axis in 0..dims.len() {
            let (n, m) = (self.small[axis], self.large[axis]);
            if n == m {
                continue;
            }
            let (from, to) = (&self.small_plans[axis], &self.large_plans[axis]);
            let (out, out_dims) = map_lines(&data, &dims, axis, m, |src, dst| {
                from.forward(src);
                dst.iter_mut()
                    .for_each(|z| *z = Complex::new(T::zero(), T::zero()));
                for (k, v) in src.iter().enumerate() {
                    dst[frequency_index(signed_frequency(k, n), m)] = *v;
                }
                to.inverse(dst);
            });
            data = out;
            dims = out_dims;
        }
        data
    }

    /// Keeps only the frequencies of the small grid; adjoint of [`Self::upsample`].
    pub fn downsample(&self, y: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut data = y.to_vec();
        if self.is_identity() {
            return data;
        }
        let mut dims = self.large.clone();
        for axis in 0..dims.len() {
            let (n, m) = (self.small[axis], self.large[axis]);
            if n == m {
                continue;
            }
            let (small, large) = (&self.small_plans[axis], &self.large_plans[axis]);
            let (out, out_dims) = map_lines(&data, &dims, axis, n, |src, dst| {
                large.forward(src);
                for (k, v) in dst.iter_mut().enumerate() {
                    *v = src[frequency_index(signed_frequency(k, n), m)];
                }
                small.inverse(dst);
            });
            data = out;
            dims = out_dims;
        }
        data
    }
}

impl<T: Real> LinearOperator<T> for Resample<T> {
    fn input_len(&self) -> usize {
        self.small.iter().product()
    }

    fn output_len(&self) -> usize {
        self.large.iter().product()
    }

    fn forward(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        self.upsample(x)
    }

    fn adjoint(&self, y: &[Complex<T>]) -> Vec<Complex<T>> {
        self.downsample(y)
    }
}

/// Zero-pads the spectrum of `img` onto a grid of size `target`.
pub fn upsample<T: Real>(img: &ComplexImage<T>, target: &[usize]) -> Result<ComplexImage<T>> {
    let op = Resample::new(img.dims(), target)?;
    ComplexImage::new(target.to_vec(), op.upsample(img.data()))
}

/// Crops the spectrum of `img` to the central block of size `target`.
pub fn downsample<T: Real>(img: &ComplexImage<T>, target: &[usize]) -> Result<ComplexImage<T>> {
    let op = Resample::new(target, img.dims())?;
    ComplexImage::new(target.to_vec(), op.downsample(img.data()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::testing::{adjoint_mismatch, random_vector};
    use crate::vector::{distance, norm};

    #[test]
    fn identity_when_sizes_match() {
        let x = ComplexImage::new(vec![6], random_vector::<f64>(6, 1)).unwrap();
        let y = upsample(&x, &[6]).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn constant_scales_by_sqrt_ratio() {
        let x = ComplexImage::new(vec![4], vec![Complex::new(1.0, 0.0); 4]).unwrap();
        let y = upsample(&x, &[8]).unwrap();
        for z in y.data() {
            assert!((z - Complex::new(0.5f64.sqrt(), 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn isometry_and_left_inverse() {
        for (small, large) in [
            (vec![5], vec![12]),
            (vec![8, 6], vec![10, 9]),
            (vec![4, 3, 5], vec![6, 4, 5]),
        ] {
            let op = Resample::<f64>::new(&small, &large).unwrap();
            let n: usize = small.iter().product();
            let x = random_vector::<f64>(n, 11);
            let up = op.upsample(&x);
            assert!((norm(&up) - norm(&x)).abs() < 1e-12 * norm(&x));
            let back = op.downsample(&up);
            assert!(distance(&back, &x) < 1e-12 * norm(&x));
            assert!(adjoint_mismatch(&op, 20, 5) < 1e-10);
        }
    }

    #[test]
    fn band_limited_energy_preserved_by_downsample() {
        let op = Resample::<f64>::new(&[6, 5], &[10, 8]).unwrap();
        let band_limited = op.upsample(&random_vector::<f64>(30, 4));
        let down = op.downsample(&band_limited);
        assert!((norm(&down) - norm(&band_limited)).abs() < 1e-12);
    }

    #[test]
    fn rejects_shrinking_target() {
        let x = ComplexImage::new(vec![8], random_vector::<f64>(8, 2)).unwrap();
        assert!(upsample(&x, &[4]).is_err());
        assert!(downsample(&x, &[16]).is_err());
    }
}
