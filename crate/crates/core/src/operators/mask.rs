//! k-space selection: gather measured coefficients, scatter them back.

use num_complex::Complex;

use super::LinearOperator;
use crate::error::{Error, Result};
use crate::image::ComplexImage;
use crate::sampling::{MaskMode, SamplingMask};
use crate::scalar::Real;
use crate::vector::zeros;

/// Measured k-space values together with their flat indices into the
/// modulation-grid spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct KSpaceData<T> {
    pub values: Vec<Complex<T>>,
    pub indices: Vec<usize>,
}

impl<T: Real> KSpaceData<T> {
    pub fn new(values: Vec<Complex<T>>, indices: Vec<usize>) -> Result<Self> {
        if values.len() != indices.len() || values.is_empty() {
            return Err(Error::invalid(format!(
                "{} values for {} indices",
                values.len(),
                indices.len()
            )));
        }
        Ok(Self { values, indices })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Row selection `M` of a length-`grid_len` vector.
#[derive(Clone, Debug)]
pub struct MaskSelect {
    grid_len: usize,
    indices: Vec<usize>,
}

impl MaskSelect {
    pub fn new(grid_len: usize, indices: Vec<usize>) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= grid_len) {
            return Err(Error::invalid(format!(
                "mask index {bad} out of range for grid of {grid_len}"
            )));
        }
        let mut seen = vec![false; grid_len];
        for &i in &indices {
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::invalid(format!("duplicate mask index {i}")));
            }
        }
        Ok(Self { grid_len, indices })
    }

    pub fn from_mask(mask: &SamplingMask, dims: &[usize]) -> Result<Self> {
        let full = match mask.mode() {
            MaskMode::FullGrid => mask.clone(),
            MaskMode::PhaseEncodePlane if dims.len() == 3 => mask.expand_phase_encode(dims[2])?,
            MaskMode::PhaseEncodePlane => {
                return Err(Error::invalid(
                    "phase-encode-plane mask used on a non-3D grid",
                ));
            }
        };
        if full.dims() != dims {
            return Err(Error::invalid(format!(
                "mask indexes grid {:?}, data grid is {:?}",
                full.dims(),
                dims
            )));
        }
        Self::new(dims.iter().product(), full.indices().to_vec())
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn gather<T: Real>(&self, full: &[Complex<T>]) -> Vec<Complex<T>> {
        self.indices.iter().map(|&i| full[i]).collect()
    }

    pub fn scatter<T: Real>(&self, values: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut out = zeros(self.grid_len);
        for (&i, v) in self.indices.iter().zip(values) {
            out[i] = *v;
        }
        out
    }
}

impl<T: Real> LinearOperator<T> for MaskSelect {
    fn input_len(&self) -> usize {
        self.grid_len
    }

    fn output_len(&self) -> usize {
        self.indices.len()
    }

    fn forward(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        self.gather(x)
    }

    fn adjoint(&self, y: &[Complex<T>]) -> Vec<Complex<T>> {
        self.scatter(y)
    }
}

/// Gathers the coefficients selected by `mask`, in mask index order.
pub fn apply_mask<T: Real>(full: &ComplexImage<T>, mask: &SamplingMask) -> Result<KSpaceData<T>> {
    let select = MaskSelect::from_mask(mask, full.dims())?;
    KSpaceData::new(select.gather(full.data()), select.indices().to_vec())
}

/// Scatters measurements back onto a zero spectrum of size `dims`.
pub fn adjoint_mask<T: Real>(data: &KSpaceData<T>, dims: &[usize]) -> Result<ComplexImage<T>> {
    let select = MaskSelect::new(dims.iter().product(), data.indices.clone())?;
    ComplexImage::new(dims.to_vec(), select.scatter(&data.values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::testing::{adjoint_mismatch, random_vector};

    #[test]
    fn full_mask_copies() {
        let img = ComplexImage::new(vec![3, 4], random_vector::<f64>(12, 1)).unwrap();
        let mask = SamplingMask::full_grid(vec![3, 4], (0..12).collect()).unwrap();
        let data = apply_mask(&img, &mask).unwrap();
        assert_eq!(data.values, img.data());
        let back = adjoint_mask(&data, &[3, 4]).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn adjoint_then_apply_is_identity() {
        let mask = SamplingMask::full_grid(vec![10], vec![1, 4, 7]).unwrap();
        let data = KSpaceData::new(random_vector::<f64>(3, 2), vec![1, 4, 7]).unwrap();
        let full = adjoint_mask(&data, &[10]).unwrap();
        assert_eq!(apply_mask(&full, &mask).unwrap(), data);
    }

    #[test]
    fn single_index_on_delta_spectrum() {
        let mut spectrum = ComplexImage::<f64>::zeros(&[8]);
        spectrum.data_mut()[5] = Complex::new(2.0, -1.0);
        let mask = SamplingMask::full_grid(vec![8], vec![5]).unwrap();
        assert_eq!(
            apply_mask(&spectrum, &mask).unwrap().values,
            vec![Complex::new(2.0, -1.0)]
        );
    }

    #[test]
    fn out_of_range_and_duplicates_rejected() {
        assert!(MaskSelect::new(4, vec![4]).is_err());
        assert!(MaskSelect::new(4, vec![1, 1]).is_err());
        let data = KSpaceData::new(random_vector::<f64>(1, 1), vec![9]).unwrap();
        assert!(adjoint_mask(&data, &[4]).is_err());
    }

    #[test]
    fn plane_mask_replicated_over_readout() {
        let plane = SamplingMask::phase_encode_plane(vec![2, 3], vec![4]).unwrap();
        let img = ComplexImage::new(vec![2, 3, 5], random_vector::<f64>(30, 3)).unwrap();
        let data = apply_mask(&img, &plane).unwrap();
        assert_eq!(data.indices, (20..25).collect::<Vec<_>>());
    }

    #[test]
    fn select_adjoint() {
        let op = MaskSelect::new(50, vec![0, 3, 17, 49]).unwrap();
        assert!(adjoint_mismatch::<f64, _>(&op, 20, 1) < 1e-12);
    }
}
