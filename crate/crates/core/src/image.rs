use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vector;

/// Complex samples on a rectangular grid, stored row-major (last index fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexImage<T> {
    dims: Vec<usize>,
    data: Vec<Complex<T>>,
}

impl<T: Real> ComplexImage<T> {
    pub fn new(dims: Vec<usize>, data: Vec<Complex<T>>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::invalid(format!("invalid image dimensions {dims:?}")));
        }
        let expected: usize = dims.iter().product();
        if data.len() != expected {
            return Err(Error::invalid(format!(
                "image {dims:?} needs {expected} samples, got {}",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: &[usize]) -> Self {
        let n = dims.iter().product();
        Self {
            dims: dims.to_vec(),
            data: vector::zeros(n),
        }
    }

    pub fn from_real(dims: Vec<usize>, values: &[T]) -> Result<Self> {
        Self::new(
            dims,
            values.iter().map(|&v| Complex::new(v, T::zero())).collect(),
        )
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex<T>> {
        self.data
    }

    pub fn norm(&self) -> T {
        vector::norm(&self.data)
    }

    pub fn is_finite(&self) -> bool {
        vector::all_finite(&self.data)
    }

    /// Flat row-major index of a multi-index.
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        flat_index(&self.dims, idx)
    }

    /// Replaces the samples, keeping the grid.
    pub fn with_data(&self, data: Vec<Complex<T>>) -> Result<Self> {
        Self::new(self.dims.clone(), data)
    }
}

pub fn flat_index(dims: &[usize], idx: &[usize]) -> usize {
    debug_assert_eq!(dims.len(), idx.len());
    dims.iter().zip(idx).fold(0, |acc, (&n, &i)| acc * n + i)
}

/// Inverse of [`flat_index`].
pub fn multi_index(dims: &[usize], mut flat: usize) -> Vec<usize> {
    let mut idx = vec![0; dims.len()];
    for d in (0..dims.len()).rev() {
        idx[d] = flat % dims[d];
        flat /= dims[d];
    }
    idx
}
