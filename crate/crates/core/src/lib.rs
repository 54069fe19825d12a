//! Spread-spectrum compressive sensing for MRI: chirp-modulated Fourier
//! sensing operators, sparsity bases, coherence analysis, variable-density
//! sampling, a Douglas–Rachford basis-pursuit solver, and the reconstruction
//! experiments built on top of them.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`.

pub mod coherence;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod image;
pub mod io;
pub mod noise;
pub mod operators;
pub mod phantom;
pub mod sampling;
pub mod scalar;
pub mod solver;
pub mod sparsity;
pub mod vector;

pub use error::{Error, Result};
pub use grid::{ChirpSpec, FieldOfView, GridSpec};
pub use sampling::{MaskMode, SamplingMask};
pub use scalar::Real;

pub use num_complex::Complex;

/// Double-precision complex sample.
pub type C64 = Complex<f64>;
/// Double-precision complex image.
pub type Image = image::ComplexImage<f64>;
/// Double-precision masked k-space data.
pub type KSpace = operators::KSpaceData<f64>;
/// Double-precision sensing operator.
pub type Sensing = operators::SensingOperator<f64>;
