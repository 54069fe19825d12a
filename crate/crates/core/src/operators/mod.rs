//! Linear measurement operators and their exact adjoints.

mod chirp;
mod fourier;
mod lines;
mod mask;
mod resample;
mod schedule;
mod sensing;

pub use chirp::{chirp_factors, chirp_modulate, schedule_plane_index, ChirpModulation, Direction};
pub use fourier::{fourier_forward, fourier_inverse, frequency_index, signed_frequency, Fourier};
pub use mask::{adjoint_mask, apply_mask, KSpaceData, MaskSelect};
pub use resample::{downsample, upsample, Resample};
pub use schedule::{chirp_rate_schedule, linear_schedule, ShimReadout};
pub use sensing::{
    sensing_adjoint, sensing_adjoint_varying, sensing_forward, sensing_forward_varying,
    SensingOperator,
};

pub(crate) use lines::for_each_line;

use num_complex::Complex;

use crate::scalar::Real;

/// A linear map between flat complex vectors with an exact adjoint.
pub trait LinearOperator<T: Real>: Send + Sync {
    fn input_len(&self) -> usize;
    fn output_len(&self) -> usize;
    fn forward(&self, x: &[Complex<T>]) -> Vec<Complex<T>>;
    fn adjoint(&self, y: &[Complex<T>]) -> Vec<Complex<T>>;
}

impl<T: Real, O: LinearOperator<T> + ?Sized> LinearOperator<T> for &O {
    fn input_len(&self) -> usize {
        (**self).input_len()
    }
    fn output_len(&self) -> usize {
        (**self).output_len()
    }
    fn forward(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        (**self).forward(x)
    }
    fn adjoint(&self, y: &[Complex<T>]) -> Vec<Complex<T>> {
        (**self).adjoint(y)
    }
}

/// `outer ∘ inner`.
pub struct Composed<A, B> {
    pub outer: A,
    pub inner: B,
}

impl<A, B> Composed<A, B> {
    pub fn new(outer: A, inner: B) -> Self {
        Self { outer, inner }
    }
}

impl<T: Real, A: LinearOperator<T>, B: LinearOperator<T>> LinearOperator<T> for Composed<A, B> {
    fn input_len(&self) -> usize {
        self.inner.input_len()
    }
    fn output_len(&self) -> usize {
        self.outer.output_len()
    }
    fn forward(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        self.outer.forward(&self.inner.forward(x))
    }
    fn adjoint(&self, y: &[Complex<T>]) -> Vec<Complex<T>> {
        self.inner.adjoint(&self.outer.adjoint(y))
    }
}

/// Randomized adjoint checks shared by unit, integration and acceptance tests.
pub mod testing {
    use num_complex::Complex;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    use super::LinearOperator;
    use crate::scalar::Real;
    use crate::vector::{dot, norm};

    /// Vector of i.i.d. standard complex Gaussian entries.
    pub fn random_vector<T: Real>(n: usize, seed: u64) -> Vec<Complex<T>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex::new(T::lit(re), T::lit(im))
            })
            .collect()
    }

    /// Largest `|⟨A x, y⟩ - ⟨x, A† y⟩| / (‖x‖ ‖y‖)` over `probes` random pairs.
    pub fn adjoint_mismatch<T: Real, O: LinearOperator<T> + ?Sized>(
        op: &O,
        probes: usize,
        seed: u64,
    ) -> f64 {
        (0..probes as u64)
            .map(|p| {
                let x =
                    random_vector::<T>(op.input_len(), seed.wrapping_mul(7919).wrapping_add(2 * p));
                let y = random_vector::<T>(
                    op.output_len(),
                    seed.wrapping_mul(7919).wrapping_add(2 * p + 1),
                );
                let lhs = dot(&op.forward(&x), &y);
                let rhs = dot(&x, &op.adjoint(&y));
                ((lhs - rhs).norm() / (norm(&x) * norm(&y))).as_f64()
            })
            .fold(0.0, f64::max)
    }
}
