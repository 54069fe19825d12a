//! Measurement noise at a prescribed input SNR, the χ² data-fidelity
//! statistic and its percentile bound, and reconstruction error metrics.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::vector::{distance, norm};

type C64 = Complex<f64>;

/// Relative error at or below which a reconstruction counts as recovered.
pub const RECOVERY_THRESHOLD: f64 = 1e-3;

/// Percentile used for the data-fidelity bound unless configured otherwise.
pub const DEFAULT_PERCENTILE: f64 = 0.99;

/// i.i.d. zero-mean Gaussian noise with standard deviation `sigma` on each
/// real and imaginary part.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(format!(
                "noise level must be finite and non-negative, got {sigma}"
            )));
        }
        Ok(Self { sigma, seed })
    }
}

/// `σ = mean|ρ_i| / snr`.
pub fn sigma_from_snr(signal: &[C64], snr: f64) -> Result<f64> {
    if !(snr > 0.0) {
        return Err(Error::invalid(format!("snr must be positive, got {snr}")));
    }
    if signal.is_empty() {
        return Err(Error::invalid("empty signal"));
    }
    let mean = signal.iter().map(|z| z.norm()).sum::<f64>() / signal.len() as f64;
    if mean == 0.0 {
        return Err(Error::invalid("zero signal has no defined snr"));
    }
    Ok(mean / snr)
}

/// Returns `values` plus noise drawn from `model`.
pub fn add_noise(values: &[C64], model: &NoiseModel) -> Vec<C64> {
    if model.sigma == 0.0 {
        return values.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    let normal = Normal::new(0.0, model.sigma).expect("validated sigma");
    values
        .iter()
        .map(|z| {
            let re = normal.sample(&mut rng);
            let im = normal.sample(&mut rng);
            z + C64::new(re, im)
        })
        .collect()
}

/// `χ² = Σ_b |n̄_b|² / σ²`.
pub fn chi2(residual: &[C64], sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::invalid(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    Ok(residual.iter().map(|z| z.norm_sqr()).sum::<f64>() / (sigma * sigma))
}

/// Percentile bound on χ² for `measurements` complex residuals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FidelityBound {
    pub measurements: usize,
    pub percentile: f64,
    pub eps2: f64,
}

impl FidelityBound {
    pub fn new(measurements: usize, percentile: f64) -> Result<Self> {
        Ok(Self {
            measurements,
            percentile,
            eps2: epsilon_squared(measurements, percentile)?,
        })
    }

    /// ℓ2 radius `σ ε` of the data-fidelity ball.
    pub fn radius(&self, sigma: f64) -> f64 {
        sigma * self.eps2.sqrt()
    }
}

/// `percentile` quantile of χ² with `2 M′` degrees of freedom, by the
/// Wilson–Hilferty cube approximation.
pub fn epsilon_squared(measurements: usize, percentile: f64) -> Result<f64> {
    if measurements == 0 {
        return Err(Error::invalid("need at least one measurement"));
    }
    if !(percentile > 0.0 && percentile < 1.0) {
        return Err(Error::invalid(format!(
            "percentile must lie in (0, 1), got {percentile}"
        )));
    }
    let k = 2.0 * measurements as f64;
    let h = 2.0 / (9.0 * k);
    let z = normal_quantile(percentile);
    Ok(k * (1.0 - h + z * h.sqrt()).max(0.0).powi(3))
}

/// Standard normal quantile (Acklam's rational approximation, relative
/// error below 1.2e-9).
pub fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383577518672690e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-3,
        3.224671290700398e-1,
        2.445134137142996,
        3.754408661907416,
    ];
    const LOW: f64 = 0.02425;

    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p < LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p > 1.0 - LOW {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// `‖ρ − ρ*‖₂ / ‖ρ‖₂`.
pub fn relative_error(reference: &[C64], estimate: &[C64]) -> Result<f64> {
    if reference.len() != estimate.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} vs {}",
            reference.len(),
            estimate.len()
        )));
    }
    let scale = norm(reference);
    if scale == 0.0 {
        return Err(Error::invalid("zero reference signal"));
    }
    Ok(distance(reference, estimate) / scale)
}

/// `‖ρ − ρ*‖₂ ≤ 10⁻³ ‖ρ‖₂`, inclusive up to rounding.
pub fn is_recovered(reference: &[C64], estimate: &[C64]) -> Result<bool> {
    Ok(relative_error(reference, estimate)? <= RECOVERY_THRESHOLD * (1.0 + 1e-9))
}
