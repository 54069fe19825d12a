//! Reproducible experiment harnesses: recovery-probability sweeps, error
//! versus SNR with model mismatch, readout-varying chirp validation and the
//! high-resolution demonstration.

mod config;
mod highres;
mod manifest;
mod mismatch;
mod phase_transition;

pub use config::{parse_grid, ExperimentConfig, ExperimentKind};
pub use highres::{run_high_resolution_demo, HighresResult};
pub use manifest::RunManifest;
pub use mismatch::{
    run_error_vs_snr, run_varying_chirp_validation, CellSummary, ErrorCurvesResult, MismatchTrial,
    OptimalRate,
};
pub use phase_transition::{
    run_phase_transition, PhaseTransitionResult, RecoveryCell, RecoveryTrial,
};

use num_complex::Complex;
use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::error::{Error, Result};
use crate::image::{flat_index, multi_index};
use crate::operators::{frequency_index, signed_frequency, Resample};

type C64 = Complex<f64>;

/// Environment variable capping the number of worker threads (0 = auto).
pub const THREADS_ENV: &str = "S2_THREADS";

/// Worker pool sized by `S2_THREADS`.
pub fn worker_pool() -> Result<ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v.trim().parse::<usize>().map_err(|_| {
            Error::Config(format!(
                "{THREADS_ENV} must be a non-negative integer, got '{v}'"
            ))
        })?,
        _ => 0,
    };
    ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Sample mean and unbiased standard deviation (zero for a single sample).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Keeps the frequencies of a DFT-ordered spectrum on `from` that exist on
/// the smaller grid `to` (same frequency spacing).
pub fn crop_spectrum(spectrum: &[C64], from: &[usize], to: &[usize]) -> Result<Vec<C64>> {
    if from.len() != to.len() || from.iter().zip(to).any(|(f, t)| t > f) {
        return Err(Error::invalid(format!(
            "cannot crop spectrum {from:?} to {to:?}"
        )));
    }
    let len: usize = to.iter().product();
    Ok((0..len)
        .map(|flat| {
            let idx: Vec<usize> = multi_index(to, flat)
                .iter()
                .zip(to.iter().zip(from))
                .map(|(&k, (&n, &m))| frequency_index(signed_frequency(k, n), m))
                .collect();
            spectrum[flat_index(from, &idx)]
        })
        .collect())
}

/// Band-limited resampling that preserves sample amplitudes (rather than
/// the ℓ2 norm) between grids over the same field of view.
pub fn resample_amplitude(data: &[C64], from: &[usize], to: &[usize]) -> Result<Vec<C64>> {
    if from == to {
        return Ok(data.to_vec());
    }
    let factor = |a: &[usize], b: &[usize]| {
        (a.iter().product::<usize>() as f64 / b.iter().product::<usize>() as f64).sqrt()
    };
    if from.iter().zip(to).all(|(f, t)| t <= f) {
        let op = Resample::<f64>::new(to, from)?;
        let s = factor(to, from);
        Ok(op.downsample(data).into_iter().map(|z| z * s).collect())
    } else if from.iter().zip(to).all(|(f, t)| t >= f) {
        let op = Resample::<f64>::new(from, to)?;
        let s = factor(to, from);
        Ok(op.upsample(data).into_iter().map(|z| z * s).collect())
    } else {
        Err(Error::invalid(format!(
            "mixed resampling {from:?} -> {to:?}"
        )))
    }
}

fn fmt_f64(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v}")
    }
}

fn fmt_sci(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.9e}")
    } else {
        fmt_f64(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::testing::random_vector;

    #[test]
    fn unbiased_std() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_std(&[7.0]), (7.0, 0.0));
    }

    #[test]
    fn crop_matches_signed_frequencies() {
        let spec: Vec<C64> = (0..8).map(|k| C64::new(k as f64, 0.0)).collect();
        let out = crop_spectrum(&spec, &[8], &[4]).unwrap();
        assert_eq!(
            out.iter().map(|z| z.re).collect::<Vec<_>>(),
            vec![0.0, 1.0, 6.0, 7.0]
        );
        assert!(crop_spectrum(&spec, &[8], &[10]).is_err());
    }

    #[test]
    fn amplitude_resampling_keeps_constants() {
        let ones = vec![C64::new(1.0, 0.0); 16];
        let up = resample_amplitude(&ones, &[4, 4], &[8, 6]).unwrap();
        assert!(up.iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-12));
        let down = resample_amplitude(&up, &[8, 6], &[4, 4]).unwrap();
        assert!(down.iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-12));
        let x = random_vector::<f64>(12, 1);
        assert_eq!(resample_amplitude(&x, &[12], &[12]).unwrap(), x);
    }
}
