//! Reconstruction error under model mismatch: measurements are simulated on
//! a grid `fine_factor` times finer than the reconstruction grid, with the
//! same physical chirp.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind};
use super::manifest::RunManifest;
use super::phase_transition::measurement_count;
use super::{crop_spectrum, fmt_f64, fmt_sci, mean_std, resample_amplitude, worker_pool, C64};
use crate::error::{Error, Result};
use crate::grid::{ChirpSpec, GridSpec};
use crate::noise::{add_noise, epsilon_squared, relative_error, sigma_from_snr, NoiseModel};
use crate::operators::{linear_schedule, SensingOperator};
use crate::phantom::Preset;
use crate::sampling::{draw_vds_mask, find_p_m, MaskMode, SamplingMask, VdsProfile};
use crate::solver::{solve_bp, ProblemKind, Regularizer};

/// Noise stream offset so masks and noise never share a seed.
const NOISE_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

/// One chirp setting with its simulated full-band data.
pub(crate) struct Scenario {
    pub label: String,
    pub w_bar: f64,
    pub chirp: ChirpSpec,
    pub grid: GridSpec,
    /// Noiseless data on every frequency of the modulation grid.
    pub spectrum: Vec<C64>,
}

/// Phantom on the reconstruction-comparison grid plus what is needed to
/// simulate measurements.
pub(crate) struct Truth {
    pub base: Vec<usize>,
    pub fine_base: Vec<usize>,
    pub fine: Vec<C64>,
    pub reference: Vec<C64>,
}

impl Truth {
    pub fn new(base: &[usize], fine_factor: usize) -> Result<Self> {
        let preset = match base.len() {
            2 => Preset::Shepp2d,
            3 => Preset::Shepp3d,
            _ => {
                return Err(Error::Config(format!(
                    "mismatch protocol needs a 2D or 3D grid, got {base:?}"
                )))
            }
        };
        let fine_base: Vec<usize> = base.iter().map(|n| n * fine_factor).collect();
        let fine = preset.render(Some(&fine_base))?.into_data();
        let reference = resample_amplitude(&fine, &fine_base, base)?;
        Ok(Self {
            base: base.to_vec(),
            fine_base,
            fine,
            reference,
        })
    }
}

/// The chirp seen by the fine grid: discrete rates divided by the factor,
/// readout schedules stretched over the finer readout axis.
fn fine_chirp(chirp: &ChirpSpec, factor: usize, nz: usize) -> ChirpSpec {
    let f = factor as f64;
    match chirp {
        ChirpSpec::Constant { .. } => chirp.scaled(1.0 / f),
        ChirpSpec::ReadoutVarying(rates) => {
            let nz_f = nz * factor;
            let stretched = (0..nz_f)
                .map(|m| {
                    let s = m as isize - (nz_f / 2) as isize;
                    let k = (s + (nz / 2) as isize).clamp(0, nz as isize - 1) as usize;
                    (rates[k].0 / f, rates[k].1 / f)
                })
                .collect();
            ChirpSpec::ReadoutVarying(stretched)
        }
    }
}

pub(crate) fn build_scenario(
    truth: &Truth,
    label: String,
    chirp: ChirpSpec,
    factor: usize,
) -> Result<Scenario> {
    let grid = GridSpec::with_unit_fov(&truth.base, &chirp)?;
    let nz = *truth.base.last().expect("non-empty grid");
    let fchirp = fine_chirp(&chirp, factor, nz);
    let fgrid = GridSpec::with_unit_fov(&truth.fine_base, &fchirp)?;
    let full = SamplingMask::all(fgrid.modulation().to_vec());
    let fine_op = SensingOperator::<f64>::new(
        &truth.fine_base,
        &truth.fine_base,
        fgrid.modulation(),
        &fchirp,
        &full,
    )?;
    let fine_spectrum = fine_op.spectrum(&truth.fine);
    let mut spectrum = crop_spectrum(&fine_spectrum, fgrid.modulation(), grid.modulation())?;
    let scale = (grid.recon().iter().product::<usize>() as f64
        / truth.fine_base.iter().product::<usize>() as f64)
        .sqrt();
    spectrum.iter_mut().for_each(|z| *z *= scale);
    let (wx, wy) = chirp.max_abs();
    Ok(Scenario {
        label,
        w_bar: wx.max(wy),
        chirp,
        grid,
        spectrum,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MismatchTrial {
    pub scenario: String,
    pub w_bar: f64,
    pub coverage: f64,
    pub snr: f64,
    pub trial: usize,
    pub seed: u64,
    pub m_target: usize,
    pub m_actual: usize,
    pub p: f64,
    pub beta: f64,
    pub sigma: f64,
    pub eps2: f64,
    pub chi2_final: f64,
    pub relative_error: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellSummary {
    pub scenario: String,
    pub w_bar: f64,
    pub coverage: f64,
    pub snr: f64,
    pub trials: usize,
    pub mean_error: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimalRate {
    pub coverage: f64,
    pub snr: f64,
    pub scenario: String,
    pub w_bar: f64,
    pub mean_error: f64,
}

#[derive(Clone, Debug)]
pub struct ErrorCurvesResult {
    pub kind: ExperimentKind,
    pub trials: Vec<MismatchTrial>,
    pub cells: Vec<CellSummary>,
    pub optimal: Vec<OptimalRate>,
    pub manifest: RunManifest,
}

impl ErrorCurvesResult {
    pub fn cell(&self, scenario: &str, coverage: f64, snr: f64) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.scenario == scenario && c.coverage == coverage && c.snr == snr)
    }

    fn prefix(&self) -> &'static str {
        match self.kind {
            ExperimentKind::VaryingChirp => "varying_chirp",
            _ => "error_curves",
        }
    }

    /// Writes `<prefix>.csv` (cell means), `<prefix>_trials.csv`,
    /// `<prefix>_wopt.csv` and the manifest.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let p = self.prefix();
        let mut w = csv::Writer::from_path(dir.join(format!("{p}.csv")))?;
        w.write_record([
            "scenario",
            "w_bar",
            "coverage",
            "snr",
            "trials",
            "mean_error",
            "std_error",
        ])?;
        for c in &self.cells {
            w.write_record([
                c.scenario.clone(),
                fmt_f64(c.w_bar),
                fmt_f64(c.coverage),
                fmt_f64(c.snr),
                c.trials.to_string(),
                fmt_sci(c.mean_error),
                fmt_sci(c.std_error),
            ])?;
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(dir.join(format!("{p}_trials.csv")))?;
        w.write_record([
            "scenario",
            "w_bar",
            "coverage",
            "snr",
            "trial",
            "seed",
            "M",
            "M_actual",
            "p",
            "beta",
            "sigma",
            "eps2",
            "chi2_final",
            "relative_error",
            "iterations",
            "converged",
        ])?;
        for t in &self.trials {
            w.write_record([
                t.scenario.clone(),
                fmt_f64(t.w_bar),
                fmt_f64(t.coverage),
                fmt_f64(t.snr),
                t.trial.to_string(),
                t.seed.to_string(),
                t.m_target.to_string(),
                t.m_actual.to_string(),
                fmt_f64(t.p),
                fmt_sci(t.beta),
                fmt_sci(t.sigma),
                fmt_sci(t.eps2),
                fmt_sci(t.chi2_final),
                fmt_sci(t.relative_error),
                t.iterations.to_string(),
                t.converged.to_string(),
            ])?;
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(dir.join(format!("{p}_wopt.csv")))?;
        w.write_record(["coverage", "snr", "scenario", "w_opt", "mean_error"])?;
        for o in &self.optimal {
            w.write_record([
                fmt_f64(o.coverage),
                fmt_f64(o.snr),
                o.scenario.clone(),
                fmt_f64(o.w_bar),
                fmt_sci(o.mean_error),
            ])?;
        }
        w.flush()?;
        self.manifest.write(dir)
    }
}

/// Mean relative error versus input SNR for each constant chirp rate of the
/// sweep, with the best rate `w̄_opt` per (coverage, SNR).
pub fn run_error_vs_snr(config: &ExperimentConfig) -> Result<ErrorCurvesResult> {
    if config.kind != ExperimentKind::ErrorCurves {
        return Err(Error::Config(format!(
            "expected an error-curves config, got {}",
            config.kind
        )));
    }
    config.validate()?;
    let started = Instant::now();
    let truth = Truth::new(&config.grid, config.fine_factor)?;
    let scenarios = config
        .w_bars
        .iter()
        .map(|&w| {
            build_scenario(
                &truth,
                fmt_f64(w),
                ChirpSpec::isotropic(w),
                config.fine_factor,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let setup = started.elapsed().as_secs_f64();
    run_protocol(config, &truth, &scenarios, started, setup)
}

/// Same protocol with a readout-varying chirp against the unchirped baseline.
pub fn run_varying_chirp_validation(config: &ExperimentConfig) -> Result<ErrorCurvesResult> {
    if config.kind != ExperimentKind::VaryingChirp {
        return Err(Error::Config(format!(
            "expected a varying-chirp config, got {}",
            config.kind
        )));
    }
    config.validate()?;
    let started = Instant::now();
    let truth = Truth::new(&config.grid, config.fine_factor)?;
    let nz = config.grid[2];
    let s = config.rate_scale;
    let first = (config.schedule_first.0 * s, config.schedule_first.1 * s);
    let last = (config.schedule_last.0 * s, config.schedule_last.1 * s);
    let scenarios = vec![
        build_scenario(&truth, "none".into(), ChirpSpec::none(), config.fine_factor)?,
        build_scenario(
            &truth,
            "linear".into(),
            linear_schedule(first, last, nz),
            config.fine_factor,
        )?,
    ];
    let setup = started.elapsed().as_secs_f64();
    run_protocol(config, &truth, &scenarios, started, setup)
}

fn run_protocol(
    config: &ExperimentConfig,
    truth: &Truth,
    scenarios: &[Scenario],
    started: Instant,
    setup: f64,
) -> Result<ErrorCurvesResult> {
    if config.problem != ProblemKind::Tv {
        return Err(Error::Config(
            "the mismatch protocol reconstructs with the tv problem".into(),
        ));
    }
    let plane: Vec<usize> = truth.base[..2].to_vec();
    let plane_len: usize = plane.iter().product();
    let mut profiles = BTreeMap::new();
    for (ci, &c) in config.coverages.iter().enumerate() {
        let m = measurement_count(c, plane_len);
        let (p, beta) = find_p_m(m, &plane)?;
        profiles.insert(ci, (m, VdsProfile::for_grid(p, beta, &plane)?));
    }

    let mut jobs = Vec::new();
    for ci in 0..config.coverages.len() {
        for si in 0..config.snrs.len() {
            for sc in 0..scenarios.len() {
                for t in 0..config.trials {
                    jobs.push((ci, si, sc, t));
                }
            }
        }
    }
    let pool = worker_pool()?;
    let trials = pool.install(|| {
        jobs.par_iter()
            .map(|&(ci, si, sc, t)| {
                let (m, profile) = &profiles[&ci];
                mismatch_trial(
                    config,
                    truth,
                    &scenarios[sc],
                    config.coverages[ci],
                    config.snrs[si],
                    *m,
                    profile,
                    t,
                )
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut cells = Vec::new();
    let mut optimal = Vec::new();
    for &c in &config.coverages {
        for &snr in &config.snrs {
            let mut best: Option<OptimalRate> = None;
            for sc in scenarios {
                let errors: Vec<f64> = trials
                    .iter()
                    .filter(|t| t.scenario == sc.label && t.coverage == c && t.snr == snr)
                    .map(|t| t.relative_error)
                    .collect();
                let (mean, std) = mean_std(&errors);
                cells.push(CellSummary {
                    scenario: sc.label.clone(),
                    w_bar: sc.w_bar,
                    coverage: c,
                    snr,
                    trials: errors.len(),
                    mean_error: mean,
                    std_error: std,
                });
                if best.as_ref().is_none_or(|b| mean < b.mean_error) {
                    best = Some(OptimalRate {
                        coverage: c,
                        snr,
                        scenario: sc.label.clone(),
                        w_bar: sc.w_bar,
                        mean_error: mean,
                    });
                }
            }
            optimal.extend(best);
        }
    }
    let mut manifest = RunManifest::new(config);
    manifest.timings.push(("setup".into(), setup));
    manifest
        .timings
        .push(("total".into(), started.elapsed().as_secs_f64()));
    let prefix = if config.kind == ExperimentKind::VaryingChirp {
        "varying_chirp"
    } else {
        "error_curves"
    };
    manifest.outputs = vec![
        format!("{prefix}.csv"),
        format!("{prefix}_trials.csv"),
        format!("{prefix}_wopt.csv"),
    ];
    Ok(ErrorCurvesResult {
        kind: config.kind,
        trials,
        cells,
        optimal,
        manifest,
    })
}

/// Mask on the base band of the phase-encode plane, moved onto the
/// modulation grid and replicated along the readout axis in 3D.
pub(crate) fn acquisition_mask(plane_mask: &SamplingMask, grid: &GridSpec) -> Result<SamplingMask> {
    let modulation = grid.modulation();
    let embedded = plane_mask.embed(&modulation[..2])?;
    if modulation.len() == 3 {
        embedded.expand_phase_encode(modulation[2])
    } else {
        Ok(embedded)
    }
}

#[allow(clippy::too_many_arguments)]
fn mismatch_trial(
    config: &ExperimentConfig,
    truth: &Truth,
    scenario: &Scenario,
    coverage: f64,
    snr: f64,
    m: usize,
    profile: &VdsProfile,
    trial: usize,
) -> Result<MismatchTrial> {
    let seed = config.trial_seed(trial);
    let plane = &truth.base[..2];
    let mode = if truth.base.len() == 3 {
        MaskMode::PhaseEncodePlane
    } else {
        MaskMode::FullGrid
    };
    let plane_mask = draw_vds_mask(profile, plane, mode, m, seed)?;
    if plane_mask.is_empty() {
        return Err(Error::InfeasibleTarget(format!(
            "empty mask drawn for seed {seed}"
        )));
    }
    let mask = acquisition_mask(&plane_mask, &scenario.grid)?;
    let clean: Vec<C64> = mask
        .indices()
        .iter()
        .map(|&i| scenario.spectrum[i])
        .collect();
    let sigma = if snr.is_infinite() {
        0.0
    } else {
        sigma_from_snr(&truth.reference, snr)?
    };
    let nu = add_noise(&clean, &NoiseModel::new(sigma, seed ^ NOISE_STREAM)?);
    let eps2 = epsilon_squared(nu.len(), config.percentile)?;
    let radius = sigma * eps2.sqrt();
    let op = SensingOperator::<f64>::from_grid(&scenario.grid, &scenario.chirp, &mask)?;
    let report = solve_bp(
        Regularizer::Tv {
            dims: scenario.grid.recon(),
        },
        &op,
        &nu,
        radius,
        &config.solver,
    )?;
    let estimate = resample_amplitude(&report.image, scenario.grid.recon(), &truth.base)?;
    Ok(MismatchTrial {
        scenario: scenario.label.clone(),
        w_bar: scenario.w_bar,
        coverage,
        snr,
        trial,
        seed,
        m_target: m,
        m_actual: plane_mask.len(),
        p: profile.p,
        beta: profile.beta,
        sigma,
        eps2,
        chi2_final: if sigma > 0.0 {
            report.chi2(sigma)
        } else {
            f64::NAN
        },
        relative_error: relative_error(&truth.reference, &estimate)?,
        iterations: report.iterations,
        converged: report.converged,
    })
}
