use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind};
use super::manifest::RunManifest;
use super::{fmt_f64, fmt_sci, worker_pool, C64};
use crate::error::{Error, Result};
use crate::grid::{ChirpSpec, GridSpec};
use crate::noise::{is_recovered, relative_error};
use crate::operators::{LinearOperator, SensingOperator};
use crate::phantom::Preset;
use crate::sampling::{draw_uniform_mask, MaskMode};
use crate::solver::{solve_bp, Regularizer};
use crate::sparsity::{hard_threshold, BasisKind, SparsityBasis};

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryTrial {
    pub basis: BasisKind,
    pub w_bar: f64,
    pub m: usize,
    pub n_c: usize,
    pub trial: usize,
    pub seed: u64,
    pub relative_error: f64,
    pub recovered: bool,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryCell {
    pub basis: BasisKind,
    pub w_bar: f64,
    pub m: usize,
    pub trials: usize,
    pub recovered: usize,
}

impl RecoveryCell {
    pub fn probability(&self) -> f64 {
        self.recovered as f64 / self.trials as f64
    }
}

#[derive(Clone, Debug)]
pub struct PhaseTransitionResult {
    pub cells: Vec<RecoveryCell>,
    pub trials: Vec<RecoveryTrial>,
    pub manifest: RunManifest,
}

impl PhaseTransitionResult {
    pub fn cell(&self, basis: BasisKind, w_bar: f64, m: usize) -> Option<&RecoveryCell> {
        self.cells
            .iter()
            .find(|c| c.basis == basis && c.w_bar == w_bar && c.m == m)
    }

    /// Cells of one curve, ordered by `M`.
    pub fn curve(&self, basis: BasisKind, w_bar: f64) -> Vec<&RecoveryCell> {
        self.cells
            .iter()
            .filter(|c| c.basis == basis && c.w_bar == w_bar)
            .collect()
    }

    /// Writes `phase_transition.csv`, `phase_transition_trials.csv` and the manifest.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_path(dir.join("phase_transition.csv"))?;
        w.write_record([
            "basis",
            "w_bar",
            "M",
            "trials",
            "recovered_count",
            "probability",
        ])?;
        for c in &self.cells {
            w.write_record([
                c.basis.name().to_string(),
                fmt_f64(c.w_bar),
                c.m.to_string(),
                c.trials.to_string(),
                c.recovered.to_string(),
                fmt_f64(c.probability()),
            ])?;
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(dir.join("phase_transition_trials.csv"))?;
        w.write_record([
            "basis",
            "w_bar",
            "M",
            "N_c",
            "trial",
            "seed",
            "relative_error",
            "recovered",
            "iterations",
            "converged",
        ])?;
        for t in &self.trials {
            w.write_record([
                t.basis.name().to_string(),
                fmt_f64(t.w_bar),
                t.m.to_string(),
                t.n_c.to_string(),
                t.trial.to_string(),
                t.seed.to_string(),
                fmt_sci(t.relative_error),
                t.recovered.to_string(),
                t.iterations.to_string(),
                t.converged.to_string(),
            ])?;
        }
        w.flush()?;
        self.manifest.write(dir)
    }
}

/// Measurement count for a coverage of the base grid.
pub(crate) fn measurement_count(coverage: f64, n: usize) -> usize {
    ((coverage * n as f64).round() as usize).clamp(1, n)
}

/// Recovery probability of K-sparse test lines from uniformly subsampled
/// chirp-modulated Fourier measurements, per (basis, w̄, M).
pub fn run_phase_transition(config: &ExperimentConfig) -> Result<PhaseTransitionResult> {
    if config.kind != ExperimentKind::PhaseTransition {
        return Err(Error::Config(format!(
            "expected a phase-transition config, got {}",
            config.kind
        )));
    }
    config.validate()?;
    let started = Instant::now();
    let n = config.grid[0];
    let line = Preset::Line256.render(Some(&[n]))?.into_data();
    let mut signals = Vec::new();
    for &basis in &config.bases {
        let psi = SparsityBasis::<f64>::new(basis, &[n])?;
        let alpha = hard_threshold(&psi.analyze(&line)?, config.sparsity)?;
        signals.push((basis, psi.synthesize(&alpha)?));
    }
    let counts: Vec<usize> = config
        .coverages
        .iter()
        .map(|&c| measurement_count(c, n))
        .collect();

    let mut jobs = Vec::new();
    for (b, _) in signals.iter().enumerate() {
        for &w in &config.w_bars {
            for &m in &counts {
                for t in 0..config.trials {
                    jobs.push((b, w, m, t));
                }
            }
        }
    }
    let pool = worker_pool()?;
    let trials = pool.install(|| {
        jobs.par_iter()
            .map(|&(b, w, m, t)| {
                let (basis, rho) = &signals[b];
                recovery_trial(config, *basis, rho, w, m, t)
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut cells: Vec<RecoveryCell> = Vec::new();
    for t in &trials {
        match cells.last_mut() {
            Some(c) if c.basis == t.basis && c.w_bar == t.w_bar && c.m == t.m => {
                c.trials += 1;
                c.recovered += t.recovered as usize;
            }
            _ => cells.push(RecoveryCell {
                basis: t.basis,
                w_bar: t.w_bar,
                m: t.m,
                trials: 1,
                recovered: t.recovered as usize,
            }),
        }
    }
    let mut manifest = RunManifest::new(config);
    manifest
        .timings
        .push(("total".into(), started.elapsed().as_secs_f64()));
    manifest.outputs = vec![
        "phase_transition.csv".into(),
        "phase_transition_trials.csv".into(),
    ];
    Ok(PhaseTransitionResult {
        cells,
        trials,
        manifest,
    })
}

fn recovery_trial(
    config: &ExperimentConfig,
    basis: BasisKind,
    rho: &[C64],
    w_bar: f64,
    m: usize,
    trial: usize,
) -> Result<RecoveryTrial> {
    let n = rho.len();
    let chirp = ChirpSpec::isotropic(w_bar);
    let grid = GridSpec::with_unit_fov(&[n], &chirp)?;
    let n_c = grid.recon()[0];
    let seed = config.trial_seed(trial);
    let mask = draw_uniform_mask(m, &[n_c], MaskMode::FullGrid, seed)?;
    let op = SensingOperator::<f64>::band_limited(&grid, &chirp, &mask)?;
    let psi = SparsityBasis::<f64>::new(basis, &[n])?;
    let nu = op.forward(rho);
    let report = solve_bp(
        Regularizer::L1 { basis: &psi },
        &op,
        &nu,
        0.0,
        &config.solver,
    )?;
    Ok(RecoveryTrial {
        basis,
        w_bar,
        m,
        n_c,
        trial,
        seed,
        relative_error: relative_error(rho, &report.image)?,
        recovered: is_recovered(rho, &report.image)?,
        iterations: report.iterations,
        converged: report.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_sampling_always_recovers() {
        let text = "grid = 32\nbases = haar,dirac\nw_bar = 0\ncoverages = 1\ntrials = 2\nsparsity = 4\nmax_iter = 200";
        let cfg = ExperimentConfig::parse(ExperimentKind::PhaseTransition, text).unwrap();
        let res = run_phase_transition(&cfg).unwrap();
        assert_eq!(res.cells.len(), 2);
        assert!(res.cells.iter().all(|c| c.probability() == 1.0));
        assert_eq!(
            res.trials.iter().map(|t| t.seed).collect::<Vec<_>>(),
            vec![1, 2, 1, 2]
        );
    }

    #[test]
    fn counts_round_and_clamp() {
        assert_eq!(measurement_count(1.0 / 12.0, 256), 21);
        assert_eq!(measurement_count(0.5, 256), 128);
        assert_eq!(measurement_count(1e-6, 256), 1);
    }
}
