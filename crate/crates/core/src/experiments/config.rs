use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::solver::{ProblemKind, SolverOptions};
use crate::sparsity::BasisKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    PhaseTransition,
    ErrorCurves,
    VaryingChirp,
    HighresDemo,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::PhaseTransition => "phase-transition",
            ExperimentKind::ErrorCurves => "error-curves",
            ExperimentKind::VaryingChirp => "varying-chirp",
            ExperimentKind::HighresDemo => "highres-demo",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "phase-transition" => Ok(ExperimentKind::PhaseTransition),
            "error-curves" => Ok(ExperimentKind::ErrorCurves),
            "varying-chirp" => Ok(ExperimentKind::VaryingChirp),
            "highres-demo" => Ok(ExperimentKind::HighresDemo),
            other => Err(Error::Config(format!("unknown experiment kind '{other}'"))),
        }
    }
}

/// Everything an experiment run needs. Built from defaults for the kind,
/// overridden by a `key = value` file.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Base grid sizes `N`.
    pub grid: Vec<usize>,
    pub bases: Vec<BasisKind>,
    pub problem: ProblemKind,
    /// Constant chirp rates `w̄` to sweep.
    pub w_bars: Vec<f64>,
    /// Measurement counts as fractions of the base grid (or phase-encode plane).
    pub coverages: Vec<f64>,
    /// Input SNRs; infinity means noiseless.
    pub snrs: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Sparsity `K` of the phase-transition signals.
    pub sparsity: usize,
    pub percentile: f64,
    /// Oversampling factor of the measurement grid in the mismatch protocol.
    pub fine_factor: usize,
    /// Readout schedule end points `(w̄_x, w̄_y)` before `rate_scale`.
    pub schedule_first: (f64, f64),
    pub schedule_last: (f64, f64),
    pub rate_scale: f64,
    pub solver: SolverOptions,
}

const KEYS: &[&str] = &[
    "kind",
    "grid",
    "bases",
    "problem",
    "w_bar",
    "coverages",
    "snr",
    "trials",
    "seed",
    "sparsity",
    "percentile",
    "fine_factor",
    "schedule_first",
    "schedule_last",
    "rate_scale",
    "max_iter",
    "tol",
    "gamma",
    "relaxation",
    "cg_tol",
    "cg_max_iter",
    "tv_iterations",
];

impl ExperimentConfig {
    pub fn defaults(kind: ExperimentKind) -> Self {
        let base = Self {
            kind,
            grid: vec![128, 128],
            bases: vec![BasisKind::Haar],
            problem: ProblemKind::Tv,
            w_bars: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
            coverages: vec![0.2],
            snrs: (1..=6).map(|j| 2f64.powi(j)).collect(),
            trials: 10,
            seed: 1,
            sparsity: 25,
            percentile: 0.99,
            fine_factor: 2,
            schedule_first: (0.6, -0.6),
            schedule_last: (0.2, -0.2),
            rate_scale: 0.5,
            solver: SolverOptions {
                gamma: 0.01,
                tv_iterations: 10,
                ..SolverOptions::default()
            },
        };
        match kind {
            ExperimentKind::PhaseTransition => Self {
                grid: vec![256],
                bases: BasisKind::ALL.to_vec(),
                problem: ProblemKind::L1Synthesis,
                w_bars: vec![0.0, 0.1, 0.3, 0.5],
                coverages: (1..=12).map(|j| j as f64 / 12.0).collect(),
                snrs: vec![f64::INFINITY],
                trials: 100,
                solver: SolverOptions::phase_transition(),
                ..base
            },
            ExperimentKind::ErrorCurves => base,
            ExperimentKind::VaryingChirp => Self {
                grid: vec![64, 64, 64],
                coverages: vec![0.15, 0.25, 0.5],
                snrs: vec![32.0],
                trials: 5,
                ..base
            },
            ExperimentKind::HighresDemo => Self {
                w_bars: vec![0.3],
                coverages: vec![1.0],
                snrs: vec![f64::INFINITY],
                trials: 1,
                ..base
            },
        }
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn parse(kind: ExperimentKind, text: &str) -> Result<Self> {
        let mut cfg = Self::defaults(kind);
        let mut seen = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if seen.insert(key.to_string(), lineno + 1).is_some() {
                return Err(Error::Config(format!(
                    "line {}: duplicate key '{key}'",
                    lineno + 1
                )));
            }
            cfg.set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {}", lineno + 1, strip(e))))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(kind: ExperimentKind, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(kind, &text)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "kind" => {
                let kind: ExperimentKind = value.parse()?;
                if kind != self.kind {
                    return Err(Error::Config(format!(
                        "config is for {kind}, not {}",
                        self.kind
                    )));
                }
            }
            "grid" => self.grid = parse_grid(value)?,
            "bases" => self.bases = parse_list(value)?,
            "problem" => self.problem = value.parse()?,
            "w_bar" => self.w_bars = parse_list(value)?,
            "coverages" => self.coverages = parse_list(value)?,
            "snr" => self.snrs = parse_list(value)?,
            "trials" => self.trials = parse_one(value)?,
            "seed" => self.seed = parse_one(value)?,
            "sparsity" => self.sparsity = parse_one(value)?,
            "percentile" => self.percentile = parse_one(value)?,
            "fine_factor" => self.fine_factor = parse_one(value)?,
            "schedule_first" => self.schedule_first = parse_pair(value)?,
            "schedule_last" => self.schedule_last = parse_pair(value)?,
            "rate_scale" => self.rate_scale = parse_one(value)?,
            "max_iter" => self.solver.max_iter = parse_one(value)?,
            "tol" => self.solver.tol = parse_one(value)?,
            "gamma" => self.solver.gamma = parse_one(value)?,
            "relaxation" => self.solver.relaxation = parse_one(value)?,
            "cg_tol" => self.solver.cg_tol = parse_one(value)?,
            "cg_max_iter" => self.solver.cg_max_iter = parse_one(value)?,
            "tv_iterations" => self.solver.tv_iterations = parse_one(value)?,
            other => {
                return Err(Error::Config(format!(
                    "unknown key '{other}' (known: {})",
                    KEYS.join(", ")
                )));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.grid.is_empty() || self.grid.len() > 3 || self.grid.contains(&0) {
            return fail(format!(
                "grid must have 1 to 3 positive sizes, got {:?}",
                self.grid
            ));
        }
        let dims_ok = match self.kind {
            ExperimentKind::PhaseTransition => self.grid.len() == 1,
            ExperimentKind::ErrorCurves => self.grid.len() == 2,
            ExperimentKind::VaryingChirp => self.grid.len() == 3,
            ExperimentKind::HighresDemo => self.grid.len() >= 2,
        };
        if !dims_ok {
            return fail(format!(
                "grid {:?} has the wrong rank for {}",
                self.grid, self.kind
            ));
        }
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.coverages.is_empty() || self.coverages.iter().any(|c| !(*c > 0.0 && *c <= 1.0)) {
            return fail(format!(
                "coverages must lie in (0, 1], got {:?}",
                self.coverages
            ));
        }
        if self.w_bars.is_empty() || self.w_bars.iter().any(|w| !w.is_finite()) {
            return fail("w_bar needs at least one finite rate".into());
        }
        if self.snrs.is_empty() || self.snrs.iter().any(|s| !(*s > 0.0)) {
            return fail(format!("snr values must be positive, got {:?}", self.snrs));
        }
        if self.bases.is_empty() {
            return fail("bases must not be empty".into());
        }
        if self.sparsity == 0
            || (self.kind == ExperimentKind::PhaseTransition && self.sparsity > self.grid[0])
        {
            return fail(format!(
                "sparsity {} outside 1..={}",
                self.sparsity, self.grid[0]
            ));
        }
        if !(self.percentile > 0.0 && self.percentile < 1.0) {
            return fail(format!(
                "percentile must lie in (0, 1), got {}",
                self.percentile
            ));
        }
        if self.fine_factor == 0 {
            return fail("fine_factor must be at least 1".into());
        }
        if !(self.rate_scale.is_finite()) {
            return fail("rate_scale must be finite".into());
        }
        self.solver.validate().map_err(|e| Error::Config(strip(e)))
    }

    /// `key = value` lines that reproduce this configuration.
    pub fn snapshot(&self) -> Vec<(String, String)> {
        let list = |v: &[f64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let pair = |p: (f64, f64)| format!("{},{}", p.0, p.1);
        let s = &self.solver;
        vec![
            ("kind", self.kind.to_string()),
            (
                "grid",
                self.grid
                    .iter()
                    .map(|n| n.to_string())
                    .collect::<Vec<_>>()
                    .join("x"),
            ),
            (
                "bases",
                self.bases
                    .iter()
                    .map(|b| b.name())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("problem", self.problem.to_string()),
            ("w_bar", list(&self.w_bars)),
            ("coverages", list(&self.coverages)),
            ("snr", list(&self.snrs)),
            ("trials", self.trials.to_string()),
            ("seed", self.seed.to_string()),
            ("sparsity", self.sparsity.to_string()),
            ("percentile", self.percentile.to_string()),
            ("fine_factor", self.fine_factor.to_string()),
            ("schedule_first", pair(self.schedule_first)),
            ("schedule_last", pair(self.schedule_last)),
            ("rate_scale", self.rate_scale.to_string()),
            ("max_iter", s.max_iter.to_string()),
            ("tol", s.tol.to_string()),
            ("gamma", s.gamma.to_string()),
            ("relaxation", s.relaxation.to_string()),
            ("cg_tol", s.cg_tol.to_string()),
            ("cg_max_iter", s.cg_max_iter.to_string()),
            ("tv_iterations", s.tv_iterations.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    /// Seed of trial `t`; identical across cells so cells are paired.
    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.seed.wrapping_add(trial as u64)
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::Config(m) | Error::InvalidArgument(m) => m,
        other => other.to_string(),
    }
}

fn parse_one<T: FromStr>(value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse '{value}'")))
}

fn parse_list<T: FromStr>(value: &str) -> Result<Vec<T>> {
    value.split(',').map(parse_one).collect()
}

fn parse_pair(value: &str) -> Result<(f64, f64)> {
    match parse_list::<f64>(value)?.as_slice() {
        [a] => Ok((*a, *a)),
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::Config(format!(
            "expected one or two rates, got '{value}'"
        ))),
    }
}

/// Grid sizes written `256`, `128x128` or `64x64x64`.
pub fn parse_grid(value: &str) -> Result<Vec<usize>> {
    value.split(['x', 'X', ',']).map(parse_one).collect()
}
