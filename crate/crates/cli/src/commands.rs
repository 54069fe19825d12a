use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use s2mri::coherence::{coherence_table, write_coherence_csv};
use s2mri::experiments::{
    parse_grid, run_error_vs_snr, run_high_resolution_demo, run_phase_transition,
    run_varying_chirp_validation, ExperimentConfig, ExperimentKind,
};
use s2mri::io::{read_complex_array, read_mask, write_complex_array, write_mask};
use s2mri::noise::epsilon_squared;
use s2mri::operators::{linear_schedule, SensingOperator};
use s2mri::phantom::Preset;
use s2mri::sampling::{
    calibrate_beta, draw_uniform_mask, draw_vds_mask, find_p_m, MaskMode, SamplingMask, VdsProfile,
};
use s2mri::solver::{solve_bp, ProblemKind, Regularizer, SolverOptions};
use s2mri::sparsity::{BasisKind, SparsityBasis};
use s2mri::{ChirpSpec, GridSpec, Image};

pub enum CliError {
    /// Bad arguments or configuration; exit code 1.
    Usage(String),
    /// Failure while running; exit code 2.
    Runtime(s2mri::Error),
}

impl From<s2mri::Error> for CliError {
    fn from(e: s2mri::Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

/// Usage errors for anything caused by the arguments themselves.
fn arg<T>(r: s2mri::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError::Usage(e.to_string()))
}

#[derive(Parser, Debug)]
#[command(
    name = "s2mri",
    version,
    about = "Spread-spectrum compressed-sensing MRI toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render a phantom to an S2CX file.
    Phantom(PhantomArgs),
    /// Draw a k-space sampling mask to an S2MK file.
    Mask(MaskArgs),
    /// Coherence of the chirp-modulated sensing basis against each sparsity basis.
    CoherenceTable(CoherenceArgs),
    /// Basis-pursuit reconstruction from measured k-space data.
    Reconstruct(ReconstructArgs),
    /// Recovery probability sweep over measurement counts.
    PhaseTransition(ExperimentArgs),
    /// Reconstruction error versus input SNR for a sweep of chirp rates.
    ErrorCurves(ExperimentArgs),
    /// Readout-varying chirp against the unchirped baseline in 3D.
    VaryingChirp(ExperimentArgs),
    /// Full-coverage reconstruction on the extended grid plus its downsampled image.
    HighresDemo(ExperimentArgs),
}

#[derive(Args, Debug)]
struct PhantomArgs {
    /// Grid sizes such as 256, 128x128 or 64x64x64 (preset default when omitted).
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, value_parser = ["shepp2d", "shepp3d", "line256"])]
    preset: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Profile {
    Uniform,
    Vds,
}

#[derive(Args, Debug)]
struct MaskArgs {
    /// Base grid; for 3D grids the mask covers the phase-encode plane.
    #[arg(long)]
    grid: String,
    /// Fraction of candidate locations to select, in (0, 1].
    #[arg(long)]
    coverage: f64,
    #[arg(long, value_enum, default_value = "vds")]
    profile: Profile,
    /// Power of the density profile, or `auto` for the smallest p with β ≥ 0.
    #[arg(long, default_value = "auto")]
    p: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CoherenceArgs {
    #[arg(long, default_value_t = 256)]
    n: usize,
    /// Comma-separated chirp rates.
    #[arg(long = "w-bar", default_value = "0,0.1,0.3,0.5", value_delimiter = ',')]
    w_bar: Vec<f64>,
    /// Comma-separated bases.
    #[arg(long, default_value = "dirac,haar,fourier", value_delimiter = ',')]
    bases: Vec<String>,
    /// CSV destination (standard output when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReconstructArgs {
    /// Measurements as a 1D S2CX array ordered like the mask indices.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    mask: PathBuf,
    /// Chirp: `w`, `wx,wy`, or `linear:wx0,wy0:wx1,wy1` for a readout schedule.
    #[arg(long, default_value = "0")]
    chirp: String,
    /// Base grid (defaults to the mask grid; required for phase-encode masks).
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, default_value = "tv", value_parser = ["l1", "tv"])]
    problem: String,
    #[arg(long, default_value = "haar")]
    basis: String,
    /// Fidelity radius, or `auto` for sigma·sqrt(ε²(M′)).
    #[arg(long, default_value = "auto")]
    eps: String,
    /// Per-part noise standard deviation used by `--eps auto`.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0.99)]
    percentile: f64,
    #[arg(long = "max-iter", default_value_t = 500)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 0.01)]
    gamma: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// key = value configuration file (built-in defaults when omitted).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "out-dir")]
    out_dir: PathBuf,
    /// Overrides the configured master seed.
    #[arg(long)]
    seed: Option<u64>,
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Phantom(a) => phantom(a),
        Command::Mask(a) => mask(a),
        Command::CoherenceTable(a) => coherence(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::PhaseTransition(a) => experiment(ExperimentKind::PhaseTransition, a),
        Command::ErrorCurves(a) => experiment(ExperimentKind::ErrorCurves, a),
        Command::VaryingChirp(a) => experiment(ExperimentKind::VaryingChirp, a),
        Command::HighresDemo(a) => experiment(ExperimentKind::HighresDemo, a),
    }
}

fn dims_label(dims: &[usize]) -> String {
    dims.iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join("x")
}

fn phantom(a: PhantomArgs) -> CliResult<()> {
    let preset: Preset = arg(a.preset.parse())?;
    let grid = a.grid.as_deref().map(parse_grid).transpose();
    let grid = arg(grid)?;
    let image = arg(preset.render(grid.as_deref()))?;
    write_complex_array(&a.out, &image)?;
    println!("wrote {} ({})", a.out.display(), dims_label(image.dims()));
    Ok(())
}

fn mask(a: MaskArgs) -> CliResult<()> {
    let grid = arg(parse_grid(&a.grid))?;
    if !(a.coverage > 0.0 && a.coverage <= 1.0) {
        return usage(format!("--coverage must lie in (0, 1], got {}", a.coverage));
    }
    let (dims, mode) = match grid.len() {
        3 => (grid[..2].to_vec(), MaskMode::PhaseEncodePlane),
        _ => (grid.clone(), MaskMode::FullGrid),
    };
    let n: usize = dims.iter().product();
    let target = ((a.coverage * n as f64).round() as usize).clamp(1, n);
    let mask = match a.profile {
        Profile::Uniform => draw_uniform_mask(target, &dims, mode, a.seed)?,
        Profile::Vds => {
            let (p, beta) = if a.p == "auto" {
                find_p_m(target, &dims)?
            } else {
                let p: f64 = a.p.parse().map_err(|_| {
                    CliError::Usage(format!("--p must be `auto` or a number, got '{}'", a.p))
                })?;
                (p, calibrate_beta(p, target, &dims)?)
            };
            let profile = VdsProfile::for_grid(p, beta, &dims)?;
            draw_vds_mask(&profile, &dims, mode, target, a.seed)?
        }
    };
    write_mask(&a.out, &mask)?;
    let meta = mask.metadata();
    println!("seed: {}", a.seed);
    println!(
        "wrote {} ({} of {} locations, target {}, p {}, beta {})",
        a.out.display(),
        mask.len(),
        n,
        target,
        meta.p,
        meta.beta
    );
    Ok(())
}

fn coherence(a: CoherenceArgs) -> CliResult<()> {
    let bases = a
        .bases
        .iter()
        .map(|b| b.parse::<BasisKind>())
        .collect::<s2mri::Result<Vec<_>>>();
    let bases = arg(bases)?;
    let rows = coherence_table(&bases, &a.w_bar, a.n)?;
    match &a.out {
        Some(path) => write_coherence_csv(BufWriter::new(File::create(path)?), &rows)?,
        None => write_coherence_csv(io::stdout().lock(), &rows)?,
    }
    Ok(())
}

fn parse_pair(s: &str) -> Option<(f64, f64)> {
    let mut it = s.split(',').map(|v| v.trim().parse::<f64>());
    match (it.next(), it.next(), it.next()) {
        (Some(Ok(a)), None, None) => Some((a, a)),
        (Some(Ok(a)), Some(Ok(b)), None) => Some((a, b)),
        _ => None,
    }
}

fn parse_chirp(s: &str, grid: &[usize]) -> CliResult<ChirpSpec> {
    let bad = || CliError::Usage(format!("cannot parse --chirp '{s}'"));
    if let Some(rest) = s.strip_prefix("linear:") {
        let (first, last) = rest.split_once(':').ok_or_else(bad)?;
        if grid.len() != 3 {
            return usage("a linear readout schedule needs a 3D grid");
        }
        let first = parse_pair(first).ok_or_else(bad)?;
        let last = parse_pair(last).ok_or_else(bad)?;
        return Ok(linear_schedule(first, last, grid[2]));
    }
    let (wx, wy) = parse_pair(s).ok_or_else(bad)?;
    Ok(ChirpSpec::Constant { wx, wy })
}

/// Puts a mask onto the modulation grid: base-band masks are embedded,
/// phase-encode masks are then replicated along the readout axis.
fn acquisition_mask(mask: &SamplingMask, grid: &GridSpec) -> CliResult<SamplingMask> {
    let modulation = grid.modulation();
    match mask.mode() {
        MaskMode::PhaseEncodePlane => {
            let plane = if mask.dims() == &modulation[..2] {
                mask.clone()
            } else {
                mask.embed(&modulation[..2])?
            };
            Ok(plane.expand_phase_encode(modulation[2])?)
        }
        MaskMode::FullGrid if mask.dims() == modulation => Ok(mask.clone()),
        MaskMode::FullGrid => Ok(mask.embed(modulation)?),
    }
}

fn reconstruct(a: ReconstructArgs) -> CliResult<()> {
    let mask = read_mask(&a.mask)?;
    let data = read_complex_array(&a.data)?;
    let base = match (&a.grid, mask.mode()) {
        (Some(g), _) => arg(parse_grid(g))?,
        (None, MaskMode::FullGrid) => mask.dims().to_vec(),
        (None, MaskMode::PhaseEncodePlane) => {
            return usage("--grid is required with a phase-encode mask")
        }
    };
    let chirp = parse_chirp(&a.chirp, &base)?;
    let grid = arg(GridSpec::with_unit_fov(&base, &chirp))?;
    let mask = acquisition_mask(&mask, &grid)?;
    if data.dims().len() != 1 || data.len() != mask.len() {
        return usage(format!(
            "data has shape {:?} but the mask selects {} samples",
            data.dims(),
            mask.len()
        ));
    }
    let epsilon = if a.eps == "auto" {
        a.sigma * epsilon_squared(mask.len(), a.percentile)?.sqrt()
    } else {
        a.eps.parse::<f64>().map_err(|_| {
            CliError::Usage(format!("--eps must be `auto` or a number, got '{}'", a.eps))
        })?
    };
    let problem: ProblemKind = arg(a.problem.parse())?;
    let options = SolverOptions {
        max_iter: a.max_iter,
        tol: a.tol,
        gamma: a.gamma,
        ..SolverOptions::default()
    };
    let op = SensingOperator::<f64>::from_grid(&grid, &chirp, &mask)?;
    let recon = grid.recon().to_vec();
    let report = match problem {
        ProblemKind::L1Synthesis => {
            let kind: BasisKind = arg(a.basis.parse())?;
            let basis = SparsityBasis::<f64>::new(kind, &recon)?;
            solve_bp(
                Regularizer::L1 { basis: &basis },
                &op,
                data.data(),
                epsilon,
                &options,
            )?
        }
        ProblemKind::Tv => solve_bp(
            Regularizer::Tv { dims: &recon },
            &op,
            data.data(),
            epsilon,
            &options,
        )?,
    };
    write_complex_array(&a.out, &Image::new(recon.clone(), report.image)?)?;
    println!(
        "wrote {} ({}), iterations {}, residual {:.6e}, epsilon {:.6e}, converged {}",
        a.out.display(),
        dims_label(&recon),
        report.iterations,
        report.residual_norm,
        report.epsilon,
        report.converged
    );
    Ok(())
}

fn experiment(kind: ExperimentKind, a: ExperimentArgs) -> CliResult<()> {
    let mut config = match &a.config {
        Some(path) => match ExperimentConfig::from_file(kind, path) {
            Ok(c) => c,
            Err(s2mri::Error::Io(e)) => return Err(CliError::Runtime(e.into())),
            Err(e) => return usage(e.to_string()),
        },
        None => ExperimentConfig::defaults(kind),
    };
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    arg(config.validate())?;
    println!("seed: {}", config.seed);
    let out: &Path = &a.out_dir;
    match kind {
        ExperimentKind::PhaseTransition => run_phase_transition(&config)?.write(out)?,
        ExperimentKind::ErrorCurves => run_error_vs_snr(&config)?.write(out)?,
        ExperimentKind::VaryingChirp => run_varying_chirp_validation(&config)?.write(out)?,
        ExperimentKind::HighresDemo => run_high_resolution_demo(&config)?.write(out)?,
    }
    println!("wrote results to {}", out.display());
    io::stdout().flush()?;
    Ok(())
}
