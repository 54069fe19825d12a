//! k-space sampling masks: uniform random selection and variable-density
//! (power-law profile) Bernoulli sampling.
//!
//! Mask indices are flat row-major indices in DFT order, i.e. index `k`
//! along a dimension of size `n` is signed frequency
//! [`signed_frequency(k, n)`](crate::operators::signed_frequency).

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::{flat_index, multi_index};
use crate::operators::{frequency_index, signed_frequency};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MaskMode {
    /// Indices address every dimension of the grid.
    FullGrid,
    /// Indices address the `(k_x, k_y)` plane; every readout frequency is
    /// implicitly acquired.
    PhaseEncodePlane,
}

/// How a mask was generated. Profile fields are NaN for uniform masks.
#[derive(Clone, Copy, Debug)]
pub struct MaskMetadata {
    pub p: f64,
    pub beta: f64,
    pub seed: u64,
    pub target: u64,
    pub actual: u64,
}

impl PartialEq for MaskMetadata {
    fn eq(&self, other: &Self) -> bool {
        self.p.to_bits() == other.p.to_bits()
            && self.beta.to_bits() == other.beta.to_bits()
            && (self.seed, self.target, self.actual) == (other.seed, other.target, other.actual)
    }
}

impl MaskMetadata {
    fn explicit(actual: usize) -> Self {
        Self {
            p: f64::NAN,
            beta: f64::NAN,
            seed: 0,
            target: actual as u64,
            actual: actual as u64,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplingMask {
    mode: MaskMode,
    dims: Vec<usize>,
    indices: Vec<usize>,
    meta: MaskMetadata,
}

impl SamplingMask {
    pub fn new(
        mode: MaskMode,
        dims: Vec<usize>,
        mut indices: Vec<usize>,
        meta: MaskMetadata,
    ) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::invalid(format!("invalid mask grid {dims:?}")));
        }
        if mode == MaskMode::PhaseEncodePlane && dims.len() != 2 {
            return Err(Error::invalid(
                "a phase-encode-plane mask indexes a 2D plane",
            ));
        }
        let len: usize = dims.iter().product();
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("mask indices must be unique"));
        }
        if let Some(&last) = indices.last() {
            if last >= len {
                return Err(Error::invalid(format!(
                    "mask index {last} out of range for grid {dims:?}"
                )));
            }
        }
        Ok(Self {
            mode,
            dims,
            indices,
            meta,
        })
    }

    pub fn full_grid(dims: Vec<usize>, indices: Vec<usize>) -> Result<Self> {
        let meta = MaskMetadata::explicit(indices.len());
        Self::new(MaskMode::FullGrid, dims, indices, meta)
    }

    pub fn phase_encode_plane(plane_dims: Vec<usize>, indices: Vec<usize>) -> Result<Self> {
        let meta = MaskMetadata::explicit(indices.len());
        Self::new(MaskMode::PhaseEncodePlane, plane_dims, indices, meta)
    }

    /// Every location of the grid.
    pub fn all(dims: Vec<usize>) -> Self {
        let n = dims.iter().product();
        Self::full_grid(dims, (0..n).collect()).expect("full mask is valid")
    }

    pub fn mode(&self) -> MaskMode {
        self.mode
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn metadata(&self) -> &MaskMetadata {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Replicates a plane mask across `nz` readout frequencies.
    pub fn expand_phase_encode(&self, nz: usize) -> Result<Self> {
        expand_phase_encode_mask(self, nz)
    }

    /// Re-indexes the mask onto a larger grid with the same frequency spacing,
    /// keeping every selected location at the same signed frequency.
    pub fn embed(&self, target: &[usize]) -> Result<Self> {
        if target.len() != self.dims.len() || target.iter().zip(&self.dims).any(|(t, d)| t < d) {
            return Err(Error::invalid(format!(
                "cannot embed mask grid {:?} into {target:?}",
                self.dims
            )));
        }
        let indices = self
            .indices
            .iter()
            .map(|&flat| {
                let idx: Vec<usize> = multi_index(&self.dims, flat)
                    .iter()
                    .zip(self.dims.iter().zip(target))
                    .map(|(&k, (&n, &m))| frequency_index(signed_frequency(k, n), m))
                    .collect();
                flat_index(target, &idx)
            })
            .collect();
        Self::new(self.mode, target.to_vec(), indices, self.meta)
    }
}

/// Replicates each selected `(k_x, k_y)` over all `nz` readout frequencies.
pub fn expand_phase_encode_mask(plane: &SamplingMask, nz: usize) -> Result<SamplingMask> {
    if plane.mode != MaskMode::PhaseEncodePlane {
        return Err(Error::invalid("expected a phase-encode-plane mask"));
    }
    if nz == 0 {
        return Err(Error::invalid("readout size must be at least 1"));
    }
    let indices = plane
        .indices
        .iter()
        .flat_map(|&i| (i * nz)..(i * nz + nz))
        .collect();
    let dims = vec![plane.dims[0], plane.dims[1], nz];
    let mut meta = plane.meta;
    meta.actual = (plane.indices.len() * nz) as u64;
    meta.target *= nz as u64;
    SamplingMask::new(MaskMode::FullGrid, dims, indices, meta)
}

/// Power-law variable-density profile `f(k) = (1 - |k|/|k_m|)^p + β`.
///
/// Frequencies are normalized per dimension to the band edge, so
/// `k_d = s_d / (n_d / 2)` for signed frequency `s_d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VdsProfile {
    pub p: f64,
    pub beta: f64,
    /// Largest normalized radius `|k_m|` over the sampling domain.
    pub k_max: f64,
}

impl VdsProfile {
    /// Profile whose `|k_m|` is the farthest location of `dims`.
    pub fn for_grid(p: f64, beta: f64, dims: &[usize]) -> Result<Self> {
        let k_max = radii(dims)?.into_iter().fold(0.0, f64::max);
        Ok(Self {
            p,
            beta,
            k_max: if k_max > 0.0 { k_max } else { 1.0 },
        })
    }
}

/// Probability of sampling frequency `k` (normalized coordinates).
pub fn vds_profile_value(k: &[f64], profile: &VdsProfile) -> f64 {
    let r = k.iter().map(|x| x * x).sum::<f64>().sqrt();
    (decay(r, profile) + profile.beta).clamp(0.0, 1.0)
}

fn decay(r: f64, profile: &VdsProfile) -> f64 {
    (1.0 - r / profile.k_max).max(0.0).powf(profile.p)
}

/// Normalized radius of every location of a 1D or 2D frequency grid.
fn radii(dims: &[usize]) -> Result<Vec<f64>> {
    match dims {
        [n] => Ok((0..*n).map(|k| normalized(k, *n).abs()).collect()),
        [nx, ny] => Ok((0..nx * ny)
            .map(|flat| {
                let (kx, ky) = (normalized(flat / ny, *nx), normalized(flat % ny, *ny));
                (kx * kx + ky * ky).sqrt()
            })
            .collect()),
        _ => Err(Error::invalid(format!(
            "variable-density profiles are defined on 1D or 2D grids, got {dims:?}"
        ))),
    }
}

fn normalized(k: usize, n: usize) -> f64 {
    if n == 1 {
        0.0
    } else {
        signed_frequency(k, n) as f64 / (n as f64 / 2.0)
    }
}

/// Expected number of selected locations, `Σ clamp(f(k_i), 0, 1)`.
pub fn expected_count(p: f64, beta: f64, dims: &[usize]) -> Result<f64> {
    let profile = VdsProfile::for_grid(p, beta, dims)?;
    Ok(radii(dims)?
        .iter()
        .map(|&r| (decay(r, &profile) + beta).clamp(0.0, 1.0))
        .sum())
}

const BETA_TOL: f64 = 1e-6;
const COUNT_TOL: f64 = 0.5;

/// Smallest `β ∈ [-1, 1]` (to within 1e-6) whose expected count reaches
/// `target`; the expected count then lies within ±0.5 of `target`.
pub fn calibrate_beta(p: f64, target: usize, dims: &[usize]) -> Result<f64> {
    let total: usize = dims.iter().product();
    if target == 0 || target > total {
        return Err(Error::invalid(format!(
            "target {target} outside 1..={total}"
        )));
    }
    if !(p >= 0.0 && p.is_finite()) {
        return Err(Error::invalid(format!(
            "profile power must be finite and non-negative, got {p}"
        )));
    }
    let profile = VdsProfile::for_grid(p, 0.0, dims)?;
    let base: Vec<f64> = radii(dims)?.iter().map(|&r| decay(r, &profile)).collect();
    let expected = |beta: f64| {
        base.iter()
            .map(|&f| (f + beta).clamp(0.0, 1.0))
            .sum::<f64>()
    };
    let m = target as f64;
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    if expected(hi) < m - COUNT_TOL {
        return Err(Error::InfeasibleTarget(format!(
            "at most {:.1} expected samples with p = {p}, target {target}",
            expected(hi)
        )));
    }
    if expected(lo) >= m {
        return Ok(lo);
    }
    while hi - lo > BETA_TOL {
        let mid = 0.5 * (lo + hi);
        if expected(mid) >= m {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if (expected(hi) - m).abs() > COUNT_TOL {
        return Err(Error::InfeasibleTarget(format!(
            "expected count {:.3} misses target {target} at p = {p}",
            expected(hi)
        )));
    }
    Ok(hi)
}

/// Power step used when searching for `p_M`.
pub const P_STEP: f64 = 0.5;
const P_LIMIT: f64 = 64.0;

/// Smallest `p` on the grid `0, 0.5, 1, ...` whose calibrated `β` is
/// non-negative, together with that `β`.
pub fn find_p_m(target: usize, dims: &[usize]) -> Result<(f64, f64)> {
    let mut p = 0.0;
    while p <= P_LIMIT {
        let beta = calibrate_beta(p, target, dims)?;
        if beta >= 0.0 {
            return Ok((p, beta));
        }
        p += P_STEP;
    }
    Err(Error::InfeasibleTarget(format!(
        "no p <= {P_LIMIT} gives beta >= 0 for target {target}"
    )))
}

/// One independent Bernoulli draw per location with probability `f(k)`.
pub fn draw_vds_mask(
    profile: &VdsProfile,
    dims: &[usize],
    mode: MaskMode,
    target: usize,
    seed: u64,
) -> Result<SamplingMask> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices: Vec<usize> = radii(dims)?
        .iter()
        .enumerate()
        .filter_map(|(i, &r)| {
            let prob = (decay(r, profile) + profile.beta).clamp(0.0, 1.0);
            // one uniform per location keeps the stream aligned across profiles
            let u: f64 = rng.random();
            (u < prob).then_some(i)
        })
        .collect();
    let meta = MaskMetadata {
        p: profile.p,
        beta: profile.beta,
        seed,
        target: target as u64,
        actual: indices.len() as u64,
    };
    SamplingMask::new(mode, dims.to_vec(), indices, meta)
}

/// `count` distinct locations chosen uniformly without replacement.
pub fn draw_uniform_mask(
    count: usize,
    dims: &[usize],
    mode: MaskMode,
    seed: u64,
) -> Result<SamplingMask> {
    let total: usize = dims.iter().product();
    if count > total {
        return Err(Error::invalid(format!(
            "cannot draw {count} of {total} locations"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices = index::sample(&mut rng, total, count).into_vec();
    let meta = MaskMetadata {
        p: f64::NAN,
        beta: f64::NAN,
        seed,
        target: count as u64,
        actual: count as u64,
    };
    SamplingMask::new(mode, dims.to_vec(), indices, meta)
}
