//! Field of view, grid sizes and chirp-rate specifications.
//!
//! Three grids are tracked per dimension: the base grid `N` on which the
//! object is described, the reconstruction grid `N_c = (1 + |w̄|) N` that
//! holds the band-limit extension introduced by the chirp, and the
//! modulation grid `N_u = (1 + 2|w̄|) N` on which the chirp is applied
//! without aliasing. Extended sizes are rounded up to the next even integer.

use crate::error::{Error, Result};

/// Physical extent of the imaged region, one length per dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldOfView {
    lengths: Vec<f64>,
}

impl FieldOfView {
    pub fn new(lengths: Vec<f64>) -> Result<Self> {
        if lengths.is_empty() || lengths.len() > 3 {
            return Err(Error::invalid(format!(
                "field of view must have 1 to 3 dimensions, got {}",
                lengths.len()
            )));
        }
        if let Some(l) = lengths.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::invalid(format!(
                "field-of-view length {l} is not positive"
            )));
        }
        Ok(Self { lengths })
    }

    /// Unit lengths in `dims` dimensions.
    pub fn unit(dims: usize) -> Result<Self> {
        Self::new(vec![1.0; dims])
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn ndim(&self) -> usize {
        self.lengths.len()
    }
}

/// Chirp rates in discrete (dimensionless) units `w̄ = w L² / N`.
#[derive(Clone, Debug, PartialEq)]
pub enum ChirpSpec {
    /// The same rates `(w̄_x, w̄_y)` for every measurement.
    Constant { wx: f64, wy: f64 },
    /// One `(w̄_x, w̄_y)` pair per readout sample, ordered by readout time,
    /// i.e. by signed readout frequency from `-N_z/2` upwards.
    ReadoutVarying(Vec<(f64, f64)>),
}

impl ChirpSpec {
    pub fn none() -> Self {
        ChirpSpec::Constant { wx: 0.0, wy: 0.0 }
    }

    /// Same rate in both phase-encode directions.
    pub fn isotropic(w: f64) -> Self {
        ChirpSpec::Constant { wx: w, wy: w }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |(a, b): (f64, f64)| a.is_finite() && b.is_finite();
        let ok = match self {
            ChirpSpec::Constant { wx, wy } => finite((*wx, *wy)),
            ChirpSpec::ReadoutVarying(rates) => {
                !rates.is_empty() && rates.iter().copied().all(finite)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(
                "chirp rates must be finite and the schedule non-empty",
            ))
        }
    }

    /// Largest absolute rate per phase-encode direction over the whole schedule.
    pub fn max_abs(&self) -> (f64, f64) {
        match self {
            ChirpSpec::Constant { wx, wy } => (wx.abs(), wy.abs()),
            ChirpSpec::ReadoutVarying(rates) => {
                rates.iter().fold((0.0f64, 0.0f64), |(mx, my), (x, y)| {
                    (mx.max(x.abs()), my.max(y.abs()))
                })
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.max_abs() == (0.0, 0.0)
    }

    /// Multiplies every rate by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            ChirpSpec::Constant { wx, wy } => ChirpSpec::Constant {
                wx: wx * factor,
                wy: wy * factor,
            },
            ChirpSpec::ReadoutVarying(rates) => ChirpSpec::ReadoutVarying(
                rates
                    .iter()
                    .map(|(x, y)| (x * factor, y * factor))
                    .collect(),
            ),
        }
    }
}

/// Base, reconstruction and modulation grid sizes with their field of view.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    fov: FieldOfView,
    base: Vec<usize>,
    recon: Vec<usize>,
    modulation: Vec<usize>,
}

impl GridSpec {
    /// Derives `N_c` and `N_u` from the base sizes and the largest chirp rate.
    ///
    /// Dimensions 0 and 1 are phase-encode directions; in 3D the last
    /// dimension is the readout direction and is never extended.
    pub fn new(base: &[usize], fov: FieldOfView, chirp: &ChirpSpec) -> Result<Self> {
        if base.len() != fov.ndim() {
            return Err(Error::invalid(format!(
                "{} grid sizes for a {}-dimensional field of view",
                base.len(),
                fov.ndim()
            )));
        }
        if base.contains(&0) {
            return Err(Error::invalid("grid sizes must be at least 1"));
        }
        chirp.validate()?;
        let (wx, wy) = chirp.max_abs();
        let rates = [wx, wy];
        let mut recon = base.to_vec();
        let mut modulation = base.to_vec();
        for d in 0..base.len().min(2) {
            recon[d] = extended_size(base[d], rates[d]);
            modulation[d] = extended_size(base[d], 2.0 * rates[d]);
        }
        Ok(Self {
            fov,
            base: base.to_vec(),
            recon,
            modulation,
        })
    }

    /// Grid with a unit field of view.
    pub fn with_unit_fov(base: &[usize], chirp: &ChirpSpec) -> Result<Self> {
        Self::new(base, FieldOfView::unit(base.len())?, chirp)
    }

    pub fn fov(&self) -> &FieldOfView {
        &self.fov
    }

    /// Base sizes `N`.
    pub fn base(&self) -> &[usize] {
        &self.base
    }

    /// Reconstruction sizes `N_c`.
    pub fn recon(&self) -> &[usize] {
        &self.recon
    }

    /// Modulation sizes `N_u`.
    pub fn modulation(&self) -> &[usize] {
        &self.modulation
    }

    pub fn ndim(&self) -> usize {
        self.base.len()
    }

    /// Band limits `B = N / (2L)` per dimension.
    pub fn band_limits(&self) -> Vec<f64> {
        self.base
            .iter()
            .zip(self.fov.lengths())
            .map(|(&n, &l)| n as f64 / (2.0 * l))
            .collect()
    }
}

/// Convenience wrapper over [`GridSpec::with_unit_fov`].
pub fn make_grids(base: &[usize], chirp: &ChirpSpec) -> Result<GridSpec> {
    GridSpec::with_unit_fov(base, chirp)
}

/// `ceil((1 + |w̄|) n)` rounded up to even; `n` itself when `w̄ = 0`.
pub fn extended_size(n: usize, rate: f64) -> usize {
    if rate == 0.0 {
        return n;
    }
    let exact = (1.0 + rate.abs()) * n as f64;
    // absorb representation error such as 1.1 * 10 = 11.000000000000002
    let mut size = (exact - exact * 1e-12).ceil() as usize;
    size = size.max(n);
    size + size % 2
}

/// Dimensionless rate `w̄ = w L² / N`.
pub fn discrete_chirp_rate(w: f64, length: f64, n: usize) -> Result<f64> {
    if !(length > 0.0) || n == 0 {
        return Err(Error::invalid(format!(
            "need L > 0 and N >= 1, got L = {length}, N = {n}"
        )));
    }
    Ok(w * length * length / n as f64)
}

/// Physical rate `w = w̄ N / L²`.
pub fn physical_chirp_rate(w_bar: f64, length: f64, n: usize) -> f64 {
    w_bar * n as f64 / (length * length)
}

/// Position of sample `i` on an `n`-point grid over `length`, centered so that
/// sample `n/2` sits at the origin.
#[inline]
pub fn centered_coordinate(i: usize, n: usize, length: f64) -> f64 {
    (i as f64 - n as f64 / 2.0) * length / n as f64
}
