//! The full measurement chain `ν = M F C U ρ` and its readout-varying form
//! `ν = M F_xy C F_z U ρ`.

use num_complex::Complex;

use super::chirp::{ChirpModulation, Direction};
use super::fourier::Fourier;
use super::mask::{KSpaceData, MaskSelect};
use super::resample::Resample;
use super::LinearOperator;
use crate::error::{Error, Result};
use crate::grid::{ChirpSpec, GridSpec};
use crate::image::ComplexImage;
use crate::sampling::SamplingMask;
use crate::scalar::Real;

/// Up-sample, chirp, Fourier transform, select.
#[derive(Clone)]
pub struct SensingOperator<T: Real> {
    resample: Resample<T>,
    chirp: ChirpModulation<T>,
    fourier: Fourier<T>,
    select: MaskSelect,
    varying: bool,
}

impl<T: Real> SensingOperator<T> {
    /// Chain acting on `input` samples, modulated on `modulation`.
    ///
    /// `base` are the sizes the discrete chirp rates refer to. `mask` must
    /// index the modulation grid.
    pub fn new(
        input: &[usize],
        base: &[usize],
        modulation: &[usize],
        chirp: &ChirpSpec,
        mask: &SamplingMask,
    ) -> Result<Self> {
        let resample = Resample::new(input, modulation)?;
        let chirp_op = ChirpModulation::new(chirp, base, modulation)?;
        let select = MaskSelect::from_mask(mask, modulation)?;
        Ok(Self {
            resample,
            chirp: chirp_op,
            fourier: Fourier::new(modulation),
            select,
            varying: matches!(chirp, ChirpSpec::ReadoutVarying(_)),
        })
    }

    /// Reconstruction grid `N_c` to measurements on the modulation grid `N_u`.
    pub fn from_grid(grid: &GridSpec, chirp: &ChirpSpec, mask: &SamplingMask) -> Result<Self> {
        Self::new(grid.recon(), grid.base(), grid.modulation(), chirp, mask)
    }

    /// Band-limited setting: base grid `N` to measurements on `N_c`, as used
    /// for coherence and sparse-recovery studies.
    pub fn band_limited(grid: &GridSpec, chirp: &ChirpSpec, mask: &SamplingMask) -> Result<Self> {
        Self::new(grid.base(), grid.base(), grid.recon(), chirp, mask)
    }

    pub fn input_dims(&self) -> &[usize] {
        self.resample.small_dims()
    }

    pub fn modulation_dims(&self) -> &[usize] {
        self.resample.large_dims()
    }

    pub fn select(&self) -> &MaskSelect {
        &self.select
    }

    /// Complete modulated spectrum `F C U ρ`, before selection.
    pub fn spectrum(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut u = self.resample.upsample(x);
        if self.varying {
            let ndim = self.modulation_dims().len();
            self.fourier.forward_axes(&mut u, &[ndim - 1]);
            self.chirp.apply_in_place(&mut u, Direction::Forward);
            self.fourier.forward_axes(&mut u, &[0, 1]);
        } else {
            self.chirp.apply_in_place(&mut u, Direction::Forward);
            self.fourier.forward_in_place(&mut u);
        }
        u
    }

    /// Adjoint of [`Self::spectrum`].
    pub fn spectrum_adjoint(&self, spectrum: Vec<Complex<T>>) -> Vec<Complex<T>> {
        let mut u = spectrum;
        if self.varying {
            let ndim = self.modulation_dims().len();
            self.fourier.inverse_axes(&mut u, &[0, 1]);
            self.chirp.apply_in_place(&mut u, Direction::Conjugate);
            self.fourier.inverse_axes(&mut u, &[ndim - 1]);
        } else {
            self.fourier.inverse_in_place(&mut u);
            self.chirp.apply_in_place(&mut u, Direction::Conjugate);
        }
        self.resample.downsample(&u)
    }
}

impl<T: Real> LinearOperator<T> for SensingOperator<T> {
    fn input_len(&self) -> usize {
        self.resample.input_len()
    }

    fn output_len(&self) -> usize {
        self.select.indices().len()
    }

    fn forward(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        self.select.gather(&self.spectrum(x))
    }

    fn adjoint(&self, y: &[Complex<T>]) -> Vec<Complex<T>> {
        self.spectrum_adjoint(self.select.scatter(y))
    }
}

fn check_input<T: Real>(rho: &ComplexImage<T>, grid: &GridSpec) -> Result<()> {
    if rho.dims() != grid.recon() {
        return Err(Error::invalid(format!(
            "image grid {:?} is not the reconstruction grid {:?}",
            rho.dims(),
            grid.recon()
        )));
    }
    Ok(())
}

/// `M F C U ρ` for a constant-rate chirp.
pub fn sensing_forward<T: Real>(
    rho: &ComplexImage<T>,
    grid: &GridSpec,
    chirp: &ChirpSpec,
    mask: &SamplingMask,
) -> Result<KSpaceData<T>> {
    if !matches!(chirp, ChirpSpec::Constant { .. }) {
        return Err(Error::invalid(
            "sensing_forward needs a constant-rate chirp",
        ));
    }
    check_input(rho, grid)?;
    let op = SensingOperator::from_grid(grid, chirp, mask)?;
    KSpaceData::new(op.forward(rho.data()), op.select().indices().to_vec())
}

/// Adjoint of [`sensing_forward`].
pub fn sensing_adjoint<T: Real>(
    data: &KSpaceData<T>,
    grid: &GridSpec,
    chirp: &ChirpSpec,
    mask: &SamplingMask,
) -> Result<ComplexImage<T>> {
    let op = SensingOperator::from_grid(grid, chirp, mask)?;
    if data.indices != op.select().indices() {
        return Err(Error::invalid("measurement indices do not match the mask"));
    }
    ComplexImage::new(grid.recon().to_vec(), op.adjoint(&data.values))
}

/// `M F_xy C F_z U ρ` for a readout-varying schedule.
pub fn sensing_forward_varying<T: Real>(
    rho: &ComplexImage<T>,
    grid: &GridSpec,
    chirp: &ChirpSpec,
    mask: &SamplingMask,
) -> Result<KSpaceData<T>> {
    if !matches!(chirp, ChirpSpec::ReadoutVarying(_)) {
        return Err(Error::invalid(
            "sensing_forward_varying needs a readout-varying schedule",
        ));
    }
    check_input(rho, grid)?;
    let op = SensingOperator::from_grid(grid, chirp, mask)?;
    KSpaceData::new(op.forward(rho.data()), op.select().indices().to_vec())
}

/// Adjoint of [`sensing_forward_varying`].
pub fn sensing_adjoint_varying<T: Real>(
    data: &KSpaceData<T>,
    grid: &GridSpec,
    chirp: &ChirpSpec,
    mask: &SamplingMask,
) -> Result<ComplexImage<T>> {
    if !matches!(chirp, ChirpSpec::ReadoutVarying(_)) {
        return Err(Error::invalid(
            "sensing_adjoint_varying needs a readout-varying schedule",
        ));
    }
    sensing_adjoint(data, grid, chirp, mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grids;
    use crate::operators::fourier_forward;
    use crate::operators::testing::{adjoint_mismatch, random_vector};
    use crate::vector::{distance, norm};

    fn full_mask(dims: &[usize]) -> SamplingMask {
        SamplingMask::full_grid(dims.to_vec(), (0..dims.iter().product()).collect()).unwrap()
    }

    #[test]
    fn unchirped_full_mask_is_zero_padded_fourier() {
        let grid = make_grids(&[12, 10], &ChirpSpec::none()).unwrap();
        let rho = ComplexImage::new(vec![12, 10], random_vector::<f64>(120, 1)).unwrap();
        let mask = full_mask(grid.modulation());
        let nu = sensing_forward(&rho, &grid, &ChirpSpec::none(), &mask).unwrap();
        let expected = fourier_forward(&rho);
        assert!(distance(&nu.values, expected.data()) < 1e-12);
    }

    #[test]
    fn unmasked_chain_is_isometric() {
        let chirp = ChirpSpec::Constant { wx: 0.3, wy: 0.2 };
        let grid = make_grids(&[16, 12], &chirp).unwrap();
        let op = SensingOperator::<f64>::from_grid(&grid, &chirp, &full_mask(grid.modulation()))
            .unwrap();
        let x = random_vector::<f64>(grid.recon().iter().product(), 2);
        assert!((norm(&op.forward(&x)) - norm(&x)).abs() < 1e-12 * norm(&x));
        assert!(adjoint_mismatch(&op, 20, 3) < 1e-10);
    }

    #[test]
    fn constant_schedule_matches_constant_chirp() {
        let (wx, wy) = (0.25, -0.15);
        let constant = ChirpSpec::Constant { wx, wy };
        let schedule = ChirpSpec::ReadoutVarying(vec![(wx, wy); 6]);
        let grid = make_grids(&[10, 8, 6], &constant).unwrap();
        let plane = SamplingMask::phase_encode_plane(
            grid.modulation()[..2].to_vec(),
            vec![0, 5, 17, 30, 41],
        )
        .unwrap();
        let rho = ComplexImage::new(
            grid.recon().to_vec(),
            random_vector::<f64>(grid.recon().iter().product(), 4),
        )
        .unwrap();
        let a = sensing_forward(&rho, &grid, &constant, &plane).unwrap();
        let b = sensing_forward_varying(&rho, &grid, &schedule, &plane).unwrap();
        assert!(distance(&a.values, &b.values) < 1e-12 * norm(&a.values));
        let zero = ChirpSpec::ReadoutVarying(vec![(0.0, 0.0); 6]);
        let c = sensing_forward_varying(&rho, &grid, &zero, &plane).unwrap();
        let d = sensing_forward(&rho, &grid, &ChirpSpec::none(), &plane).unwrap();
        assert!(distance(&c.values, &d.values) < 1e-12 * norm(&c.values));
    }

    #[test]
    fn varying_adjoint() {
        let schedule = ChirpSpec::ReadoutVarying(
            (0..5)
                .map(|m| (0.05 * m as f64, -0.04 * m as f64))
                .collect(),
        );
        let grid = make_grids(&[8, 8, 5], &schedule).unwrap();
        let plane = SamplingMask::phase_encode_plane(
            grid.modulation()[..2].to_vec(),
            vec![1, 2, 3, 50, 99],
        )
        .unwrap();
        let op = SensingOperator::<f64>::from_grid(&grid, &schedule, &plane).unwrap();
        assert!(adjoint_mismatch(&op, 20, 5) < 1e-10);
    }

    /// Number of largest-magnitude coefficients holding `fraction` of the energy.
    fn energy_support(v: &[Complex<f64>], fraction: f64) -> usize {
        let mut e: Vec<f64> = v.iter().map(|z| z.norm_sqr()).collect();
        e.sort_by(|a, b| b.total_cmp(a));
        let total: f64 = e.iter().sum();
        let mut acc = 0.0;
        e.iter()
            .take_while(|&&x| {
                let below = acc < fraction * total;
                acc += x;
                below
            })
            .count()
    }

    #[test]
    fn chirp_spreads_a_single_frequency() {
        let n = 256;
        let chirp = ChirpSpec::isotropic(0.3);
        let grid = make_grids(&[n], &chirp).unwrap();
        let nc = grid.recon()[0];
        // DC-only image: one nonzero coefficient without the chirp
        let dc = ComplexImage::new(
            vec![nc],
            vec![Complex::new(1.0 / (nc as f64).sqrt(), 0.0); nc],
        )
        .unwrap();
        let mask = full_mask(grid.modulation());
        let plain = sensing_forward(&dc, &grid, &ChirpSpec::none(), &mask).unwrap();
        let chirped = sensing_forward(&dc, &grid, &chirp, &mask).unwrap();
        assert_eq!(energy_support(&plain.values, 0.99), 1);
        assert!(energy_support(&chirped.values, 0.99) as f64 >= 2.0 * 0.3 * n as f64 * 0.5);
    }

    #[test]
    fn wrong_input_grid_rejected() {
        let grid = make_grids(&[8], &ChirpSpec::isotropic(0.5)).unwrap();
        let rho = ComplexImage::new(vec![8], random_vector::<f64>(8, 1)).unwrap();
        let mask = full_mask(grid.modulation());
        assert!(sensing_forward(&rho, &grid, &ChirpSpec::isotropic(0.5), &mask).is_err());
    }
}
