//! Pointwise quadratic-phase (linear chirp) modulation on the modulation grid.

use num_complex::Complex;

use super::fourier::frequency_index;
use super::LinearOperator;
use crate::error::{Error, Result};
use crate::grid::{ChirpSpec, GridSpec};
use crate::image::ComplexImage;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Conjugate,
}

/// `exp(iπ w x_i²)` on an `n`-point centered grid, with `w = w̄ N / L²`.
///
/// The field-of-view length cancels: `w x_i² = w̄ N (i - n/2)² / n²`.
pub fn chirp_factors<T: Real>(w_bar: f64, base: usize, n: usize) -> Vec<Complex<T>> {
    (0..n)
        .map(|i| {
            let u = (i as f64 - n as f64 / 2.0) / n as f64;
            let phase = std::f64::consts::PI * w_bar * base as f64 * u * u;
            Complex::new(T::lit(phase.cos()), T::lit(phase.sin()))
        })
        .collect()
}

/// Separable chirp `c_x(i) c_y(j)` over the phase-encode axes (0 and 1).
#[derive(Clone, Debug)]
pub(crate) struct PlaneFactors<T> {
    x: Vec<Complex<T>>,
    y: Option<Vec<Complex<T>>>,
}

impl<T: Real> PlaneFactors<T> {
    pub(crate) fn new(rates: (f64, f64), base: &[usize], modulation: &[usize]) -> Self {
        let x = chirp_factors(rates.0, base[0], modulation[0]);
        let y = (modulation.len() >= 2).then(|| chirp_factors(rates.1, base[1], modulation[1]));
        Self { x, y }
    }

    /// Multiplies every sample with readout index `plane` (all of them when
    /// `plane` is `None`) by the chirp or its conjugate.
    pub(crate) fn apply(
        &self,
        data: &mut [Complex<T>],
        dims: &[usize],
        plane: Option<usize>,
        dir: Direction,
    ) {
        let nz = if dims.len() == 3 { dims[2] } else { 1 };
        let ny = if dims.len() >= 2 { dims[1] } else { 1 };
        let conj = |z: Complex<T>| {
            if dir == Direction::Conjugate {
                z.conj()
            } else {
                z
            }
        };
        for (ix, cx) in self.x.iter().enumerate() {
            for iy in 0..ny {
                let c = match &self.y {
                    Some(y) => conj(cx * y[iy]),
                    None => conj(*cx),
                };
                let base = (ix * ny + iy) * nz;
                match plane {
                    Some(p) => data[base + p] = data[base + p] * c,
                    None => data[base..base + nz].iter_mut().for_each(|z| *z = *z * c),
                }
            }
        }
    }
}

/// DFT index along the readout axis for schedule entry `m` (entries are
/// ordered by signed readout frequency starting at `-N_z/2`).
pub fn schedule_plane_index(m: usize, nz: usize) -> usize {
    frequency_index(m as isize - (nz / 2) as isize, nz)
}

/// Chirp modulation as a diagonal operator on the modulation grid.
///
/// With a readout-varying schedule each readout plane gets its own rates;
/// the input is then expected to be already transformed along the readout axis.
#[derive(Clone, Debug)]
pub struct ChirpModulation<T> {
    dims: Vec<usize>,
    planes: Vec<(usize, PlaneFactors<T>)>,
    constant: Option<PlaneFactors<T>>,
}

impl<T: Real> ChirpModulation<T> {
    pub fn new(chirp: &ChirpSpec, base: &[usize], modulation: &[usize]) -> Result<Self> {
        chirp.validate()?;
        if base.len() != modulation.len() {
            return Err(Error::invalid("base and modulation grids differ in rank"));
        }
        match chirp {
            ChirpSpec::Constant { wx, wy } => Ok(Self {
                dims: modulation.to_vec(),
                planes: Vec::new(),
                constant: Some(PlaneFactors::new((*wx, *wy), base, modulation)),
            }),
            ChirpSpec::ReadoutVarying(rates) => {
                if modulation.len() != 3 {
                    return Err(Error::invalid("a readout-varying chirp needs a 3D grid"));
                }
                let nz = modulation[2];
                if rates.len() != nz {
                    return Err(Error::invalid(format!(
                        "chirp schedule has {} entries, readout grid has {nz}",
                        rates.len()
                    )));
                }
                let planes = rates
                    .iter()
                    .enumerate()
                    .map(|(m, &r)| {
                        (
                            schedule_plane_index(m, nz),
                            PlaneFactors::new(r, base, modulation),
                        )
                    })
                    .collect();
                Ok(Self {
                    dims: modulation.to_vec(),
                    planes,
                    constant: None,
                })
            }
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn apply_in_place(&self, data: &mut [Complex<T>], dir: Direction) {
        if let Some(c) = &self.constant {
            c.apply(data, &self.dims, None, dir);
        }
        for (plane, c) in &self.planes {
            c.apply(data, &self.dims, Some(*plane), dir);
        }
    }
}

impl<T: Real> LinearOperator<T> for ChirpModulation<T> {
    fn input_len(&self) -> usize {
        self.dims.iter().product()
    }

    fn output_len(&self) -> usize {
        self.input_len()
    }

    fn forward(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut out = x.to_vec();
        self.apply_in_place(&mut out, Direction::Forward);
        out
    }

    fn adjoint(&self, y: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut out = y.to_vec();
        self.apply_in_place(&mut out, Direction::Conjugate);
        out
    }
}

/// Multiplies an image on the modulation grid of `grid` by the chirp.
pub fn chirp_modulate<T: Real>(
    img: &ComplexImage<T>,
    grid: &GridSpec,
    chirp: &ChirpSpec,
    dir: Direction,
) -> Result<ComplexImage<T>> {
    if img.dims() != grid.modulation() {
        return Err(Error::invalid(format!(
            "image grid {:?} is not the modulation grid {:?}",
            img.dims(),
            grid.modulation()
        )));
    }
    let op = ChirpModulation::new(chirp, grid.base(), grid.modulation())?;
    let mut out = img.clone();
    op.apply_in_place(out.data_mut(), dir);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grids;
    use crate::operators::testing::{adjoint_mismatch, random_vector};

    #[test]
    fn zero_rate_is_identity() {
        let grid = make_grids(&[8, 6], &ChirpSpec::none()).unwrap();
        let x = ComplexImage::new(vec![8, 6], random_vector::<f64>(48, 1)).unwrap();
        let y = chirp_modulate(&x, &grid, &ChirpSpec::none(), Direction::Forward).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn unimodular_and_center_fixed() {
        let chirp = ChirpSpec::Constant { wx: 0.3, wy: -0.45 };
        let grid = make_grids(&[16, 12], &chirp).unwrap();
        let dims = grid.modulation().to_vec();
        let n = dims.iter().product();
        let x = ComplexImage::new(dims.clone(), random_vector::<f64>(n, 2)).unwrap();
        let y = chirp_modulate(&x, &grid, &chirp, Direction::Forward).unwrap();
        for (a, b) in x.data().iter().zip(y.data()) {
            assert!((a.norm() - b.norm()).abs() < 1e-14);
        }
        let center = x.flat_index(&[dims[0] / 2, dims[1] / 2]);
        assert!((x.data()[center] - y.data()[center]).norm() < 1e-15);
        let back = chirp_modulate(&y, &grid, &chirp, Direction::Conjugate).unwrap();
        for (a, b) in x.data().iter().zip(back.data()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn phase_matches_physical_formula() {
        // w̄ = 0.25, N = 16, L = 0.2: w = w̄ N / L², x_i = (i - n/2) L / n
        let (w_bar, n_base, l) = (0.25, 16usize, 0.2);
        let n = 24;
        let w = crate::grid::physical_chirp_rate(w_bar, l, n_base);
        let f = chirp_factors::<f64>(w_bar, n_base, n);
        for (i, z) in f.iter().enumerate() {
            let x = crate::grid::centered_coordinate(i, n, l);
            let expected = Complex::from_polar(1.0, std::f64::consts::PI * w * x * x);
            assert!((z - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn grid_mismatch_and_schedule_length() {
        let grid = make_grids(&[8], &ChirpSpec::isotropic(0.5)).unwrap();
        let x = ComplexImage::new(vec![8], random_vector::<f64>(8, 1)).unwrap();
        assert!(chirp_modulate(&x, &grid, &ChirpSpec::isotropic(0.5), Direction::Forward).is_err());
        let bad = ChirpSpec::ReadoutVarying(vec![(0.1, 0.1); 3]);
        assert!(ChirpModulation::<f64>::new(&bad, &[4, 4, 4], &[4, 4, 4]).is_err());
    }

    #[test]
    fn adjoint_identity() {
        let op = ChirpModulation::<f64>::new(
            &ChirpSpec::Constant { wx: 0.2, wy: 0.1 },
            &[8, 6, 4],
            &[12, 8, 4],
        )
        .unwrap();
        assert!(adjoint_mismatch(&op, 20, 9) < 1e-10);
        let sched =
            ChirpSpec::ReadoutVarying((0..4).map(|m| (0.1 * m as f64, -0.05 * m as f64)).collect());
        let op = ChirpModulation::<f64>::new(&sched, &[8, 6, 4], &[12, 8, 4]).unwrap();
        assert!(adjoint_mismatch(&op, 20, 10) < 1e-10);
    }

    #[test]
    fn schedule_order_starts_at_most_negative_frequency() {
        assert_eq!(
            (0..4)
                .map(|m| schedule_plane_index(m, 4))
                .collect::<Vec<_>>(),
            vec![2, 3, 0, 1]
        );
        assert_eq!(
            (0..3)
                .map(|m| schedule_plane_index(m, 3))
                .collect::<Vec<_>>(),
            vec![2, 0, 1]
        );
    }
}
