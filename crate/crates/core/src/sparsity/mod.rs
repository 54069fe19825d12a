//! Sparsity bases (Dirac, orthonormal Haar, Fourier), hard thresholding, and
//! the discrete gradient used by the total-variation norm.

mod tv;

pub use tv::{divergence, gradient, tv_norm};

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::operators::{for_each_line, Fourier, LinearOperator};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisKind {
    Dirac,
    Haar,
    Fourier,
}

impl BasisKind {
    pub const ALL: [BasisKind; 3] = [BasisKind::Dirac, BasisKind::Haar, BasisKind::Fourier];

    pub fn name(self) -> &'static str {
        match self {
            BasisKind::Dirac => "dirac",
            BasisKind::Haar => "haar",
            BasisKind::Fourier => "fourier",
        }
    }
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dirac" => Ok(BasisKind::Dirac),
            "haar" => Ok(BasisKind::Haar),
            "fourier" => Ok(BasisKind::Fourier),
            other => Err(Error::invalid(format!("unknown basis '{other}'"))),
        }
    }
}

/// Orthonormal sparsity basis Ψ on a fixed grid. Multidimensional bases are
/// tensor products of the 1D basis along every axis.
///
/// As a [`LinearOperator`], `forward` is synthesis (`α ↦ Ψα`) and `adjoint`
/// is analysis (`ρ ↦ Ψ†ρ`).
#[derive(Clone)]
pub struct SparsityBasis<T: Real> {
    kind: BasisKind,
    dims: Vec<usize>,
    depths: Vec<usize>,
    fourier: Option<Fourier<T>>,
}

impl<T: Real> fmt::Debug for SparsityBasis<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SparsityBasis")
            .field("kind", &self.kind)
            .field("dims", &self.dims)
            .field("depths", &self.depths)
            .finish()
    }
}

impl<T: Real> SparsityBasis<T> {
    /// Basis of the given kind; Haar bases use full depth `log2(n)` along every axis.
    pub fn new(kind: BasisKind, dims: &[usize]) -> Result<Self> {
        if kind == BasisKind::Haar && dims.iter().any(|n| !n.is_power_of_two()) {
            return Err(Error::invalid(format!(
                "haar basis needs power-of-two sizes, got {dims:?}"
            )));
        }
        let depths = dims.iter().map(|n| n.trailing_zeros() as usize).collect();
        Self::build(kind, dims, depths)
    }

    /// Haar basis truncated at `depth` levels along every axis.
    pub fn haar_with_depth(dims: &[usize], depth: usize) -> Result<Self> {
        if dims
            .iter()
            .any(|&n| n == 0 || n % (1usize << depth.min(63)) != 0 || depth >= 64)
        {
            return Err(Error::invalid(format!(
                "haar depth {depth} does not divide grid {dims:?}"
            )));
        }
        Self::build(BasisKind::Haar, dims, vec![depth; dims.len()])
    }

    fn build(kind: BasisKind, dims: &[usize], depths: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::invalid(format!("invalid basis grid {dims:?}")));
        }
        let fourier = (kind == BasisKind::Fourier).then(|| Fourier::new(dims));
        let depths = if kind == BasisKind::Haar {
            depths
        } else {
            vec![0; dims.len()]
        };
        Ok(Self {
            kind,
            dims: dims.to_vec(),
            depths,
            fourier,
        })
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Haar decomposition levels per axis (zero for other kinds).
    pub fn depths(&self) -> &[usize] {
        &self.depths
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn check(&self, v: &[Complex<T>]) -> Result<()> {
        if v.len() != self.len() {
            return Err(Error::invalid(format!(
                "length {} does not match basis grid {:?}",
                v.len(),
                self.dims
            )));
        }
        Ok(())
    }

    /// `ρ = Ψα`.
    pub fn synthesize(&self, alpha: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        self.check(alpha)?;
        let mut out = alpha.to_vec();
        self.synthesize_in_place(&mut out);
        Ok(out)
    }

    /// `α = Ψ†ρ`.
    pub fn analyze(&self, signal: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        self.check(signal)?;
        let mut out = signal.to_vec();
        self.analyze_in_place(&mut out);
        Ok(out)
    }

    fn synthesize_in_place(&self, data: &mut [Complex<T>]) {
        match self.kind {
            BasisKind::Dirac => {}
            BasisKind::Fourier => self
                .fourier
                .as_ref()
                .expect("fourier plans")
                .inverse_in_place(data),
            BasisKind::Haar => {
                let mut scratch = Vec::new();
                for axis in 0..self.dims.len() {
                    for_each_line(data, &self.dims, axis, |line| {
                        haar_inverse(line, self.depths[axis], &mut scratch)
                    });
                }
            }
        }
    }

    fn analyze_in_place(&self, data: &mut [Complex<T>]) {
        match self.kind {
            BasisKind::Dirac => {}
            BasisKind::Fourier => self
                .fourier
                .as_ref()
                .expect("fourier plans")
                .forward_in_place(data),
            BasisKind::Haar => {
                let mut scratch = Vec::new();
                for axis in 0..self.dims.len() {
                    for_each_line(data, &self.dims, axis, |line| {
                        haar_forward(line, self.depths[axis], &mut scratch)
                    });
                }
            }
        }
    }
}

impl<T: Real> LinearOperator<T> for SparsityBasis<T> {
    fn input_len(&self) -> usize {
        self.len()
    }

    fn output_len(&self) -> usize {
        self.len()
    }

    fn forward(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        self.synthesize(x)
            .expect("coefficient length matches basis")
    }

    fn adjoint(&self, y: &[Complex<T>]) -> Vec<Complex<T>> {
        self.analyze(y).expect("signal length matches basis")
    }
}

/// Orthonormal Haar analysis in place: approximation coefficients first,
/// then details from coarsest to finest.
fn haar_forward<T: Real>(line: &mut [Complex<T>], depth: usize, scratch: &mut Vec<Complex<T>>) {
    let h = T::FRAC_1_SQRT_2();
    scratch.resize(line.len(), Complex::default());
    let mut len = line.len();
    for _ in 0..depth {
        let half = len / 2;
        for i in 0..half {
            let (a, b) = (line[2 * i], line[2 * i + 1]);
            scratch[i] = (a + b) * h;
            scratch[half + i] = (a - b) * h;
        }
        line[..len].copy_from_slice(&scratch[..len]);
        len = half;
    }
}

fn haar_inverse<T: Real>(line: &mut [Complex<T>], depth: usize, scratch: &mut Vec<Complex<T>>) {
    let h = T::FRAC_1_SQRT_2();
    scratch.resize(line.len(), Complex::default());
    let mut len = line.len() >> depth;
    for _ in 0..depth {
        let half = len;
        len *= 2;
        for i in 0..half {
            let (s, d) = (line[i], line[half + i]);
            scratch[2 * i] = (s + d) * h;
            scratch[2 * i + 1] = (s - d) * h;
        }
        line[..len].copy_from_slice(&scratch[..len]);
    }
}

/// Keeps the `k` largest-magnitude entries (ties go to the lowest index) and
/// zeros the rest.
pub fn hard_threshold<T: Real>(alpha: &[Complex<T>], k: usize) -> Result<Vec<Complex<T>>> {
    if k == 0 || k > alpha.len() {
        return Err(Error::invalid(format!(
            "sparsity {k} outside 1..={}",
            alpha.len()
        )));
    }
    let mut order: Vec<usize> = (0..alpha.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (alpha[i].norm_sqr().as_f64(), alpha[j].norm_sqr().as_f64());
        b.total_cmp(&a).then(i.cmp(&j))
    });
    let mut out = vec![Complex::default(); alpha.len()];
    for &i in &order[..k] {
        out[i] = alpha[i];
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::testing::random_vector;
    use crate::vector::{distance, norm};

    type C = Complex<f64>;

    #[test]
    fn two_point_haar_scaling_vector() {
        let b = SparsityBasis::<f64>::new(BasisKind::Haar, &[2]).unwrap();
        let s = b.synthesize(&[C::new(1.0, 0.0), C::default()]).unwrap();
        for z in s {
            assert!((z - C::new(0.5f64.sqrt(), 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn dirac_is_identity() {
        let b = SparsityBasis::<f64>::new(BasisKind::Dirac, &[5]).unwrap();
        let a = random_vector::<f64>(5, 1);
        assert_eq!(b.synthesize(&a).unwrap(), a);
    }

    #[test]
    fn orthonormal_round_trips() {
        for kind in BasisKind::ALL {
            for dims in [vec![16], vec![8, 4], vec![4, 2, 8]] {
                let b = SparsityBasis::<f64>::new(kind, &dims).unwrap();
                let a = random_vector::<f64>(b.len(), 7);
                let s = b.synthesize(&a).unwrap();
                assert!((norm(&s) - norm(&a)).abs() < 1e-12 * norm(&a));
                assert!(
                    distance(&b.analyze(&s).unwrap(), &a) < 1e-12 * norm(&a),
                    "{kind} {dims:?}"
                );
            }
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(SparsityBasis::<f64>::new(BasisKind::Haar, &[12]).is_err());
        assert!(SparsityBasis::<f64>::haar_with_depth(&[8], 4).is_err());
        assert!(SparsityBasis::<f64>::haar_with_depth(&[24], 3).is_ok());
        let b = SparsityBasis::<f64>::new(BasisKind::Fourier, &[6]).unwrap();
        assert!(b.synthesize(&random_vector::<f64>(5, 1)).is_err());
    }

    #[test]
    fn threshold_examples() {
        let r = |v: &[f64]| v.iter().map(|&x| C::new(x, 0.0)).collect::<Vec<_>>();
        assert_eq!(
            hard_threshold(&r(&[3.0, -5.0, 1.0]), 1).unwrap(),
            r(&[0.0, -5.0, 0.0])
        );
        assert_eq!(
            hard_threshold(&r(&[2.0, 2.0, 0.0]), 1).unwrap(),
            r(&[2.0, 0.0, 0.0])
        );
        assert_eq!(hard_threshold(&r(&[1.0, 4.0]), 2).unwrap(), r(&[1.0, 4.0]));
        assert!(hard_threshold(&r(&[1.0]), 0).is_err());
        assert!(hard_threshold(&r(&[1.0]), 2).is_err());
    }

    #[test]
    fn basis_kind_parses() {
        assert_eq!("Haar".parse::<BasisKind>().unwrap(), BasisKind::Haar);
        assert!("db4".parse::<BasisKind>().is_err());
    }
}
