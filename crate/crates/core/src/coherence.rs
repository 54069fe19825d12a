//! Mutual coherence between the chirp-modulated Fourier sensing chain and a
//! sparsity basis, in the 1D band-limited setting.

use std::io::Write;

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{ChirpSpec, GridSpec};
use crate::operators::SensingOperator;
use crate::sampling::SamplingMask;
use crate::sparsity::{BasisKind, SparsityBasis};

#[derive(Clone, Debug, PartialEq)]
pub struct CoherenceReport {
    pub basis: BasisKind,
    pub w_bar: f64,
    pub n: usize,
    pub n_c: usize,
    pub mu: f64,
    /// `N_c μ²`, the quantity governing the required number of measurements.
    pub nc_mu2: f64,
}

/// `μ = max_{i,i'} |(F C U ψ_{i'})_i|` over all `N_c` frequencies and all
/// `N` basis vectors.
pub fn mutual_coherence(w_bar: f64, basis: BasisKind, n: usize) -> Result<CoherenceReport> {
    if n == 0 {
        return Err(Error::invalid("signal length must be positive"));
    }
    let chirp = ChirpSpec::isotropic(w_bar);
    chirp.validate()?;
    let grid = GridSpec::with_unit_fov(&[n], &chirp)?;
    let n_c = grid.recon()[0];
    let psi = SparsityBasis::<f64>::new(basis, &[n])?;
    let sensing =
        SensingOperator::<f64>::band_limited(&grid, &chirp, &SamplingMask::all(vec![n_c]))?;
    let mu = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut e = vec![Complex::default(); n];
            e[j] = Complex::new(1.0, 0.0);
            let column = psi.synthesize(&e).expect("unit vector matches basis");
            sensing
                .spectrum(&column)
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(CoherenceReport {
        basis,
        w_bar,
        n,
        n_c,
        mu,
        nc_mu2: n_c as f64 * mu * mu,
    })
}

/// Coherence for every (basis, rate) pair, bases outermost.
pub fn coherence_table(
    bases: &[BasisKind],
    rates: &[f64],
    n: usize,
) -> Result<Vec<CoherenceReport>> {
    let mut rows = Vec::with_capacity(bases.len() * rates.len());
    for &basis in bases {
        for &w in rates {
            rows.push(mutual_coherence(w, basis, n)?);
        }
    }
    Ok(rows)
}

/// CSV with columns `basis,w_bar,N,N_c,mu,Nc_mu2`.
pub fn write_coherence_csv<W: Write>(out: W, rows: &[CoherenceReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["basis", "w_bar", "N", "N_c", "mu", "Nc_mu2"])?;
    for r in rows {
        w.write_record([
            r.basis.name().to_string(),
            r.w_bar.to_string(),
            r.n.to_string(),
            r.n_c.to_string(),
            format!("{:.12e}", r.mu),
            format!("{:.12e}", r.nc_mu2),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unchirped_dirac_is_maximally_incoherent() {
        for n in [8, 30, 64] {
            let r = mutual_coherence(0.0, BasisKind::Dirac, n).unwrap();
            assert_eq!(r.n_c, n);
            assert!((r.mu - 1.0 / (n as f64).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn unchirped_fourier_is_coherent() {
        let r = mutual_coherence(0.0, BasisKind::Fourier, 32).unwrap();
        assert!((r.mu - 1.0).abs() < 1e-12);
    }

    #[test]
    fn haar_needs_power_of_two() {
        assert!(mutual_coherence(0.1, BasisKind::Haar, 24).is_err());
        assert!(mutual_coherence(f64::NAN, BasisKind::Dirac, 16).is_err());
    }

    #[test]
    fn csv_layout() {
        let rows = coherence_table(&[BasisKind::Dirac], &[0.0], 4).unwrap();
        let mut buf = Vec::new();
        write_coherence_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("basis,w_bar,N,N_c,mu,Nc_mu2\ndirac,0,4,4,"));
    }
}
