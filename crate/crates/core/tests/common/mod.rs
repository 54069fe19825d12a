//! Dense reference matrices built directly from the textbook formulas.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use s2mri::noise::{add_noise, NoiseModel};
use s2mri::operators::{signed_frequency, LinearOperator, SensingOperator};
use s2mri::sampling::draw_uniform_mask;
use s2mri::solver::{solve_bp, within_ball, Regularizer, SolverOptions};
use s2mri::sparsity::{BasisKind, SparsityBasis};
use s2mri::{ChirpSpec, GridSpec, MaskMode, SamplingMask};

pub type C = Complex<f64>;
pub type Mat = DMatrix<C>;

/// Unitary DFT matrix.
pub fn dft(n: usize) -> Mat {
    let s = 1.0 / (n as f64).sqrt();
    Mat::from_fn(n, n, |k, j| {
        C::from_polar(s, -2.0 * std::f64::consts::PI * (k * j) as f64 / n as f64)
    })
}

/// Band-limited interpolation from `n` to `l` samples: every frequency of
/// the small grid keeps its signed value on the large grid.
pub fn upsample(n: usize, l: usize) -> Mat {
    let s = 1.0 / ((n * l) as f64).sqrt();
    Mat::from_fn(l, n, |i, j| {
        (0..n)
            .map(|k| {
                let f = signed_frequency(k, n) as f64;
                C::from_polar(
                    s,
                    2.0 * std::f64::consts::PI * f * (i as f64 / l as f64 - j as f64 / n as f64),
                )
            })
            .sum()
    })
}

/// Diagonal of `exp(iπ w̄ N ((i - n/2)/n)²)`.
pub fn chirp_diag(w_bar: f64, base: usize, n: usize) -> Vec<C> {
    (0..n)
        .map(|i| {
            let u = (i as f64 - n as f64 / 2.0) / n as f64;
            C::from_polar(1.0, std::f64::consts::PI * w_bar * base as f64 * u * u)
        })
        .collect()
}

pub fn kron_all(mats: &[Mat]) -> Mat {
    mats.iter()
        .skip(1)
        .fold(mats[0].clone(), |acc, m| acc.kronecker(m))
}

pub fn identity(n: usize) -> Mat {
    Mat::identity(n, n)
}

pub fn select(indices: &[usize], n: usize) -> Mat {
    let mut m = Mat::zeros(indices.len(), n);
    for (r, &i) in indices.iter().enumerate() {
        m[(r, i)] = C::new(1.0, 0.0);
    }
    m
}

/// `M F C U` for a constant chirp, from first principles.
pub fn dense_sensing(grid: &GridSpec, chirp: &ChirpSpec, mask: &SamplingMask) -> Mat {
    let (wx, wy) = match chirp {
        ChirpSpec::Constant { wx, wy } => (*wx, *wy),
        _ => panic!("constant chirp expected"),
    };
    let (base, recon, modu) = (grid.base(), grid.recon(), grid.modulation());
    let rates = [wx, wy, 0.0];
    let u = kron_all(
        &(0..base.len())
            .map(|d| upsample(recon[d], modu[d]))
            .collect::<Vec<_>>(),
    );
    let diag: Vec<Vec<C>> = (0..base.len())
        .map(|d| chirp_diag(rates[d], base[d], modu[d]))
        .collect();
    let c = Mat::from_diagonal(&nalgebra::DVector::from_vec(kron_vec(&diag)));
    let f = kron_all(&modu.iter().map(|&n| dft(n)).collect::<Vec<_>>());
    let total: usize = modu.iter().product();
    select(mask.indices(), total) * f * c * u
}

/// `M F_xy C F_z U` with one chirp rate pair per readout frequency.
pub fn dense_sensing_varying(grid: &GridSpec, rates: &[(f64, f64)], mask: &SamplingMask) -> Mat {
    let (base, recon, modu) = (grid.base(), grid.recon(), grid.modulation());
    let u = kron_all(
        &(0..3)
            .map(|d| upsample(recon[d], modu[d]))
            .collect::<Vec<_>>(),
    );
    let fz = kron_all(&[identity(modu[0]), identity(modu[1]), dft(modu[2])]);
    let fxy = kron_all(&[dft(modu[0]), dft(modu[1]), identity(modu[2])]);
    let nz = modu[2];
    let mut diag = Vec::with_capacity(modu.iter().product());
    for ix in 0..modu[0] {
        for iy in 0..modu[1] {
            for kz in 0..nz {
                // readout frequency of this plane, then its schedule entry
                let m = (signed_frequency(kz, nz) + (nz / 2) as isize) as usize;
                let (wx, wy) = rates[m];
                diag.push(
                    chirp_diag(wx, base[0], modu[0])[ix] * chirp_diag(wy, base[1], modu[1])[iy],
                );
            }
        }
    }
    let c = Mat::from_diagonal(&nalgebra::DVector::from_vec(diag));
    let total: usize = modu.iter().product();
    select(mask.indices(), total) * fxy * c * fz * u
}

fn kron_vec(parts: &[Vec<C>]) -> Vec<C> {
    parts.iter().skip(1).fold(parts[0].clone(), |acc, p| {
        acc.iter()
            .flat_map(|a| p.iter().map(move |b| a * b))
            .collect()
    })
}

/// Matrix of a linear map, column by column.
pub fn materialize(input: usize, apply: impl Fn(&[C]) -> Vec<C>) -> Mat {
    let cols: Vec<Vec<C>> = (0..input)
        .map(|j| {
            let mut e = vec![C::new(0.0, 0.0); input];
            e[j] = C::new(1.0, 0.0);
            apply(&e)
        })
        .collect();
    Mat::from_fn(cols[0].len(), input, |i, j| cols[j][i])
}

pub fn max_abs_diff(a: &Mat, b: &Mat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn soft(v: &DVector<C>, t: f64) -> DVector<C> {
    v.map(|z| {
        let m = z.norm();
        if m > t {
            z * (1.0 - t / m)
        } else {
            C::new(0.0, 0.0)
        }
    })
}

/// Chambolle–Pock for `min ‖α‖₁ s.t. ‖B α - ν‖ ≤ ε`.
pub fn l1_ball_oracle(b: &Mat, nu: &DVector<C>, eps: f64) -> DVector<C> {
    let l = b.clone().svd(false, false).singular_values.max();
    let (tau, sigma) = (0.99 / l, 0.99 / l);
    let mut x = DVector::<C>::zeros(b.ncols());
    let mut xbar = x.clone();
    let mut y = DVector::<C>::zeros(b.nrows());
    for k in 0..400_000 {
        let v = &y + (b * &xbar) * C::new(sigma, 0.0);
        // prox of σ g* via Moreau: v - σ P_ball(v / σ)
        let w = &v / C::new(sigma, 0.0) - nu;
        let n = w.norm();
        let proj = if n > eps {
            nu + w * C::new(eps / n, 0.0)
        } else {
            nu + w
        };
        let y_next = v - proj * C::new(sigma, 0.0);
        let dual_change = (&y_next - &y).norm();
        y = y_next;
        let next = soft(&(&x - b.adjoint() * &y * C::new(tau, 0.0)), tau);
        let change = (&next - &x).norm();
        xbar = &next * C::new(2.0, 0.0) - &x;
        x = next;
        if k > 100 && change < 1e-14 * x.norm() && dual_change < 1e-14 * y.norm().max(1.0) {
            break;
        }
    }
    x
}

/// Relative distance between the solver and the oracle on a small chirped
/// problem, and whether the solver output is feasible.
pub fn oracle_case(kind: BasisKind, noisy: bool) -> (f64, bool) {
    let n = 32;
    let chirp = ChirpSpec::isotropic(0.3);
    let grid = GridSpec::with_unit_fov(&[n], &chirp).unwrap();
    let n_c = grid.recon()[0];
    let mask = draw_uniform_mask(22, &[n_c], MaskMode::FullGrid, 5).unwrap();
    let op = SensingOperator::<f64>::band_limited(&grid, &chirp, &mask).unwrap();
    let psi = SparsityBasis::<f64>::new(kind, &[n]).unwrap();

    let mut alpha = vec![C::new(0.0, 0.0); n];
    for (i, v) in [
        (1, C::new(1.0, 0.5)),
        (7, C::new(-0.8, 0.2)),
        (19, C::new(0.3, -1.1)),
        (26, C::new(0.6, 0.6)),
    ] {
        alpha[i] = v;
    }
    let rho = psi.synthesize(&alpha).unwrap();
    let clean = op.forward(&rho);
    let (nu, eps) = if noisy {
        let nu = add_noise(&clean, &NoiseModel::new(0.02, 9).unwrap());
        let eps = s2mri::vector::distance(&nu, &clean);
        (nu, eps)
    } else {
        (clean, 0.0)
    };

    let b = materialize(n, |a| op.forward(&psi.synthesize(a).unwrap()));
    let expected = l1_ball_oracle(&b, &DVector::from_vec(nu.clone()), eps);

    let options = SolverOptions {
        max_iter: 20_000,
        tol: 1e-11,
        cg_tol: 1e-12,
        ..SolverOptions::default()
    };
    let report = solve_bp(Regularizer::L1 { basis: &psi }, &op, &nu, eps, &options).unwrap();
    let got = DVector::from_vec(report.solution.clone());
    let rel = (&got - &expected).norm() / expected.norm();
    let residual = s2mri::vector::distance(&op.forward(&report.image), &nu);
    (rel, within_ball(residual, eps, s2mri::vector::norm(&nu)))
}
