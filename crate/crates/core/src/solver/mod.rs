//! Constrained basis pursuit
//! `min R(x) s.t. ‖A x − ν‖₂ ≤ ε` with `R` the ℓ1 norm of synthesis
//! coefficients or the TV norm of the image, solved by Douglas–Rachford
//! splitting on the product space of `(x, r = A x)`.

mod cg;
mod prox;

pub use cg::{conjugate_gradient, conjugate_gradient_min, CgOutcome};
pub use prox::{project_l2_ball, prox_tv, soft_threshold, TvProx};

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::operators::{Composed, LinearOperator};
use crate::scalar::Real;
use crate::sparsity::SparsityBasis;
use crate::vector::{all_finite, distance, norm, sub};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    L1Synthesis,
    Tv,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::L1Synthesis => "l1",
            ProblemKind::Tv => "tv",
        })
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "l1" | "l1-synthesis" => Ok(ProblemKind::L1Synthesis),
            "tv" => Ok(ProblemKind::Tv),
            other => Err(Error::invalid(format!(
                "unknown problem '{other}' (expected l1 or tv)"
            ))),
        }
    }
}

/// The regularizer together with what it needs to know about the unknown.
#[derive(Clone, Copy, Debug)]
pub enum Regularizer<'a, T: Real> {
    /// `‖α‖₁` with `ρ = Ψα`.
    L1 { basis: &'a SparsityBasis<T> },
    /// `TV(ρ)` on an image of the given sizes.
    Tv { dims: &'a [usize] },
}

impl<T: Real> Regularizer<'_, T> {
    pub fn kind(&self) -> ProblemKind {
        match self {
            Regularizer::L1 { .. } => ProblemKind::L1Synthesis,
            Regularizer::Tv { .. } => ProblemKind::Tv,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// Stop once `‖x_{k+1} − x_k‖ / max(‖x_k‖, 1e-12)` falls below this.
    pub tol: f64,
    /// Douglas–Rachford step `γ`.
    pub gamma: f64,
    /// Relaxation `λ ∈ (0, 2)`.
    pub relaxation: f64,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    pub tv_iterations: usize,
    /// Residual tolerance of the final feasibility correction, relative to `‖ν‖`.
    pub polish_tol: f64,
    pub polish_max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            tol: 1e-6,
            gamma: 1.0,
            relaxation: 1.0,
            cg_tol: 1e-6,
            cg_max_iter: 100,
            tv_iterations: 50,
            polish_tol: 1e-12,
            polish_max_iter: 500,
        }
    }
}

impl SolverOptions {
    /// Tighter settings for noiseless sparse-recovery sweeps.
    pub fn phase_transition() -> Self {
        Self {
            max_iter: 3000,
            tol: 1e-8,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.tol, self.gamma, self.cg_tol, self.polish_tol]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite());
        let counts = self.max_iter > 0 && self.cg_max_iter > 0 && self.tv_iterations > 0;
        if !positive || !counts {
            return Err(Error::invalid(format!(
                "solver options must be positive: {self:?}"
            )));
        }
        if !(self.relaxation > 0.0 && self.relaxation < 2.0) {
            return Err(Error::invalid(format!(
                "relaxation must lie in (0, 2), got {}",
                self.relaxation
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport<T: Real> {
    pub kind: ProblemKind,
    /// The optimization variable: coefficients `α*` (ℓ1) or the image `ρ*` (TV).
    pub solution: Vec<Complex<T>>,
    /// The reconstructed image `ρ*` (`Ψα*` for ℓ1).
    pub image: Vec<Complex<T>>,
    pub iterations: usize,
    /// `‖A x − ν‖₂` of the returned solution.
    pub residual_norm: f64,
    /// Radius of the data-fidelity ball.
    pub epsilon: f64,
    /// The relative-change tolerance was met and the solution lies in the ball.
    pub converged: bool,
    pub feasible: bool,
    /// Relative change of the iterate, one entry per iteration.
    pub trace: Vec<f64>,
}

impl<T: Real> SolveReport<T> {
    /// `‖A x − ν‖² / σ²`.
    pub fn chi2(&self, sigma: f64) -> f64 {
        (self.residual_norm / sigma).powi(2)
    }
}

/// Residual slack, relative to `‖ν‖`, under which a solve counts as
/// feasible even for `ε = 0`.
pub const FEASIBILITY_FLOOR: f64 = 1e-9;

/// Whether `residual` lies in the ball of radius `eps`, with `χ²` slack of
/// `1e-6` relative and an absolute floor of `1e-9 ‖ν‖`.
pub fn within_ball(residual: f64, eps: f64, nu_norm: f64) -> bool {
    residual * residual <= eps * eps * (1.0 + 1e-6) || residual <= FEASIBILITY_FLOOR * nu_norm
}

/// Solves the constrained problem with `ε` the ℓ2 radius of the data ball.
pub fn solve_bp<T: Real>(
    regularizer: Regularizer<'_, T>,
    op: &dyn LinearOperator<T>,
    nu: &[Complex<T>],
    epsilon: f64,
    options: &SolverOptions,
) -> Result<SolveReport<T>> {
    options.validate()?;
    if nu.len() != op.output_len() || nu.is_empty() {
        return Err(Error::invalid(format!(
            "{} measurements for an operator with {} outputs",
            nu.len(),
            op.output_len()
        )));
    }
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!(
            "epsilon must be finite and non-negative, got {epsilon}"
        )));
    }
    if !all_finite(nu) {
        return Err(Error::NumericFailure(
            "measurements contain non-finite values".into(),
        ));
    }
    match regularizer {
        Regularizer::L1 { basis } => {
            if basis.len() != op.input_len() {
                return Err(Error::invalid(
                    "basis size does not match the operator input",
                ));
            }
            let a = Composed::new(op, basis);
            let gamma = T::lit(options.gamma);
            let mut report =
                douglas_rachford(&a, nu, epsilon, options, |x| soft_threshold(x, gamma))?;
            report.kind = ProblemKind::L1Synthesis;
            report.image = basis.synthesize(&report.solution)?;
            Ok(report)
        }
        Regularizer::Tv { dims } => {
            if dims.iter().product::<usize>() != op.input_len() {
                return Err(Error::invalid(format!(
                    "image grid {dims:?} does not match the operator input"
                )));
            }
            let mut prox = TvProx::new(dims, options.tv_iterations);
            let gamma = T::lit(options.gamma);
            let mut report = douglas_rachford(op, nu, epsilon, options, |x| prox.apply(x, gamma))?;
            report.kind = ProblemKind::Tv;
            report.image = report.solution.clone();
            Ok(report)
        }
    }
}

fn douglas_rachford<T: Real, A: LinearOperator<T> + ?Sized>(
    a: &A,
    nu: &[Complex<T>],
    epsilon: f64,
    opt: &SolverOptions,
    mut prox_reg: impl FnMut(&[Complex<T>]) -> Vec<Complex<T>>,
) -> Result<SolveReport<T>> {
    let eps = T::lit(epsilon);
    let relax = T::lit(opt.relaxation);
    let two = T::lit(2.0);
    let cg_tol = T::lit(opt.cg_tol);
    let normal = |x: &[Complex<T>]| {
        let mut y = a.adjoint(&a.forward(x));
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = *yi + *xi;
        }
        y
    };

    let mut y_x = a.adjoint(nu);
    let mut y_r = nu.to_vec();
    let mut p_x = y_x.clone();
    let mut prev: Option<Vec<Complex<T>>> = None;
    let mut trace = Vec::new();
    let mut tol_met = false;
    let mut iterations = 0;

    for _ in 0..opt.max_iter {
        iterations += 1;
        // projection onto {(x, r) : r = A x}
        let mut rhs = a.adjoint(&y_r);
        for (bi, yi) in rhs.iter_mut().zip(&y_x) {
            *bi = *bi + *yi;
        }
        p_x = conjugate_gradient_min(normal, &rhs, p_x, cg_tol, 1, opt.cg_max_iter).x;
        let p_r = a.forward(&p_x);

        let refl_x: Vec<Complex<T>> = p_x.iter().zip(&y_x).map(|(&p, &y)| p * two - y).collect();
        let refl_r: Vec<Complex<T>> = p_r.iter().zip(&y_r).map(|(&p, &y)| p * two - y).collect();
        let q_x = prox_reg(&refl_x);
        let q_r = project_l2_ball(&refl_r, nu, eps);
        let fixed_point_gap = (distance(&q_x, &p_x) / norm(&p_x).max(T::lit(1e-12))).as_f64();
        for ((y, q), p) in y_x.iter_mut().zip(&q_x).zip(&p_x) {
            *y = *y + (*q - *p) * relax;
        }
        for ((y, q), p) in y_r.iter_mut().zip(&q_r).zip(&p_r) {
            *y = *y + (*q - *p) * relax;
        }
        if !all_finite(&p_x) || !all_finite(&y_x) {
            return Err(Error::NumericFailure(format!(
                "non-finite iterate at iteration {iterations}"
            )));
        }
        if let Some(prev) = &prev {
            let change = (distance(&p_x, prev) / norm(prev).max(T::lit(1e-12))).as_f64();
            trace.push(change);
            if change < opt.tol && fixed_point_gap < opt.tol {
                tol_met = true;
                break;
            }
        } else {
            trace.push(f64::INFINITY);
        }
        prev = Some(p_x.clone());
    }

    let solution = polish(a, nu, eps, p_x, opt);
    let residual = distance(&a.forward(&solution), nu).as_f64();
    let feasible = within_ball(residual, epsilon, norm(nu).as_f64());
    Ok(SolveReport {
        kind: ProblemKind::Tv,
        image: Vec::new(),
        solution,
        iterations,
        residual_norm: residual,
        epsilon,
        converged: tol_met && feasible,
        feasible,
        trace,
    })
}

/// Least-squares correction `d` with `A d ≈ P_ball(A x) − A x`, found by
/// CG on the normal equations (the residual decreases monotonically, so an
/// early stop never makes things worse). The ball is shrunk by a relative
/// `1e-9` to land strictly inside.
fn polish<T: Real, A: LinearOperator<T> + ?Sized>(
    a: &A,
    nu: &[Complex<T>],
    eps: T,
    x: Vec<Complex<T>>,
    opt: &SolverOptions,
) -> Vec<Complex<T>> {
    let ax = a.forward(&x);
    let inner = eps * T::lit(1.0 - 1e-9);
    let gap = sub(&project_l2_ball(&ax, nu, inner), &ax);
    if norm(&gap) <= T::lit(opt.polish_tol) * norm(nu) {
        return x;
    }
    let normal = |d: &[Complex<T>]| a.adjoint(&a.forward(d));
    let rhs = a.adjoint(&gap);
    let d = conjugate_gradient(
        normal,
        &rhs,
        vec![Complex::default(); x.len()],
        T::lit(opt.polish_tol),
        opt.polish_max_iter,
    )
    .x;
    let polished: Vec<Complex<T>> = x.iter().zip(&d).map(|(&xi, &di)| xi + di).collect();
    let ax_new = a.forward(&polished);
    let before = distance(&ax, nu);
    let after = distance(&ax_new, nu);
    if all_finite(&polished) && (after <= eps || after < before) {
        polished
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{ChirpSpec, GridSpec};
    use crate::noise::relative_error;
    use crate::operators::testing::random_vector;
    use crate::operators::SensingOperator;
    use crate::sampling::{draw_uniform_mask, MaskMode, SamplingMask};
    use crate::sparsity::{hard_threshold, BasisKind};
    use crate::vector::l1_norm;

    type C = Complex<f64>;

    fn fully_sampled(n: usize) -> SensingOperator<f64> {
        let grid = GridSpec::with_unit_fov(&[n], &ChirpSpec::none()).unwrap();
        SensingOperator::band_limited(&grid, &ChirpSpec::none(), &SamplingMask::all(vec![n]))
            .unwrap()
    }

    #[test]
    fn full_sampling_recovers() {
        let op = fully_sampled(32);
        let rho = random_vector::<f64>(32, 1);
        let nu = op.forward(&rho);
        let basis = SparsityBasis::<f64>::new(BasisKind::Haar, &[32]).unwrap();
        let rep = solve_bp(
            Regularizer::L1 { basis: &basis },
            &op,
            &nu,
            0.0,
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(relative_error(&rho, &rep.image).unwrap() <= 1e-3);
        assert!(rep.feasible);
        let known = l1_norm(&basis.analyze(&rho).unwrap());
        assert!(l1_norm(&rep.solution) <= known + 1e-6);
        let rep = solve_bp(
            Regularizer::Tv { dims: &[32] },
            &op,
            &nu,
            0.0,
            &SolverOptions::default(),
        )
        .unwrap();
        assert!(relative_error(&rho, &rep.image).unwrap() <= 1e-3);
    }

    #[test]
    fn recovers_a_single_spike() {
        let n = 256;
        let grid = GridSpec::with_unit_fov(&[n], &ChirpSpec::none()).unwrap();
        let mask = draw_uniform_mask(64, &[n], MaskMode::FullGrid, 3).unwrap();
        let op = SensingOperator::<f64>::band_limited(&grid, &ChirpSpec::none(), &mask).unwrap();
        let mut rho = vec![C::default(); n];
        rho[77] = C::new(1.5, -0.5);
        let nu = op.forward(&rho);
        let basis = SparsityBasis::new(BasisKind::Dirac, &[n]).unwrap();
        let rep = solve_bp(
            Regularizer::L1 { basis: &basis },
            &op,
            &nu,
            0.0,
            &SolverOptions::phase_transition(),
        )
        .unwrap();
        assert!(relative_error(&rho, &rep.image).unwrap() <= 1e-3);
        assert!(rep.converged);
    }

    #[test]
    fn noisy_solve_is_feasible_and_deterministic() {
        let n = 64;
        let grid = GridSpec::with_unit_fov(&[n], &ChirpSpec::isotropic(0.3)).unwrap();
        let nc = grid.recon()[0];
        let mask = draw_uniform_mask(40, &[nc], MaskMode::FullGrid, 9).unwrap();
        let op =
            SensingOperator::<f64>::band_limited(&grid, &ChirpSpec::isotropic(0.3), &mask).unwrap();
        let basis = SparsityBasis::new(BasisKind::Haar, &[n]).unwrap();
        let alpha = hard_threshold(&random_vector::<f64>(n, 2), 6).unwrap();
        let mut nu = op.forward(&basis.synthesize(&alpha).unwrap());
        let noise = random_vector::<f64>(nu.len(), 8);
        nu.iter_mut().zip(&noise).for_each(|(v, e)| *v += e * 0.01);
        let eps = 0.01 * (2.0 * nu.len() as f64).sqrt();
        let run = || {
            solve_bp(
                Regularizer::L1 { basis: &basis },
                &op,
                &nu,
                eps,
                &SolverOptions::phase_transition(),
            )
            .unwrap()
        };
        let (a, b) = (run(), run());
        assert!(
            a.converged && a.feasible && a.residual_norm <= eps * (1.0 + 1e-6),
            "{} {} {}",
            a.residual_norm,
            eps,
            a.iterations
        );
        assert_eq!(a.solution, b.solution);
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn rejects_bad_input() {
        let op = fully_sampled(8);
        let basis = SparsityBasis::<f64>::new(BasisKind::Dirac, &[8]).unwrap();
        let reg = Regularizer::L1 { basis: &basis };
        let nu = random_vector::<f64>(8, 1);
        assert!(solve_bp(reg, &op, &nu[..7], 0.0, &SolverOptions::default()).is_err());
        assert!(solve_bp(reg, &op, &nu, -1.0, &SolverOptions::default()).is_err());
        let bad = SolverOptions {
            relaxation: 2.0,
            ..SolverOptions::default()
        };
        assert!(solve_bp(reg, &op, &nu, 0.0, &bad).is_err());
        let mut nan = nu.clone();
        nan[0] = C::new(f64::NAN, 0.0);
        assert!(matches!(
            solve_bp(reg, &op, &nan, 0.0, &SolverOptions::default()),
            Err(Error::NumericFailure(_))
        ));
        assert!(solve_bp(
            Regularizer::Tv { dims: &[3, 3] },
            &op,
            &nu,
            0.0,
            &SolverOptions::default()
        )
        .is_err());
    }

    #[test]
    fn problem_kind_parses() {
        assert_eq!("TV".parse::<ProblemKind>().unwrap(), ProblemKind::Tv);
        assert_eq!(
            "l1".parse::<ProblemKind>().unwrap(),
            ProblemKind::L1Synthesis
        );
        assert!("l0".parse::<ProblemKind>().is_err());
    }
}
