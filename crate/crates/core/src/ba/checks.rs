//! Derivative identities of the genus-zero BA engine, each checked against
//! finite differences of independently solved systems.
//!
//! Analytic derivatives come from the differentiated linear system; every finite
//! difference below re-solves the linear system at shifted arguments, so the
//! two sides share no intermediate state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::StepHalving;
use crate::scalar::{re, Cx, Real};

use super::system::{theta, Direction, Side, X, Y};
use super::{cba_kernel, eval_psi, potential_u, solve_ba, BaSolution, SpectralDataG0, TimePoint};

/// Fourth-order central difference of a fallible complex function.
fn central<T: Real>(f: impl Fn(T) -> Result<Cx<T>>, h: T) -> Result<Cx<T>> {
    let two = T::lit(2.0);
    let (p1, m1, p2, m2) = (f(h)?, f(-h)?, f(two * h)?, f(-two * h)?);
    Ok(((m2 - p2) + (p1 - m1) * T::lit(8.0)) / (T::lit(12.0) * h))
}

/// Step for differences in a parameter of size `scale`.
fn step<T: Real>(scale: T) -> T {
    T::lit(1e-3) * T::one().max(scale)
}

/// Step in `τ_k`. The solution depends on `τ_k` through `q_k = τ_k g_k`,
/// so the step is limited to a small change of `q_k` when `|g_k|` is large.
fn tau_step<T: Real>(data: &SpectralDataG0<T>, tp: &TimePoint<T>, k: usize) -> T {
    let pair = data.pairs()[k];
    let g = (theta(tp, pair.minus) - theta(tp, pair.plus)).re.exp();
    let tau = tp.taus()[k].norm();
    let limit = (T::one().max(tau * g) / g).min(T::one().max(tau));
    T::lit(1e-3) * limit
}

fn check_pair<T: Real>(data: &SpectralDataG0<T>, k: usize) -> Result<()> {
    if k >= data.n() {
        return Err(Error::InvalidArgument(format!("pair index {k} out of range (N = {})", data.n())));
    }
    Ok(())
}

/// `∂_{τ_k}ψ(λ)` by finite differences against `−ω(λ, R^k₊)·ψ(R^k₋)`, at
/// the default step and its half.
pub fn verify_dpsi<T: Real>(
    data: &SpectralDataG0<T>,
    tp: &TimePoint<T>,
    k: usize,
    lambda: Cx<T>,
) -> Result<StepHalving<T>> {
    check_pair(data, k)?;
    let pair = data.pairs()[k];
    let omega = cba_kernel(data, tp, lambda, pair.plus)?.omega_over_dmu;
    let rhs = -omega * eval_psi(data, tp, pair.minus)?;
    let h = tau_step(data, tp, k);
    let residual = |h: T| -> Result<T> {
        let fd = central(|s| eval_psi(data, &tp.shifted(Direction::Tau(k), s), lambda), h)?;
        Ok((fd - rhs).norm())
    };
    Ok(StepHalving { h, at_h: residual(h)?, at_half: residual(h / T::lit(2.0))? })
}

/// `2∂ₓ[ψ(R^k₋)·ψ*(R^k₊)/dλ]` with the x-derivative taken analytically.
pub fn tauder1_rhs<T: Real>(data: &SpectralDataG0<T>, tp: &TimePoint<T>, k: usize) -> Result<Cx<T>> {
    check_pair(data, k)?;
    let sol = BaSolution::new(data, tp)?;
    let pair = data.pairs()[k];
    let (psi, conj) = (sol.system(Side::Function), sol.system(Side::Conjugate));
    let g = (theta(tp, pair.minus) - theta(tp, pair.plus)).exp();
    let rate = pair.minus - pair.plus;
    let (phi, phi_x) = (psi.at_partner(k, &[]), psi.at_partner(k, &[X]));
    let (phi_star, phi_star_x) = (conj.at_partner(k, &[]), conj.at_partner(k, &[X]));
    Ok(g * (rate * phi * phi_star + phi_x * phi_star + phi * phi_star_x) * T::lit(2.0))
}

/// Largest `|FD_{τ_k} u − tauder1_rhs|` over the sample positions.
pub fn verify_tauder1<T: Real>(data: &SpectralDataG0<T>, tp: &TimePoint<T>, k: usize, xs: &[T]) -> Result<T> {
    check_pair(data, k)?;
    xs.iter().try_fold(T::zero(), |worst, &x| {
        let at = tp.with_x(x);
        let h = tau_step(data, &at, k);
        let fd = central(|s| potential_u(data, &at.shifted(Direction::Tau(k), s)), h)?;
        Ok(worst.max((fd - tauder1_rhs(data, &at, k)?).norm()))
    })
}

/// `(ψ_{xxτ} − ψ_{yτ} − uψ_τ)/ψ` with `τ = τ_k`, one value per `λ`. Each
/// equals `∂_{τ_k}u` whenever `ψ` solves the auxiliary KP problem.
pub fn deltau1_quotients<T: Real>(
    data: &SpectralDataG0<T>,
    tp: &TimePoint<T>,
    k: usize,
    lambdas: &[Cx<T>],
) -> Result<Vec<Cx<T>>> {
    check_pair(data, k)?;
    let sol = BaSolution::new(data, tp)?;
    let u = sol.potential();
    let tau = Direction::Tau(k);
    lambdas
        .iter()
        .map(|&l| {
            let phi = sol.reduced(Side::Function, l, &[])?;
            let phi_t = sol.reduced(Side::Function, l, &[tau])?;
            let phi_xt = sol.reduced(Side::Function, l, &[X, tau])?;
            let phi_xxt = sol.reduced(Side::Function, l, &[X, X, tau])?;
            let phi_yt = sol.reduced(Side::Function, l, &[Y, tau])?;
            Ok((phi_xxt + l * phi_xt * T::lit(2.0) - phi_yt - u * phi_t) / phi)
        })
        .collect()
}

/// `|FD_x ω(λ, μ) + ψ(λ)ψ*(μ)|` at the time point.
pub fn deromega_residual<T: Real>(data: &SpectralDataG0<T>, tp: &TimePoint<T>, lambda: Cx<T>, mu: Cx<T>) -> Result<T> {
    let x = tp.x();
    let fd = central(|s| Ok(cba_kernel(data, &tp.with_x(x + s), lambda, mu)?.omega_over_dmu), T::lit(1e-3))?;
    let sol = BaSolution::new(data, tp)?;
    Ok((fd + sol.psi(lambda)? * sol.psi_star(mu)?).norm())
}

/// Straight path through time space: `t_m = t_m(base) + c_m τ` for the
/// listed `(m, c_m)`, and `τ_k = α_k + β_k τ` for every pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CombinedPath<T> {
    pub time_coeffs: Vec<(usize, T)>,
    pub alphas: Vec<T>,
    pub betas: Vec<T>,
}

impl<T: Real> CombinedPath<T> {
    pub fn time_point(&self, base: &TimePoint<T>, tau: T) -> Result<TimePoint<T>> {
        if self.alphas.len() != self.betas.len() {
            return Err(Error::LengthMismatch { expected: self.alphas.len(), got: self.betas.len() });
        }
        if self.time_coeffs.iter().any(|&(m, _)| m == 0) {
            return Err(Error::InvalidArgument("time indices start at 1".into()));
        }
        let taus = self.alphas.iter().zip(&self.betas).map(|(&a, &b)| re(a + b * tau)).collect();
        let mut tp = TimePoint::new(base.times().to_vec(), taus);
        for &(m, c) in &self.time_coeffs {
            tp = tp.with_time(m, base.time(m) + c * tau);
        }
        Ok(tp)
    }

    /// `−α_k/β_k` for every pair with `β_k ≠ 0`.
    pub fn ungluing_times(&self) -> Vec<(usize, T)> {
        self.alphas
            .iter()
            .zip(&self.betas)
            .enumerate()
            .filter(|(_, (_, b))| **b != T::zero())
            .map(|(k, (&a, &b))| (k, -a / b))
            .collect()
    }
}

/// Path parameter at which pair `k` is unglued, with `|a_k|` solved there.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ungluing<T> {
    pub pair: usize,
    pub tau: T,
    pub a_k_abs: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombinedFlowReport<T> {
    /// Largest `|dû/dτ − Σ c_m ∂u/∂t_m − Σ β_k ∂u/∂τ_k|` over the samples.
    pub residual: T,
    pub ungluing: Vec<Ungluing<T>>,
}

/// Chain-rule decomposition of the combined hierarchy-plus-source flow at
/// path parameter `tau`. Every partial derivative is its own finite
/// difference of [`potential_u`].
pub fn verify_combined_flow<T: Real>(
    data: &SpectralDataG0<T>,
    path: &CombinedPath<T>,
    base: &TimePoint<T>,
    tau: T,
    xs: &[T],
) -> Result<CombinedFlowReport<T>> {
    if path.alphas.len() != data.n() {
        return Err(Error::LengthMismatch { expected: data.n(), got: path.alphas.len() });
    }
    let h = step(tau.abs());
    let mut residual = T::zero();
    for &x in xs {
        let at_x = base.with_x(x);
        let along = central(|s| potential_u(data, &path.time_point(&at_x, tau + s)?), h)?;
        let here = path.time_point(&at_x, tau)?;
        let mut split = re(T::zero());
        for &(m, c) in &path.time_coeffs {
            let dir = Direction::Time(m);
            split = split + central(|s| potential_u(data, &here.shifted(dir, s)), step(here.time(m).abs()))? * c;
        }
        for (k, &b) in path.betas.iter().enumerate() {
            if b != T::zero() {
                let dir = Direction::Tau(k);
                split = split + central(|s| potential_u(data, &here.shifted(dir, s)), tau_step(data, &here, k))? * b;
            }
        }
        residual = residual.max((along - split).norm());
    }
    let ungluing = path
        .ungluing_times()
        .into_iter()
        .map(|(k, t)| {
            let a = solve_ba(data, &path.time_point(base, t)?)?.a[k];
            Ok(Ungluing { pair: k, tau: t, a_k_abs: a.norm() })
        })
        .collect::<Result<_>>()?;
    Ok(CombinedFlowReport { residual, ungluing })
}

/// Bisection on `Re a_k` along the path inside `[lo, hi]`, which must
/// bracket a sign change.
pub fn find_ungluing<T: Real>(
    data: &SpectralDataG0<T>,
    path: &CombinedPath<T>,
    base: &TimePoint<T>,
    k: usize,
    lo: T,
    hi: T,
) -> Result<Ungluing<T>> {
    check_pair(data, k)?;
    let coefficient = |t: T| -> Result<Cx<T>> { Ok(solve_ba(data, &path.time_point(base, t)?)?.a[k]) };
    let (mut a, mut b) = (lo, hi);
    let mut fa = coefficient(a)?.re;
    let fb = coefficient(b)?.re;
    if fa == T::zero() {
        return Ok(Ungluing { pair: k, tau: a, a_k_abs: coefficient(a)?.norm() });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::InvalidArgument(format!("Re a_{k} does not change sign on [{lo}, {hi}]")));
    }
    for _ in 0..200 {
        let mid = (a + b) / T::lit(2.0);
        if mid <= a || mid >= b {
            break;
        }
        let fm = coefficient(mid)?.re;
        if fm == T::zero() {
            a = mid;
            b = mid;
            break;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    let (ca, cb) = (coefficient(a)?, coefficient(b)?);
    let (tau, value) = if ca.norm() <= cb.norm() { (a, ca) } else { (b, cb) };
    Ok(Ungluing { pair: k, tau, a_k_abs: value.norm() })
}

fn max_over<T: Real>(
    data: &SpectralDataG0<T>,
    tps: &[TimePoint<T>],
    lambdas: &[Cx<T>],
    f: impl Fn(&BaSolution<T>, Cx<T>, Cx<T>) -> Result<Cx<T>>,
) -> Result<T> {
    let mut worst = T::zero();
    for tp in tps {
        let sol = BaSolution::new(data, tp)?;
        let u = sol.potential();
        for &l in lambdas {
            worst = worst.max(f(&sol, l, u)?.norm());
        }
    }
    Ok(worst)
}

/// Largest `|e^{−θ}(−ψ_xx + ψ_y + uψ)|` over the time points and `λ`.
pub fn kp_residual<T: Real>(data: &SpectralDataG0<T>, tps: &[TimePoint<T>], lambdas: &[Cx<T>]) -> Result<T> {
    max_over(data, tps, lambdas, |sol, l, u| {
        let phi = sol.reduced(Side::Function, l, &[])?;
        let phi_x = sol.reduced(Side::Function, l, &[X])?;
        let phi_xx = sol.reduced(Side::Function, l, &[X, X])?;
        let phi_y = sol.reduced(Side::Function, l, &[Y])?;
        Ok(-(l * phi_x * T::lit(2.0)) - phi_xx + phi_y + u * phi)
    })
}

/// Largest `|e^{−θ}(−ψ_xx + uψ + λ²ψ)|`; needs KdV-symmetric data and
/// vanishing even times.
pub fn kdv_residual<T: Real>(data: &SpectralDataG0<T>, tps: &[TimePoint<T>], lambdas: &[Cx<T>]) -> Result<T> {
    if !data.is_kdv_symmetric() || !tps.iter().all(TimePoint::is_kdv_reduced) {
        return Err(Error::NotKdVSymmetric);
    }
    max_over(data, tps, lambdas, |sol, l, u| {
        let phi = sol.reduced(Side::Function, l, &[])?;
        let phi_x = sol.reduced(Side::Function, l, &[X])?;
        let phi_xx = sol.reduced(Side::Function, l, &[X, X])?;
        Ok(-(l * phi_x * T::lit(2.0)) - phi_xx + u * phi)
    })
}
