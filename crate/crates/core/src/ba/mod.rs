//! Baker–Akhiezer functions on the Riemann sphere with `N` pairs of glued
//! points `(R^k₊, R^k₋)` and gluing parameters `τ_k`.
//!
//! `ψ(λ) = e^{θ(λ)}(1 + Σ a_j/(λ − R^j₊))` has simple poles at `R^k₊` with
//! `res_{R^k₊} ψ dλ = τ_k ψ(R^k₋)`; the conjugate form
//! `ψ*(λ) = e^{−θ(λ)}(1 + Σ b_j/(λ − R^j₋)) dλ` has poles at `R^k₋` with
//! `res_{R^k₋} ψ* = −τ_k ψ*(R^k₊)/dλ`. Both are finite linear solves; the
//! potential is `u = 2∂ₓ Σ a_j`. A pair with `τ_k = 0` is unglued and drops
//! out of the problem.

mod checks;
mod kernel;
mod system;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{re, Cx, Real};

pub use checks::{
    deltau1_quotients, deromega_residual, find_ungluing, kdv_residual, kp_residual, tauder1_rhs, verify_combined_flow,
    verify_dpsi, verify_tauder1, CombinedFlowReport, CombinedPath, Ungluing,
};
pub use kernel::{cba_kernel, CBASample, KernelDirection};
pub use system::{Direction, Side, MAX_CONDITION};

use system::{theta, System, X};

/// Minimum distance between any two marked points.
pub const MIN_SEPARATION: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublePoint<T> {
    #[serde(rename = "R_plus")]
    pub plus: Cx<T>,
    #[serde(rename = "R_minus")]
    pub minus: Cx<T>,
}

/// Marked points of a genus-zero curve with double points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpectralData<T>", bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct SpectralDataG0<T> {
    pairs: Vec<DoublePoint<T>>,
    kdv_symmetric: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectralData<T> {
    pairs: Vec<DoublePoint<T>>,
    #[serde(default)]
    #[allow(dead_code)]
    kdv_symmetric: Option<bool>,
}

impl<T: Real> TryFrom<RawSpectralData<T>> for SpectralDataG0<T> {
    type Error = Error;
    fn try_from(raw: RawSpectralData<T>) -> Result<Self> {
        SpectralDataG0::new(raw.pairs)
    }
}

impl<T: Real> SpectralDataG0<T> {
    /// Validates pairwise separation; KdV symmetry (`R₊ = −R₋`, `R₋ > 0`
    /// real) is detected, not declared.
    pub fn new(pairs: Vec<DoublePoint<T>>) -> Result<Self> {
        let points: Vec<Cx<T>> = pairs.iter().flat_map(|p| [p.plus, p.minus]).collect();
        for (i, a) in points.iter().enumerate() {
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(Error::InvalidArgument("marked points must be finite".into()));
            }
            for b in &points[i + 1..] {
                if (*a - *b).norm() < T::lit(MIN_SEPARATION) {
                    return Err(Error::InvalidArgument(format!(
                        "marked points {a} and {b} closer than {MIN_SEPARATION:e}"
                    )));
                }
            }
        }
        let kdv_symmetric =
            pairs.iter().all(|p| p.minus.im == T::zero() && p.minus.re > T::zero() && p.plus == -p.minus);
        Ok(Self { pairs, kdv_symmetric })
    }

    /// Pairs `(−κ_k, κ_k)`.
    pub fn kdv(kappas: &[T]) -> Result<Self> {
        if kappas.iter().any(|k| !(*k > T::zero())) {
            return Err(Error::InvalidArgument("KdV data need κ_k > 0".into()));
        }
        Self::new(kappas.iter().map(|&k| DoublePoint { plus: re(-k), minus: re(k) }).collect())
    }

    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[DoublePoint<T>] {
        &self.pairs
    }

    pub fn is_kdv_symmetric(&self) -> bool {
        self.kdv_symmetric
    }

    /// The same data with pair `k` removed.
    pub fn without_pair(&self, k: usize) -> Self {
        let mut pairs = self.pairs.clone();
        pairs.remove(k);
        Self::new(pairs).expect("subset of valid data")
    }

    /// Pairs reordered so that new pair `i` is old pair `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if !is_permutation(perm, self.n()) {
            return Err(Error::InvalidArgument("not a permutation".into()));
        }
        Self::new(perm.iter().map(|&i| self.pairs[i]).collect())
    }
}

fn is_permutation(perm: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    perm.len() == n && perm.iter().all(|&i| i < n && !std::mem::replace(&mut seen[i], true))
}

/// Times `t₁ = x, t₂ = y, t₃ = t, …` (finitely many) and gluing parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimePoint<T> {
    times: Vec<T>,
    taus: Vec<Cx<T>>,
}

impl<T: Real> TimePoint<T> {
    pub fn new(times: Vec<T>, taus: Vec<Cx<T>>) -> Self {
        Self { times, taus }
    }

    /// Real gluing parameters.
    pub fn real(times: Vec<T>, taus: &[T]) -> Self {
        Self { times, taus: taus.iter().map(|&t| re(t)).collect() }
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn taus(&self) -> &[Cx<T>] {
        &self.taus
    }

    /// `t_m` (zero beyond the stored list).
    pub fn time(&self, m: usize) -> T {
        self.times.get(m - 1).copied().unwrap_or_else(T::zero)
    }

    pub fn x(&self) -> T {
        self.time(1)
    }

    pub fn with_time(&self, m: usize, value: T) -> Self {
        let mut out = self.clone();
        if out.times.len() < m {
            out.times.resize(m, T::zero());
        }
        out.times[m - 1] = value;
        out
    }

    pub fn with_x(&self, x: T) -> Self {
        self.with_time(1, x)
    }

    pub fn with_tau(&self, k: usize, tau: Cx<T>) -> Self {
        let mut out = self.clone();
        out.taus[k] = tau;
        out
    }

    pub fn without_tau(&self, k: usize) -> Self {
        let mut out = self.clone();
        out.taus.remove(k);
        out
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self { times: self.times.clone(), taus: perm.iter().map(|&i| self.taus[i]).collect() }
    }

    /// Shifts along one direction (`t_m` or `τ_k`).
    pub fn shifted(&self, dir: Direction, h: T) -> Self {
        match dir {
            Direction::Time(m) => self.with_time(m, self.time(m) + h),
            Direction::Tau(k) => self.with_tau(k, self.taus[k] + h),
        }
    }

    /// Odd-index times only, as required by the KdV reduction.
    pub fn is_kdv_reduced(&self) -> bool {
        self.times.iter().enumerate().all(|(i, t)| i % 2 == 0 || *t == T::zero())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BAEvaluation<T> {
    pub a: Vec<Cx<T>>,
    pub chi1: Cx<T>,
    pub condition_number: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjugateBAEvaluation<T> {
    pub b: Vec<Cx<T>>,
    pub condition_number: T,
}

/// Both expansions at one time point, with cached derivatives.
pub struct BaSolution<T: Real> {
    data: SpectralDataG0<T>,
    tp: TimePoint<T>,
    psi: System<T>,
    conj: System<T>,
}

impl<T: Real> BaSolution<T> {
    pub fn new(data: &SpectralDataG0<T>, tp: &TimePoint<T>) -> Result<Self> {
        Ok(Self {
            psi: System::new(data, tp, Side::Function)?,
            conj: System::new(data, tp, Side::Conjugate)?,
            data: data.clone(),
            tp: tp.clone(),
        })
    }

    pub fn data(&self) -> &SpectralDataG0<T> {
        &self.data
    }

    pub fn time_point(&self) -> &TimePoint<T> {
        &self.tp
    }

    pub(crate) fn system(&self, side: Side) -> &System<T> {
        match side {
            Side::Function => &self.psi,
            Side::Conjugate => &self.conj,
        }
    }

    pub fn evaluation(&self) -> BAEvaluation<T> {
        let a = self.psi.derivative(&[]);
        let chi1 = a.iter().fold(re(T::zero()), |s, v| s + *v);
        BAEvaluation { a, chi1, condition_number: self.psi.condition() }
    }

    pub fn conjugate_evaluation(&self) -> ConjugateBAEvaluation<T> {
        ConjugateBAEvaluation { b: self.conj.derivative(&[]), condition_number: self.conj.condition() }
    }

    /// `∂^α a` (or `∂^α b`) for the given directions.
    pub fn coefficients(&self, side: Side, dirs: &[Direction]) -> Vec<Cx<T>> {
        self.system(side).derivative(dirs)
    }

    /// `u = 2 Σ ∂ₓ a_j`.
    pub fn potential(&self) -> Cx<T> {
        self.potential_derivative(&[])
    }

    /// `∂^α u`.
    pub fn potential_derivative(&self, dirs: &[Direction]) -> Cx<T> {
        let mut all = dirs.to_vec();
        all.push(X);
        self.psi.derivative(&all).iter().fold(re(T::zero()), |s, v| s + *v) * T::lit(2.0)
    }

    /// `∂^α` of the rational factor: `ψ = e^{θ}·φ`, `ψ* = e^{−θ}·φ*` (with `dλ` stripped).
    pub fn reduced(&self, side: Side, lambda: Cx<T>, dirs: &[Direction]) -> Result<Cx<T>> {
        check_pole(self.system(side), lambda)?;
        Ok(self.system(side).reduced(lambda, dirs))
    }

    pub fn exponent(&self, lambda: Cx<T>) -> Cx<T> {
        theta(&self.tp, lambda)
    }

    pub fn psi(&self, lambda: Cx<T>) -> Result<Cx<T>> {
        Ok(self.exponent(lambda).exp() * self.reduced(Side::Function, lambda, &[])?)
    }

    /// `ψ*(λ)/dλ`.
    pub fn psi_star(&self, lambda: Cx<T>) -> Result<Cx<T>> {
        Ok((-self.exponent(lambda)).exp() * self.reduced(Side::Conjugate, lambda, &[])?)
    }

    /// Largest residual of the residue conditions of both linear systems.
    pub fn solve_residual(&self) -> T {
        self.psi.residual().max(self.conj.residual())
    }
}

pub fn solve_ba<T: Real>(data: &SpectralDataG0<T>, tp: &TimePoint<T>) -> Result<BAEvaluation<T>> {
    let sys = System::new(data, tp, Side::Function)?;
    let a = sys.derivative(&[]);
    let chi1 = a.iter().fold(re(T::zero()), |s, v| s + *v);
    Ok(BAEvaluation { a, chi1, condition_number: sys.condition() })
}

pub fn solve_ba_conjugate<T: Real>(data: &SpectralDataG0<T>, tp: &TimePoint<T>) -> Result<ConjugateBAEvaluation<T>> {
    let sys = System::new(data, tp, Side::Conjugate)?;
    Ok(ConjugateBAEvaluation { b: sys.derivative(&[]), condition_number: sys.condition() })
}

pub fn potential_u<T: Real>(data: &SpectralDataG0<T>, tp: &TimePoint<T>) -> Result<Cx<T>> {
    let sys = System::new(data, tp, Side::Function)?;
    Ok(sys.derivative(&[X]).iter().fold(re(T::zero()), |s, v| s + *v) * T::lit(2.0))
}

pub fn eval_psi<T: Real>(data: &SpectralDataG0<T>, tp: &TimePoint<T>, lambda: Cx<T>) -> Result<Cx<T>> {
    let sys = System::new(data, tp, Side::Function)?;
    check_pole(&sys, lambda)?;
    Ok(theta(tp, lambda).exp() * sys.reduced(lambda, &[]))
}

/// `ψ*(λ)/dλ`.
pub fn eval_psi_star<T: Real>(data: &SpectralDataG0<T>, tp: &TimePoint<T>, lambda: Cx<T>) -> Result<Cx<T>> {
    let sys = System::new(data, tp, Side::Conjugate)?;
    check_pole(&sys, lambda)?;
    Ok((-theta(tp, lambda)).exp() * sys.reduced(lambda, &[]))
}

fn check_pole<T: Real>(sys: &System<T>, lambda: Cx<T>) -> Result<()> {
    for p in sys.poles() {
        if (lambda - *p).norm() <= T::lit(16.0) * T::epsilon() * T::one().max(p.norm()) {
            return Err(Error::PoleAtDivisor { re: lambda.re.to_f64_lossy(), im: lambda.im.to_f64_lossy() });
        }
    }
    Ok(())
}

/// CSV of `u` along a combined path: columns `x,tau,u_re,u_im`.
pub fn write_potential_grid_csv<T: Real, W: Write>(
    data: &SpectralDataG0<T>,
    path: &CombinedPath<T>,
    base: &TimePoint<T>,
    xs: &[T],
    taus: &[T],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "tau", "u_re", "u_im"])?;
    for &tau in taus {
        for &x in xs {
            let u = potential_u(data, &path.time_point(base, tau)?.with_x(x))?;
            w.write_record([x.to_string(), tau.to_string(), u.re.to_string(), u.im.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests;
