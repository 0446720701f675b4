//! Cauchy–Baker–Akhiezer kernel `ω(λ, μ) = ∫_x^{±∞} ψ(λ, x′)ψ*(μ, x′) dx′`.
//!
//! The integrand is `e^{(λ−μ)x′}` times a bounded rational factor, so the
//! integral converges towards `+∞` when `Re(λ − μ) < 0` and towards `−∞`
//! when `Re(λ − μ) > 0`. It is integrated panel by panel up to
//! `X = x ± W`, where the exponential envelope has fallen below `1e−14`, and
//! the remainder is closed with the pure-exponential tail
//! `ψψ*(X)/(μ − λ)`.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::integrate;
use crate::scalar::{Cx, Real};

use super::{BaSolution, Side, SpectralDataG0, TimePoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelDirection {
    PlusInfinity,
    MinusInfinity,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CBASample<T> {
    pub lambda: Cx<T>,
    pub mu: Cx<T>,
    /// `ω/dμ`.
    pub omega_over_dmu: Cx<T>,
    pub convergence_direction: KernelDirection,
}

/// `|Re(λ − μ)|` below which neither direction converges.
const MIN_DECAY: f64 = 1e-8;
/// Envelope `e^{−|Re(λ−μ)|W}` at the truncation point.
const ENVELOPE: f64 = 1e-14;

pub fn cba_kernel<T: Real>(
    data: &SpectralDataG0<T>,
    tp: &TimePoint<T>,
    lambda: Cx<T>,
    mu: Cx<T>,
) -> Result<CBASample<T>> {
    let s = lambda - mu;
    if s.re.abs() < T::lit(MIN_DECAY) {
        return Err(Error::NonConvergentDirection { real_part: s.re.to_f64_lossy() });
    }
    let (direction, sign) = if s.re < T::zero() {
        (KernelDirection::PlusInfinity, T::one())
    } else {
        (KernelDirection::MinusInfinity, -T::one())
    };
    let x = tp.x();
    let width = -T::lit(ENVELOPE).ln() / s.re.abs();
    let end = x + sign * width;

    // Integrand relative to the value of the exponential at x, so large |x|
    // cannot overflow intermediate sums; rescaled at the end.
    let product = |xp: T| -> Result<Cx<T>> {
        let sol = BaSolution::new(data, &tp.with_x(xp))?;
        let phi = sol.reduced(Side::Function, lambda, &[])?;
        let phi_star = sol.reduced(Side::Conjugate, mu, &[])?;
        Ok((s * (xp - x)).exp() * phi * phi_star)
    };
    let panel = T::one().min(T::one() / s.norm());
    let panels = (width / panel).ceil().to_usize().unwrap_or(1).max(1);
    let h = width / T::from_count(panels);
    let mut total = Cx::new(T::zero(), T::zero());
    let failure = RefCell::new(None);
    for p in 0..panels {
        let a = x + sign * h * T::from_count(p);
        let b = a + sign * h;
        let (v, _) = integrate(
            |xp| match product(xp) {
                Ok(v) => v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    Cx::new(T::zero(), T::zero())
                }
            },
            a,
            b,
            T::lit(1e-15),
            T::lit(1e-13),
        );
        total = total + v;
    }
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let tail = product(end)? / (mu - lambda);
    let scale = (tp_exponent(tp, lambda) - tp_exponent(tp, mu)).exp();
    Ok(CBASample { lambda, mu, omega_over_dmu: (total + tail) * scale, convergence_direction: direction })
}

fn tp_exponent<T: Real>(tp: &TimePoint<T>, lambda: Cx<T>) -> Cx<T> {
    super::system::theta(tp, lambda)
}
