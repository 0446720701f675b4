//! The residue conditions as a linear system and all its derivatives.
//!
//! With `θ(λ) = Σ λ^m t_m`, `g_k = e^{θ(R^k₋) − θ(R^k₊)}` and `q_k = τ_k g_k`,
//! the pole coefficients of `ψ = e^{θ}(1 + Σ v_j/(λ − P_j))` satisfy
//!
//! `v = s·q ⊙ (1 + C v)`,
//!
//! with `s = +1`, `P = R₊`, `C_kj = 1/(R^k₋ − R^j₊)` for the function and
//! `s = −1`, `P = R₋`, `C_kj = 1/(R^k₊ − R^j₋)` for the conjugate form.
//! Differentiating by Leibniz gives, for any multiset of directions `α`,
//!
//! `(I − s·diag(q)C) ∂^α v = s Σ_{∅≠S⊆α} ∂^S q ⊙ ([S = α] + C ∂^{α∖S} v)`,
//!
//! where `∂_{t_m} q_k = δ_{m,k} q_k` with `δ_{m,k} = (R^k₋)^m − (R^k₊)^m`
//! and `∂_{τ_j} q_k = [j = k] g_k`. Rows with `|q_k| > 1` are divided by
//! `q_k` so that no entry of the system overflows.

use std::cell::RefCell;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Lu};
use crate::scalar::{cx, re, Cx, Real};

use super::{SpectralDataG0, TimePoint};

/// Condition number above which the system counts as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// A differentiation variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    /// `t_m`, `m ≥ 1` (`t₁ = x`, `t₂ = y`).
    Time(usize),
    /// `τ_k`, zero-based.
    Tau(usize),
}

pub const X: Direction = Direction::Time(1);
pub const Y: Direction = Direction::Time(2);

/// Which of the two pole expansions a system describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Function,
    Conjugate,
}

pub(crate) fn theta<T: Real>(tp: &TimePoint<T>, lambda: Cx<T>) -> Cx<T> {
    let mut acc = cx(T::zero(), T::zero());
    let mut pow = lambda;
    for &t in tp.times() {
        acc = acc + pow * t;
        pow = pow * lambda;
    }
    acc
}

pub(crate) struct System<T: Real> {
    sign: T,
    /// Pole locations of the expansion.
    poles: Vec<Cx<T>>,
    cmat: CMatrix<T>,
    lu: Lu<T>,
    /// Row scale `ρ_k`, `ρ_k q_k` and `ρ_k g_k`.
    rho: Vec<Cx<T>>,
    rho_q: Vec<Cx<T>>,
    rho_g: Vec<Cx<T>>,
    plus: Vec<Cx<T>>,
    minus: Vec<Cx<T>>,
    cache: RefCell<HashMap<Vec<Direction>, Vec<Cx<T>>>>,
}

impl<T: Real> System<T> {
    pub fn new(data: &SpectralDataG0<T>, tp: &TimePoint<T>, side: Side) -> Result<Self> {
        let n = data.n();
        if tp.taus().len() != n {
            return Err(Error::LengthMismatch { expected: n, got: tp.taus().len() });
        }
        let plus: Vec<Cx<T>> = data.pairs().iter().map(|p| p.plus).collect();
        let minus: Vec<Cx<T>> = data.pairs().iter().map(|p| p.minus).collect();
        let (sign, poles, cmat) = match side {
            Side::Function => (T::one(), plus.clone(), CMatrix::from_fn(n, |k, j| (minus[k] - plus[j]).inv())),
            Side::Conjugate => (-T::one(), minus.clone(), CMatrix::from_fn(n, |k, j| (plus[k] - minus[j]).inv())),
        };
        let mut rho = Vec::with_capacity(n);
        let mut rho_q = Vec::with_capacity(n);
        let mut rho_g = Vec::with_capacity(n);
        for k in 0..n {
            let lg = theta(tp, minus[k]) - theta(tp, plus[k]);
            let tau = tp.taus()[k];
            let log_q = if tau.norm() == T::zero() { T::neg_infinity() } else { tau.norm().ln() + lg.re };
            if log_q <= T::zero() {
                let g = lg.exp();
                rho.push(re(T::one()));
                rho_q.push(tau * g);
                rho_g.push(g);
            } else {
                let r = (-lg).exp() / tau;
                rho.push(r);
                rho_q.push(re(T::one()));
                rho_g.push(tau.inv());
            }
        }
        let a = CMatrix::from_fn(n, |k, j| {
            let diag = if k == j { rho[k] } else { re(T::zero()) };
            diag - rho_q[k] * cmat[(k, j)] * sign
        });
        let lu = Lu::new(&a);
        if lu.is_singular() || lu.condition() > T::lit(MAX_CONDITION) {
            return Err(Error::SingularBASystem { condition: lu.condition().to_f64_lossy() });
        }
        Ok(Self { sign, poles, cmat, lu, rho, rho_q, rho_g, plus, minus, cache: RefCell::new(HashMap::new()) })
    }

    pub fn condition(&self) -> T {
        self.lu.condition()
    }

    pub fn poles(&self) -> &[Cx<T>] {
        &self.poles
    }

    pub fn n(&self) -> usize {
        self.poles.len()
    }

    /// `ρ_k ∂^S q_k` for the directions `S`.
    fn scaled_q_derivative(&self, k: usize, dirs: &[Direction]) -> Cx<T> {
        let mut taus = 0;
        let mut factor = re(T::one());
        for d in dirs {
            match *d {
                Direction::Tau(j) if j == k => taus += 1,
                Direction::Tau(_) => return re(T::zero()),
                Direction::Time(m) => {
                    factor = factor * (self.minus[k].powu(m as u32) - self.plus[k].powu(m as u32));
                }
            }
        }
        match taus {
            0 => self.rho_q[k] * factor,
            1 => self.rho_g[k] * factor,
            _ => re(T::zero()),
        }
    }

    /// `∂^α v` for the multiset `α` (order irrelevant); the empty slice gives `v`.
    pub fn derivative(&self, dirs: &[Direction]) -> Vec<Cx<T>> {
        let mut key = dirs.to_vec();
        key.sort();
        if let Some(v) = self.cache.borrow().get(&key) {
            return v.clone();
        }
        let n = self.n();
        let len = key.len();
        let mut rhs = vec![re(T::zero()); n];
        // Leibniz over index subsets S ≠ ∅ of α.
        for mask in 1usize..(1 << len) {
            let s: Vec<Direction> = (0..len).filter(|i| mask >> i & 1 == 1).map(|i| key[i]).collect();
            let rest: Vec<Direction> = (0..len).filter(|i| mask >> i & 1 == 0).map(|i| key[i]).collect();
            let inner: Vec<Cx<T>> = if rest.is_empty() {
                let v = self.derivative(&[]);
                let cv = self.cmat.mul_vec(&v);
                cv.into_iter().map(|c| c + T::one()).collect()
            } else {
                self.cmat.mul_vec(&self.derivative(&rest))
            };
            for k in 0..n {
                rhs[k] = rhs[k] + self.scaled_q_derivative(k, &s) * inner[k] * self.sign;
            }
        }
        if len == 0 {
            for (r, q) in rhs.iter_mut().zip(&self.rho_q) {
                *r = *q * self.sign;
            }
        }
        let v = self.lu.solve(&rhs);
        self.cache.borrow_mut().insert(key, v.clone());
        v
    }

    /// `1 + Σ_j ∂^α v_j/(λ − P_j)` for `α = ∅`, else without the `1`.
    pub fn reduced(&self, lambda: Cx<T>, dirs: &[Direction]) -> Cx<T> {
        let v = self.derivative(dirs);
        let base = if dirs.is_empty() { re(T::one()) } else { re(T::zero()) };
        v.iter().zip(&self.poles).fold(base, |acc, (vj, pj)| acc + *vj / (lambda - *pj))
    }

    /// `(1 + C ∂^α v)_k` resp. `(C ∂^α v)_k`: the reduced function at the
    /// partner point of pair `k`.
    pub fn at_partner(&self, k: usize, dirs: &[Direction]) -> Cx<T> {
        let cv = self.cmat.mul_vec(&self.derivative(dirs));
        if dirs.is_empty() {
            cv[k] + T::one()
        } else {
            cv[k]
        }
    }

    /// Residual of the undifferentiated, unscaled residue conditions.
    pub fn residual(&self) -> T {
        let v = self.derivative(&[]);
        let cv = self.cmat.mul_vec(&v);
        (0..self.n()).fold(T::zero(), |m, k| {
            let r = self.rho[k] * v[k] - self.rho_q[k] * (cv[k] + T::one()) * self.sign;
            m.max(r.norm())
        })
    }
}
