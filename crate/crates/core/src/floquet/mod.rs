//! Floquet theory of the periodic Schrödinger operator `H = −d²/dx² + u(x)`.
//!
//! The monodromy over one period `T` determines the Hill discriminant
//! `Δ(E) = tr M(E)`, the Bloch multipliers `ρ±` (roots of `ρ² − Δρ + 1 = 0`)
//! and the quasimomentum `μ` with `e^{iμT} = ρ₊`. Real energies with
//! `|Δ| ≤ 2` form the spectral bands; a root of `Δ = ±2` where `Δ′ = 0` and
//! `M = ±I` is a closed gap, i.e. a double point of the spectral curve.

mod edges;
mod propagator;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{mean, Field, PeriodicGrid};
use crate::scalar::{csqrt, cx, i_unit, re, Cx, Real};

pub use edges::{find_band_edges, find_band_edges_with, BandEdge, BandEdgeOptions, EdgeLevel, GapReport};
pub use propagator::{HillPropagator, Mat2};

/// `|Δ² − 4|` below which a Bloch pair is considered degenerate.
pub const DEGENERATE_TOL: f64 = 1e-8;

/// Real periodic potential; its period is the grid length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicPotential<T> {
    field: Field<T>,
}

impl<T: Real> PeriodicPotential<T> {
    pub fn new(field: Field<T>) -> Result<Self> {
        if !field.is_real() {
            if field.max_imag() > T::zero() {
                return Err(Error::InvalidArgument("potential must be real-valued".into()));
            }
            return Ok(Self { field: field.into_real() });
        }
        Ok(Self { field })
    }

    pub fn from_fn(grid: PeriodicGrid<T>, f: impl Fn(T) -> T) -> Self {
        Self { field: Field::from_fn_real(grid, f) }
    }

    pub fn zero(grid: PeriodicGrid<T>) -> Self {
        Self { field: Field::zeros(grid) }
    }

    pub fn field(&self) -> &Field<T> {
        &self.field
    }

    pub fn period(&self) -> T {
        self.field.grid().length()
    }

    pub fn grid(&self) -> &PeriodicGrid<T> {
        self.field.grid()
    }

    /// `u(x) + c`.
    pub fn shifted_by(&self, c: T) -> Self {
        Self { field: self.field.map_real(|v| v + c) }
    }
}

/// One-period monodromy at energy `E`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Monodromy<T> {
    pub m11: Cx<T>,
    pub m12: Cx<T>,
    pub m21: Cx<T>,
    pub m22: Cx<T>,
    pub energy: Cx<T>,
}

impl<T: Real> Monodromy<T> {
    fn from_mat(m: Mat2<T>, energy: Cx<T>) -> Self {
        Self { m11: m.0[0][0], m12: m.0[0][1], m21: m.0[1][0], m22: m.0[1][1], energy }
    }

    pub fn matrix(&self) -> Mat2<T> {
        Mat2([[self.m11, self.m12], [self.m21, self.m22]])
    }

    pub fn det(&self) -> Cx<T> {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(&self) -> Cx<T> {
        self.m11 + self.m22
    }

    /// Max-norm distance to `s·I`.
    pub fn distance_to_scalar(&self, s: T) -> T {
        let z = re(T::zero());
        self.matrix().distance(&Mat2([[re(s), z], [z, re(s)]]))
    }
}

/// Roots of `ρ² − Δρ + 1 = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Multipliers<T> {
    pub plus: Cx<T>,
    pub minus: Cx<T>,
    /// `Δ = ±2`: double root.
    pub degenerate: bool,
}

impl<T> Multipliers<T> {
    pub fn pair(&self) -> (Cx<T>, Cx<T>)
    where
        T: Copy,
    {
        (self.plus, self.minus)
    }
}

/// Multipliers for a discriminant value.
///
/// `ρ₊` is the root with `|ρ₊| ≥ 1`; when both lie on the unit circle the
/// tie is broken by `Im ρ₊ ≥ 0`, then by `Re ρ₊ ≥ 0`.
pub fn multipliers<T: Real>(delta: Cx<T>) -> Multipliers<T> {
    let two = T::lit(2.0);
    let disc = delta * delta - re(T::lit(4.0));
    let degenerate = disc.norm() <= T::lit(64.0) * T::epsilon() * T::one().max(delta.norm_sqr());
    let s = csqrt(disc);
    // Pick the sign avoiding cancellation, then use ρ₊ρ₋ = 1.
    let big = if (delta.conj() * s).re >= T::zero() { (delta + s) / two } else { (delta - s) / two };
    if degenerate {
        let r = delta / two;
        return Multipliers { plus: r, minus: r, degenerate };
    }
    let small = big.inv();
    let tie = (big.norm() - small.norm()).abs() <= T::lit(16.0) * T::epsilon() * big.norm();
    let plus = if !tie {
        if big.norm() >= small.norm() {
            big
        } else {
            small
        }
    } else {
        let im_tie = (big.im - small.im).abs() <= T::lit(16.0) * T::epsilon();
        if !im_tie {
            if big.im >= small.im {
                big
            } else {
                small
            }
        } else if big.re >= small.re {
            big
        } else {
            small
        }
    };
    let minus = if plus == big { small } else { big };
    Multipliers { plus, minus, degenerate }
}

/// Discriminant, multipliers and quasimomentum at one energy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscriminantSample<T> {
    pub energy: Cx<T>,
    pub delta: Cx<T>,
    pub rho_plus: Cx<T>,
    pub rho_minus: Cx<T>,
    /// `−i log(ρ₊) / T`, principal branch.
    pub mu: Cx<T>,
}

impl<T: Real> DiscriminantSample<T> {
    fn new(energy: Cx<T>, delta: Cx<T>, period: T) -> Self {
        let m = multipliers(delta);
        let mu = -i_unit::<T>() * m.plus.ln() / period;
        Self { energy, delta, rho_plus: m.plus, rho_minus: m.minus, mu }
    }
}

pub fn monodromy<T: Real>(u: &PeriodicPotential<T>, energy: Cx<T>) -> Result<Monodromy<T>> {
    HillPropagator::new(u).monodromy(energy).map(|m| Monodromy::from_mat(m, energy))
}

pub fn discriminant<T: Real>(u: &PeriodicPotential<T>, energy: Cx<T>) -> Result<DiscriminantSample<T>> {
    discriminant_with(&HillPropagator::new(u), energy)
}

pub fn discriminant_with<T: Real>(prop: &HillPropagator<T>, energy: Cx<T>) -> Result<DiscriminantSample<T>> {
    let m = prop.monodromy(energy)?;
    Ok(DiscriminantSample::new(energy, m.trace(), prop.potential().period()))
}

/// `dΔ/dE` at a real energy by the complex-step method.
pub fn discriminant_derivative<T: Real>(prop: &HillPropagator<T>, energy: T) -> Result<T> {
    let h = T::epsilon() * T::epsilon() * T::one().max(energy.abs());
    let d = prop.monodromy(cx(energy, h))?.trace();
    Ok(d.im / h)
}

/// Element-wise [`discriminant`], evaluated in parallel; the output order
/// matches the input and does not depend on scheduling.
pub fn scan_discriminant<T: Real>(u: &PeriodicPotential<T>, energies: &[Cx<T>]) -> Result<Vec<DiscriminantSample<T>>> {
    let prop = HillPropagator::new(u);
    scan_discriminant_with(&prop, energies)
}

pub fn scan_discriminant_with<T: Real>(
    prop: &HillPropagator<T>,
    energies: &[Cx<T>],
) -> Result<Vec<DiscriminantSample<T>>> {
    energies.par_iter().map(|&e| discriminant_with(prop, e)).collect()
}

/// `max_E |Δ(E; u_a) − Δ(E; u_b)|` over the probe energies.
pub fn discriminant_drift<T: Real>(
    u_a: &PeriodicPotential<T>,
    u_b: &PeriodicPotential<T>,
    probes: &[Cx<T>],
) -> Result<T> {
    let (ta, tb) = (u_a.period(), u_b.period());
    if (ta - tb).abs() > T::lit(1e-12) * ta.abs().max(T::one()) {
        return Err(Error::PeriodMismatch { a: ta.to_f64_lossy(), b: tb.to_f64_lossy() });
    }
    let a = scan_discriminant(u_a, probes)?;
    let b = scan_discriminant(u_b, probes)?;
    Ok(a.iter().zip(&b).fold(T::zero(), |m, (x, y)| m.max((x.delta - y.delta).norm())))
}

/// Bloch solution with multiplier `ρ` and its partner with multiplier `1/ρ`,
/// sampled on the potential's grid over one period.
#[derive(Clone, Debug, PartialEq)]
pub struct BlochPair<T> {
    pub energy: Cx<T>,
    pub rho: Cx<T>,
    pub psi: Field<T>,
    pub psi_star: Field<T>,
    /// Initial data `(ψ, ψ′)` at the grid origin, after normalization.
    init: [Cx<T>; 2],
    init_star: [Cx<T>; 2],
    level: usize,
}

fn eigenvector<T: Real>(m: &Mat2<T>, rho: Cx<T>) -> [Cx<T>; 2] {
    let a = [m.0[0][1], rho - m.0[0][0]];
    let b = [rho - m.0[1][1], m.0[1][0]];
    let na = a[0].norm_sqr() + a[1].norm_sqr();
    let nb = b[0].norm_sqr() + b[1].norm_sqr();
    let v = if na >= nb { a } else { b };
    let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / norm, v[1] / norm]
}

/// Bloch pair at energy `E` with `mean(ψψ*) = 1`.
///
/// `ψ` carries the multiplier of modulus at most one (ties broken as in
/// [`multipliers`]) and `ψ*` its inverse.
///
/// For real `E` the monodromy is real. In a gap (real multipliers) both
/// eigenvectors are taken real; in a band (`ρ₋ = conj ρ₊`) the partner is the
/// complex conjugate. Either way `ψψ*` is real.
pub fn bloch_pair<T: Real>(u: &PeriodicPotential<T>, energy: Cx<T>) -> Result<BlochPair<T>> {
    bloch_pair_with(&HillPropagator::new(u), energy)
}

pub fn bloch_pair_with<T: Real>(prop: &HillPropagator<T>, energy: Cx<T>) -> Result<BlochPair<T>> {
    let (m, level) = prop.monodromy_with_level(energy)?;
    let delta = m.trace();
    let gap = (delta * delta - re(T::lit(4.0))).norm();
    if gap < T::lit(DEGENERATE_TOL) {
        return Err(Error::DegenerateEnergy {
            energy_re: energy.re.to_f64_lossy(),
            energy_im: energy.im.to_f64_lossy(),
            gap: gap.to_f64_lossy(),
        });
    }
    let mult = multipliers(delta);
    let real_energy = energy.im == T::zero();
    let unimodular = (mult.plus.norm() - T::one()).abs() < T::lit(1e-9);
    let conjugate_band = real_energy && unimodular;
    // ψ takes the multiplier with |ρ| ≤ 1: decaying towards +∞ in a gap,
    // ρ₊ (Im ρ ≥ 0) in a band.
    let (rho, rho_inv) = if unimodular { (mult.plus, mult.minus) } else { (mult.minus, mult.plus) };
    let v = eigenvector(&m, rho);
    let w = if conjugate_band { [v[0].conj(), v[1].conj()] } else { eigenvector(&m, rho_inv) };

    let (_, phis) = prop.fundamental(energy, level);
    let grid = prop.potential().grid().clone();
    let psi: Vec<Cx<T>> = phis.iter().map(|p| p.apply(v)[0]).collect();
    let psi_star: Vec<Cx<T>> = phis.iter().map(|p| p.apply(w)[0]).collect();
    let n = T::from_count(psi.len());
    let p = psi.iter().zip(&psi_star).fold(re(T::zero()), |a, (x, y)| a + *x * *y) / n;
    let scale_ref = psi.iter().zip(&psi_star).map(|(x, y)| (*x * *y).norm()).sum::<T>() / n;
    if p.norm() <= T::lit(1e-10) * scale_ref {
        return Err(Error::VanishingBlochNorm { energy: energy.re.to_f64_lossy() });
    }
    let (sv, sw) = if conjugate_band {
        let s = re(T::one() / p.re.sqrt());
        (s, s)
    } else {
        (re(T::one()), p.inv())
    };
    let psi: Vec<Cx<T>> = psi.into_iter().map(|x| x * sv).collect();
    let psi_star: Vec<Cx<T>> = psi_star.into_iter().map(|x| x * sw).collect();
    Ok(BlochPair {
        energy,
        rho,
        psi: Field::from_values(grid.clone(), psi)?,
        psi_star: Field::from_values(grid, psi_star)?,
        init: [v[0] * sv, v[1] * sv],
        init_star: [w[0] * sw, w[1] * sw],
        level,
    })
}

impl<T: Real> BlochPair<T> {
    /// `ψψ*` on the grid; marked real when `E` is real.
    pub fn product(&self) -> Field<T> {
        let prod = self.psi.product(&self.psi_star).expect("same grid");
        if self.energy.im == T::zero() {
            prod.into_real()
        } else {
            prod
        }
    }

    /// Largest imaginary part of `ψψ*` before any realness projection.
    pub fn product_imag(&self) -> T {
        self.psi.product(&self.psi_star).expect("same grid").max_imag()
    }

    /// Re-integrates over the following period with a finer step and returns
    /// `max_j |ψ(x_j+T) − ρψ(x_j)|` and the same for `ψ*` with `1/ρ`,
    /// each scaled by `max(1, max_j |ρ^{±1} ψ(x_j)|)`.
    pub fn quasiperiodicity_residual(&self, prop: &HillPropagator<T>) -> Result<(T, T)> {
        let (m, phis) = prop.fundamental(self.energy, self.level + 1);
        let start = m.apply(self.init);
        let start_star = m.apply(self.init_star);
        let residual = |y0: [Cx<T>; 2], field: &Field<T>, rho: Cx<T>| {
            let mut worst = T::zero();
            let mut scale = T::one();
            for (phi, v) in phis.iter().zip(field.values()) {
                let next = phi.apply(y0)[0];
                worst = worst.max((next - rho * *v).norm());
                scale = scale.max((rho * *v).norm());
            }
            worst / scale
        };
        Ok((residual(start, &self.psi, self.rho), residual(start_star, &self.psi_star, self.rho.inv())))
    }

    pub fn normalization(&self) -> Cx<T> {
        mean(&self.psi.product(&self.psi_star).expect("same grid"))
    }
}

/// Writes samples as CSV with columns
/// `E_re,E_im,delta_re,delta_im,rho_plus_re,rho_plus_im,mu_re,mu_im`.
pub fn write_discriminant_csv<T: Real, W: Write>(samples: &[DiscriminantSample<T>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["E_re", "E_im", "delta_re", "delta_im", "rho_plus_re", "rho_plus_im", "mu_re", "mu_im"])?;
    for s in samples {
        let cols = [s.energy, s.delta, s.rho_plus, s.mu];
        let rec: Vec<String> = cols.iter().flat_map(|c| [c.re.to_string(), c.im.to_string()]).collect();
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
