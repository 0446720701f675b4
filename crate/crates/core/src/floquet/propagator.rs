//! Transfer matrices of `−ψ″ + u ψ = E ψ` across one period.
//!
//! The first-order system `y′ = A(x) y`, `y = (ψ, ψ′)`, `A = [[0, 1], [u − E, 0]]`
//! is advanced with the sixth-order three-point Magnus integrator on substeps
//! aligned with the grid cells. Every step is the exponential of a traceless
//! matrix, so the propagator has determinant one up to roundoff, and the
//! scheme is exact when `u` is constant. The number of substeps per cell is
//! doubled until two successive refinements agree to the requested tolerance.

use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::grid::Spectral;
use crate::scalar::{csqrt, re, Cx, Real};

use super::PeriodicPotential;

/// 2×2 complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2<T>(pub [[Cx<T>; 2]; 2]);

impl<T: Real> Mat2<T> {
    pub fn identity() -> Self {
        let o = Cx::new(T::one(), T::zero());
        let z = Cx::new(T::zero(), T::zero());
        Mat2([[o, z], [z, o]])
    }

    pub fn mul(&self, b: &Self) -> Self {
        let a = &self.0;
        let b = &b.0;
        Mat2([
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ])
    }

    pub fn apply(&self, v: [Cx<T>; 2]) -> [Cx<T>; 2] {
        let a = &self.0;
        [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
    }

    fn add(&self, b: &Self) -> Self {
        let mut out = *self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] = out.0[i][j] + b.0[i][j];
            }
        }
        out
    }

    fn scale(&self, s: T) -> Self {
        let mut out = *self;
        for row in &mut out.0 {
            for v in row {
                *v = *v * s;
            }
        }
        out
    }

    fn commutator(&self, b: &Self) -> Self {
        self.mul(b).add(&b.mul(self).scale(-T::one()))
    }

    pub fn det(&self) -> Cx<T> {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn trace(&self) -> Cx<T> {
        self.0[0][0] + self.0[1][1]
    }

    pub fn max_abs(&self) -> T {
        self.0.iter().flatten().fold(T::zero(), |m, v| m.max(v.norm()))
    }

    pub fn distance(&self, b: &Self) -> T {
        self.add(&b.scale(-T::one())).max_abs()
    }

    /// `exp` of a matrix via its traceless part: for `Ω = τI + W`,
    /// `exp Ω = e^τ (cosh s · I + sinh(s)/s · W)` with `s² = −det W`.
    fn exp(&self) -> Self {
        let two = T::lit(2.0);
        let tau = self.trace() / two;
        let w00 = self.0[0][0] - tau;
        let s2 = w00 * w00 + self.0[0][1] * self.0[1][0];
        let (ch, shc) = if s2.norm() < T::lit(1e-6) {
            // cosh and sinh(s)/s as series in s²
            let s4 = s2 * s2;
            (
                re::<T>(T::one()) + s2 / two + s4 / T::lit(24.0) + s4 * s2 / T::lit(720.0),
                re::<T>(T::one()) + s2 / T::lit(6.0) + s4 / T::lit(120.0) + s4 * s2 / T::lit(5040.0),
            )
        } else {
            let s = csqrt(s2);
            (s.cosh(), s.sinh() / s)
        };
        let g = tau.exp();
        Mat2([[g * (ch + shc * w00), g * shc * self.0[0][1]], [g * shc * self.0[1][0], g * (ch - shc * w00)]])
    }
}

/// Offsets of the three Gauss–Legendre nodes within a unit step.
fn gauss_offsets<T: Real>() -> [T; 3] {
    let d = T::lit(15.0).sqrt() / T::lit(10.0);
    let h = T::lit(0.5);
    [h - d, h, h + d]
}

fn generator<T: Real>(u: T, energy: Cx<T>) -> Mat2<T> {
    let z = Cx::new(T::zero(), T::zero());
    Mat2([[z, Cx::new(T::one(), T::zero())], [re::<T>(u) - energy, z]])
}

/// One sixth-order Magnus step of length `h` with potential samples at the
/// three Gauss nodes.
fn magnus_step<T: Real>(u: &[T; 3], energy: Cx<T>, h: T) -> Mat2<T> {
    let a1 = generator(u[0], energy);
    let a2 = generator(u[1], energy);
    let a3 = generator(u[2], energy);
    let s15 = T::lit(15.0).sqrt();
    let alpha1 = a2.scale(h);
    let alpha2 = a3.add(&a1.scale(-T::one())).scale(s15 * h / T::lit(3.0));
    let alpha3 = a3.add(&a2.scale(-T::lit(2.0))).add(&a1).scale(T::lit(10.0) * h / T::lit(3.0));
    let c1 = alpha1.commutator(&alpha2);
    let c2 = alpha1.commutator(&alpha3.scale(T::lit(2.0)).add(&c1)).scale(-T::one() / T::lit(60.0));
    let left = alpha1.scale(-T::lit(20.0)).add(&alpha3.scale(-T::one())).add(&c1);
    let right = alpha2.add(&c2);
    let omega = alpha1
        .add(&alpha3.scale(T::one() / T::lit(12.0)))
        .add(&left.commutator(&right).scale(T::one() / T::lit(240.0)));
    omega.exp()
}

const MAX_LEVELS: usize = 18;

/// Reusable propagator for one periodic potential.
///
/// Potential samples at the Magnus nodes are computed once per refinement
/// level (by Fourier shifts, exact for the trigonometric interpolant) and
/// shared by all energies.
#[derive(Debug)]
pub struct HillPropagator<T: Real> {
    potential: PeriodicPotential<T>,
    spectral: Spectral<T>,
    tol: T,
    u_max: T,
    tables: Vec<OnceLock<Arc<Vec<[T; 3]>>>>,
}

impl<T: Real> HillPropagator<T> {
    pub fn new(potential: &PeriodicPotential<T>) -> Self {
        Self::with_tolerance(potential, T::lit(1e-11))
    }

    /// `tol` bounds the max-norm change of the monodromy between successive
    /// refinements, relative to `max(1, ‖M‖)`.
    pub fn with_tolerance(potential: &PeriodicPotential<T>, tol: T) -> Self {
        let n = potential.field().len();
        let u_max = potential.field().max_abs();
        Self {
            potential: potential.clone(),
            spectral: Spectral::new(n),
            tol,
            u_max,
            tables: (0..MAX_LEVELS).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn potential(&self) -> &PeriodicPotential<T> {
        &self.potential
    }

    fn table(&self, level: usize) -> Arc<Vec<[T; 3]>> {
        self.tables[level]
            .get_or_init(|| {
                let m = 1usize << level;
                let field = self.potential.field();
                let n = field.len();
                let h = field.grid().spacing() / T::from_count(m);
                let offsets = gauss_offsets::<T>();
                let mut table = vec![[T::zero(); 3]; n * m];
                for s in 0..m {
                    for (g, off) in offsets.iter().enumerate() {
                        let shift = (T::from_count(s) + *off) * h;
                        let shifted = self.spectral.shifted(field, shift);
                        for (j, v) in shifted.values().iter().enumerate() {
                            table[j * m + s][g] = v.re;
                        }
                    }
                }
                Arc::new(table)
            })
            .clone()
    }

    fn initial_level(&self, energy: Cx<T>) -> usize {
        let h = self.potential.field().grid().spacing();
        let omega = (energy.norm() + self.u_max).sqrt();
        let needed = (h * omega / T::lit(0.25)).ceil().to_usize().unwrap_or(1).max(1);
        needed.next_power_of_two().trailing_zeros() as usize
    }

    /// Propagates over one period at refinement `level`, optionally keeping
    /// the fundamental matrix at every grid node (`Φ(x_0) = I`).
    fn sweep(&self, energy: Cx<T>, level: usize, record: bool) -> (Mat2<T>, Vec<Mat2<T>>) {
        let table = self.table(level);
        let m = 1usize << level;
        let n = self.potential.field().len();
        let h = self.potential.field().grid().spacing() / T::from_count(m);
        let mut phi = Mat2::identity();
        let mut nodes = Vec::with_capacity(if record { n } else { 0 });
        for j in 0..n {
            if record {
                nodes.push(phi);
            }
            for s in 0..m {
                phi = magnus_step(&table[j * m + s], energy, h).mul(&phi);
            }
        }
        (phi, nodes)
    }

    /// Monodromy and the refinement level at which it converged.
    pub fn monodromy_with_level(&self, energy: Cx<T>) -> Result<(Mat2<T>, usize)> {
        let mut level = self.initial_level(energy);
        if level + 1 >= MAX_LEVELS {
            return Err(self.underflow(energy));
        }
        let (mut coarse, _) = self.sweep(energy, level, false);
        loop {
            let (fine, _) = self.sweep(energy, level + 1, false);
            let scale = T::one().max(fine.max_abs());
            let change = coarse.distance(&fine);
            if !change.is_finite() {
                return Err(self.underflow(energy));
            }
            // Accumulated roundoff grows with the step count; no refinement beats it.
            let steps = T::from_count(self.potential.field().len() << (level + 1));
            let floor = T::epsilon() * scale * steps;
            if change <= (self.tol * scale).max(floor) {
                return Ok((fine, level + 1));
            }
            level += 1;
            if level + 1 >= MAX_LEVELS {
                return Err(self.underflow(energy));
            }
            coarse = fine;
        }
    }

    pub fn monodromy(&self, energy: Cx<T>) -> Result<Mat2<T>> {
        self.monodromy_with_level(energy).map(|(m, _)| m)
    }

    /// Fundamental matrices at the grid nodes plus the monodromy.
    pub fn fundamental(&self, energy: Cx<T>, level: usize) -> (Mat2<T>, Vec<Mat2<T>>) {
        self.sweep(energy, level.min(MAX_LEVELS - 1), true)
    }

    fn underflow(&self, energy: Cx<T>) -> Error {
        Error::StepUnderflow {
            energy_re: energy.re.to_f64_lossy(),
            energy_im: energy.im.to_f64_lossy(),
            x: self.potential.period().to_f64_lossy(),
        }
    }
}

#[cfg(test)]
pub(crate) fn free_monodromy<T: Real>(energy: Cx<T>, period: T) -> Mat2<T> {
    let k = energy.sqrt();
    let kt = k * period;
    let (c, s) = (kt.cos(), kt.sin());
    let sk = if k.norm() == T::zero() { re(period) } else { s / k };
    Mat2([[c, sk], [-(k * s), c]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Field, PeriodicGrid};
    use crate::scalar::cx;
    use std::f64::consts::PI;

    fn mathieu(n: usize) -> PeriodicPotential<f64> {
        let grid = PeriodicGrid::new(n, 2.0 * PI).unwrap();
        PeriodicPotential::new(Field::from_fn_real(grid, |x| 2.0 * x.cos())).unwrap()
    }

    #[test]
    fn magnus_step_is_sixth_order() {
        // Error of a fixed-level sweep against a much finer one.
        let prop = HillPropagator::new(&mathieu(16));
        let e = cx(0.3, 0.0);
        let (reference, _) = prop.sweep(e, 8, false);
        let err = |level| prop.sweep(e, level, false).0.distance(&reference);
        let ratio = err(1) / err(2);
        assert!(ratio > 40.0, "ratio {ratio}");
    }

    #[test]
    fn exact_for_constant_potential() {
        let grid = PeriodicGrid::new(8, 2.0 * PI).unwrap();
        let pot = PeriodicPotential::new(Field::from_fn_real(grid, |_| 0.0)).unwrap();
        let prop = HillPropagator::new(&pot);
        for e in [cx(2.25, 0.0), cx(-1.5, 0.0), cx(0.7, 0.4)] {
            let m = prop.monodromy(e).unwrap();
            let exact = free_monodromy(e, 2.0 * PI);
            assert!(m.distance(&exact) < 1e-12 * exact.max_abs().max(1.0));
        }
    }

    #[test]
    fn unimodular() {
        let prop = HillPropagator::new(&mathieu(32));
        for e in [cx(-3.0, 0.0), cx(1.2, 2.0), cx(7.5, -1.0)] {
            let m = prop.monodromy(e).unwrap();
            // the determinant of a matrix with entries of size ‖M‖ carries roundoff of order ε‖M‖²
            assert!((m.det() - 1.0).norm() < 1e-12 * m.max_abs().powi(2).max(1.0));
        }
    }
}
