//! Uniform periodic grids and the Fourier machinery built on them.
//!
//! Everything here is a pure function of its inputs. Spectral operators use
//! the signed wavenumber ordering `k_m = 2π m / L`, `m = 0, 1, …, n/2, −n/2+1, …, −1`;
//! the Nyquist mode `m = n/2` is treated as a cosine so that real fields stay
//! real under differentiation, interpolation and shifts.

use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cx, i_unit, re, Cx, Real};

/// Uniform periodic grid with nodes `x_j = origin + j·L/n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicGrid<T> {
    n: usize,
    length: T,
    origin: T,
}

impl<T: Real> PeriodicGrid<T> {
    pub fn new(n: usize, length: T) -> Result<Self> {
        Self::with_origin(n, length, T::zero())
    }

    pub fn with_origin(n: usize, length: T, origin: T) -> Result<Self> {
        if n < 8 {
            return Err(Error::InvalidGrid(format!("need n ≥ 8, got {n}")));
        }
        if !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("n must be even, got {n}")));
        }
        if !(length > T::zero()) || !length.is_finite() {
            return Err(Error::InvalidGrid(format!("period must be positive, got {length}")));
        }
        if !origin.is_finite() {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        Ok(Self { n, length, origin })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn origin(&self) -> T {
        self.origin
    }

    pub fn spacing(&self) -> T {
        self.length / T::from_count(self.n)
    }

    pub fn node(&self, j: usize) -> T {
        self.origin + T::from_count(j) * self.spacing()
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Signed mode index of FFT slot `j`.
    pub fn mode(&self, j: usize) -> isize {
        if j <= self.n / 2 {
            j as isize
        } else {
            j as isize - self.n as isize
        }
    }

    /// Angular wavenumber `2π m / L` of FFT slot `j`.
    pub fn wavenumber(&self, j: usize) -> T {
        T::lit(2.0) * T::PI() * T::lit(self.mode(j) as f64) / self.length
    }

    pub fn is_nyquist(&self, j: usize) -> bool {
        j == self.n / 2
    }

    /// Largest resolved wavenumber `π n / L`.
    pub fn max_wavenumber(&self) -> T {
        T::PI() * T::from_count(self.n) / self.length
    }
}

/// Complex samples of a function on a [`PeriodicGrid`].
///
/// When `real` is set every imaginary part is exactly zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Field<T> {
    grid: PeriodicGrid<T>,
    values: Vec<Cx<T>>,
    real: bool,
}

impl<T: Real> Field<T> {
    pub fn from_values(grid: PeriodicGrid<T>, values: Vec<Cx<T>>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::LengthMismatch { expected: grid.n(), got: values.len() });
        }
        Ok(Self { grid, values, real: false })
    }

    pub fn from_real(grid: PeriodicGrid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::LengthMismatch { expected: grid.n(), got: values.len() });
        }
        Ok(Self { grid, values: values.into_iter().map(re).collect(), real: true })
    }

    pub fn from_fn(grid: PeriodicGrid<T>, f: impl Fn(T) -> Cx<T>) -> Self {
        let values = grid.nodes().into_iter().map(f).collect();
        Self { grid, values, real: false }
    }

    pub fn from_fn_real(grid: PeriodicGrid<T>, f: impl Fn(T) -> T) -> Self {
        let values = grid.nodes().into_iter().map(|x| re(f(x))).collect();
        Self { grid, values, real: true }
    }

    pub fn zeros(grid: PeriodicGrid<T>) -> Self {
        let values = vec![Cx::new(T::zero(), T::zero()); grid.n()];
        Self { grid, values, real: true }
    }

    pub fn grid(&self) -> &PeriodicGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[Cx<T>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Cx<T>> {
        self.values
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn real_parts(&self) -> Vec<T> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.norm()))
    }

    pub fn max_imag(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.im.abs()))
    }

    /// Drops imaginary parts and marks the field real.
    pub fn into_real(mut self) -> Self {
        for v in &mut self.values {
            v.im = T::zero();
        }
        self.real = true;
        self
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Cx<T>, Cx<T>) -> Cx<T>) -> Result<Self> {
        if other.grid != self.grid {
            return Err(Error::InvalidArgument("fields live on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { grid: self.grid.clone(), values, real: self.real && other.real })
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn product(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scaled(&self, s: Cx<T>) -> Self {
        let real = self.real && s.im == T::zero();
        let values = self.values.iter().map(|&v| v * s).collect();
        let mut out = Self { grid: self.grid.clone(), values, real };
        if real {
            out = out.into_real();
        }
        out
    }

    pub fn map_real(&self, f: impl Fn(T) -> T) -> Self {
        let values = self.values.iter().map(|v| re(f(v.re))).collect();
        Self { grid: self.grid.clone(), values, real: true }
    }

    /// Max-norm distance to another field on the same grid.
    pub fn distance(&self, other: &Self) -> Result<T> {
        Ok(self.minus(other)?.max_abs())
    }
}

/// Cached FFT plans for one transform size.
#[derive(Clone)]
pub struct Spectral<T: Real> {
    n: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> std::fmt::Debug for Spectral<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("n", &self.n).finish()
    }
}

impl<T: Real> Spectral<T> {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { n, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Unnormalized forward transform.
    pub fn forward(&self, values: &[Cx<T>]) -> Vec<Cx<T>> {
        let mut buf = values.to_vec();
        self.forward.process(&mut buf);
        buf
    }

    /// Inverse transform including the `1/n` factor.
    pub fn inverse(&self, coeffs: &[Cx<T>]) -> Vec<Cx<T>> {
        let mut buf = coeffs.to_vec();
        self.inverse.process(&mut buf);
        let s = T::one() / T::from_count(self.n);
        for v in &mut buf {
            *v = *v * s;
        }
        buf
    }

    /// Applies a diagonal Fourier multiplier and returns physical values.
    pub fn apply_multiplier(&self, values: &[Cx<T>], mult: impl Fn(usize) -> Cx<T>) -> Vec<Cx<T>> {
        let mut hat = self.forward(values);
        for (j, h) in hat.iter_mut().enumerate() {
            *h = *h * mult(j);
        }
        self.inverse(&hat)
    }

    pub fn derivative(&self, f: &Field<T>, order: u32) -> Field<T> {
        let grid = f.grid();
        let values = self.apply_multiplier(f.values(), |j| derivative_multiplier(grid, j, order));
        let out = Field { grid: grid.clone(), values, real: false };
        if f.is_real() {
            out.into_real()
        } else {
            out
        }
    }

    /// Samples of the trigonometric interpolant at `x_j + s`.
    pub fn shifted(&self, f: &Field<T>, s: T) -> Field<T> {
        let grid = f.grid();
        let values = self.apply_multiplier(f.values(), |j| shift_multiplier(grid, j, s));
        let out = Field { grid: grid.clone(), values, real: false };
        if f.is_real() {
            out.into_real()
        } else {
            out
        }
    }

    /// Periodic antiderivative of the zero-mean part of `f`, itself with zero mean.
    pub fn antiderivative(&self, f: &Field<T>) -> Field<T> {
        let grid = f.grid();
        let values = self.apply_multiplier(f.values(), |j| {
            if j == 0 || grid.is_nyquist(j) {
                Cx::new(T::zero(), T::zero())
            } else {
                (i_unit::<T>() * grid.wavenumber(j)).inv()
            }
        });
        let out = Field { grid: grid.clone(), values, real: false };
        if f.is_real() {
            out.into_real()
        } else {
            out
        }
    }
}

/// `(i k)^order`, with the Nyquist multiplier zeroed for odd orders.
pub fn derivative_multiplier<T: Real>(grid: &PeriodicGrid<T>, j: usize, order: u32) -> Cx<T> {
    if grid.is_nyquist(j) && order % 2 == 1 {
        return Cx::new(T::zero(), T::zero());
    }
    (i_unit::<T>() * grid.wavenumber(j)).powu(order)
}

fn shift_multiplier<T: Real>(grid: &PeriodicGrid<T>, j: usize, s: T) -> Cx<T> {
    let k = grid.wavenumber(j);
    if grid.is_nyquist(j) {
        re((k * s).cos())
    } else {
        cx((k * s).cos(), (k * s).sin())
    }
}

/// `order`-th derivative via the Fourier multiplier `(2πik/L)^order`.
pub fn spectral_derivative<T: Real>(f: &Field<T>, order: u32) -> Field<T> {
    Spectral::new(f.len()).derivative(f, order)
}

/// Grid average `(1/n) Σ f_j`, equal to `(1/L)∫₀ᴸ f dx` for band-limited `f`.
pub fn mean<T: Real>(f: &Field<T>) -> Cx<T> {
    let s: Cx<T> = f.values().iter().fold(Cx::new(T::zero(), T::zero()), |a, &b| a + b);
    s / T::from_count(f.len())
}

/// Fourier coefficients of a field, ready for evaluation anywhere on the line.
#[derive(Clone, Debug)]
pub struct TrigInterpolant<T: Real> {
    grid: PeriodicGrid<T>,
    nodes: Vec<Cx<T>>,
    coeffs: Vec<Cx<T>>,
}

impl<T: Real> TrigInterpolant<T> {
    pub fn new(f: &Field<T>) -> Self {
        let spec = Spectral::new(f.len());
        let s = T::one() / T::from_count(f.len());
        let coeffs = spec.forward(f.values()).into_iter().map(|c| c * s).collect();
        Self { grid: f.grid().clone(), nodes: f.values().to_vec(), coeffs }
    }

    pub fn coefficients(&self) -> &[Cx<T>] {
        &self.coeffs
    }

    pub fn eval(&self, x: T) -> Cx<T> {
        let l = self.grid.length();
        let mut xi = (x - self.grid.origin()) % l;
        if xi < T::zero() {
            xi = xi + l;
        }
        let pos = xi / self.grid.spacing();
        if pos == pos.floor() {
            let j = pos.to_usize().unwrap_or(0) % self.grid.n();
            return self.nodes[j];
        }
        let mut acc = Cx::new(T::zero(), T::zero());
        for (j, &c) in self.coeffs.iter().enumerate() {
            acc = acc + c * shift_multiplier(&self.grid, j, xi);
        }
        acc
    }
}

/// Value of the unique trigonometric interpolant of `f` at `x` (reduced mod L).
pub fn trig_interpolate<T: Real>(f: &Field<T>, x: T) -> Cx<T> {
    TrigInterpolant::new(f).eval(x)
}

/// Fourth-order central difference
/// `(−g(x0+2h) + 8g(x0+h) − 8g(x0−h) + g(x0−2h)) / (12h)`.
pub fn central_difference<T, V, G>(g: G, x0: T, h: T) -> V
where
    T: Real,
    V: Copy + Add<Output = V> + Sub<Output = V> + Mul<T, Output = V>,
    G: Fn(T) -> V,
{
    let two = T::lit(2.0);
    let p1 = g(x0 + h);
    let m1 = g(x0 - h);
    let p2 = g(x0 + two * h);
    let m2 = g(x0 - two * h);
    ((m2 - p2) + (p1 - m1) * T::lit(8.0)) * (T::one() / (T::lit(12.0) * h))
}

/// Default finite-difference step: cube root of the working precision,
/// scaled by the argument magnitude.
pub fn default_step<T: Real>(x0: T) -> T {
    T::epsilon().cbrt() * x0.abs().max(T::one())
}

/// Residuals of a finite-difference identity check at `h` and `h/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepHalving<T> {
    pub h: T,
    pub at_h: T,
    pub at_half: T,
}

impl<T: Real> StepHalving<T> {
    pub fn run(h: T, residual: impl Fn(T) -> T) -> Self {
        Self { h, at_h: residual(h), at_half: residual(h / T::lit(2.0)) }
    }

    /// Observed order `log2(r(h) / r(h/2))`.
    pub fn observed_order(&self) -> T {
        (self.at_h / self.at_half).log2()
    }

    /// The finer residual is within `tol`; if the coarser one is not, the
    /// residual must shrink at least at third order (ratio ≥ 6 allows for
    /// a little roundoff on top of the ideal 8).
    pub fn passes(&self, tol: T) -> bool {
        self.at_half.is_finite() && self.at_half < tol && (self.at_h < tol || self.at_h / self.at_half >= T::lit(6.0))
    }

    pub fn worst(&self) -> T {
        self.at_h.max(self.at_half)
    }
}

// Gauss–Kronrod 7/15 abscissae and weights.
const GK_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const GK_WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<T: Real>(f: &impl Fn(T) -> Cx<T>, a: T, b: T) -> (Cx<T>, T) {
    let half = (b - a) / T::lit(2.0);
    let mid = (a + b) / T::lit(2.0);
    let fc = f(mid);
    let mut kron = fc * T::lit(GK_WK[7]);
    let mut gauss = fc * T::lit(GK_WG[3]);
    for i in 0..7 {
        let dx = half * T::lit(GK_X[i]);
        let s = f(mid - dx) + f(mid + dx);
        kron = kron + s * T::lit(GK_WK[i]);
        if i % 2 == 1 {
            gauss = gauss + s * T::lit(GK_WG[i / 2]);
        }
    }
    let k = kron * half;
    let g = gauss * half;
    (k, (k - g).norm())
}

/// Adaptive Gauss–Kronrod quadrature of a complex-valued integrand.
///
/// Returns the integral and an error estimate. Intervals are bisected until
/// each local estimate meets its share of `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<T: Real>(f: impl Fn(T) -> Cx<T>, a: T, b: T, abs_tol: T, rel_tol: T) -> (Cx<T>, T) {
    let (whole, err) = gk15(&f, a, b);
    let target = abs_tol.max(rel_tol * whole.norm());
    if err <= target {
        return (whole, err);
    }
    let mut stack = vec![(a, b, whole, err, 0u32)];
    let mut total = Cx::new(T::zero(), T::zero());
    let mut total_err = T::zero();
    let width = (b - a).abs();
    while let Some((lo, hi, val, e, depth)) = stack.pop() {
        let share = target * ((hi - lo).abs() / width);
        if e <= share || depth >= 40 {
            total = total + val;
            total_err = total_err + e;
            continue;
        }
        let mid = (lo + hi) / T::lit(2.0);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        stack.push((lo, mid, v1, e1, depth + 1));
        stack.push((mid, hi, v2, e2, depth + 1));
    }
    (total, total_err)
}
