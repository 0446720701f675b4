//! Reference computations that share no numerical code with the library.
//!
//! Each routine here takes a different route to a quantity the library also
//! computes: piecewise-constant transfer matrices instead of adaptive
//! propagation, dense Fourier–Hill eigenvalues instead of discriminant root
//! finding, explicit Runge–Kutta instead of closed-form trajectories, and
//! plain finite differences instead of Leibniz-rule derivatives.

use melnikov_core::ba::{BaSolution, Side, SpectralDataG0, TimePoint};
use melnikov_core::grid::TrigInterpolant;
use melnikov_core::{Complex, Potential, Result};
use nalgebra::DMatrix;

fn c(re: f64) -> Complex {
    Complex::new(re, 0.0)
}

/// `sin(z)/z` with the removable singularity filled in.
fn sinc(z: Complex) -> Complex {
    if z.norm() < 1e-4 {
        let z2 = z * z;
        c(1.0) - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

/// Hill discriminant from `slices` constant-potential steps, each sampled at
/// its midpoint: second order in the slice width.
pub struct TransferMatrix {
    period: f64,
    samples: Vec<f64>,
}

impl TransferMatrix {
    pub fn new(u: &Potential, slices: usize) -> Self {
        let interp = TrigInterpolant::new(u.field());
        let grid = u.grid();
        let h = grid.length() / slices as f64;
        let samples = (0..slices).map(|j| interp.eval(grid.origin() + (j as f64 + 0.5) * h).re).collect();
        Self { period: grid.length(), samples }
    }

    pub fn discriminant(&self, energy: f64) -> Complex {
        let h = self.period / self.samples.len() as f64;
        // Columns (y, y′) of the fundamental matrix.
        let mut m = [[c(1.0), c(0.0)], [c(0.0), c(1.0)]];
        for &u in &self.samples {
            let k = (c(energy - u)).sqrt();
            let kh = k * h;
            let (cs, sn) = (kh.cos(), sinc(kh));
            let step = [[cs, sn * h], [-(k * k) * sn * h, cs]];
            m = [
                [step[0][0] * m[0][0] + step[0][1] * m[1][0], step[0][0] * m[0][1] + step[0][1] * m[1][1]],
                [step[1][0] * m[0][0] + step[1][1] * m[1][0], step[1][0] * m[0][1] + step[1][1] * m[1][1]],
            ];
        }
        m[0][0] + m[1][1]
    }
}

/// Periodic (`shift = 0`) or antiperiodic (`shift = ½`) eigenvalues of
/// `−∂² + u` in the Fourier basis `e^{2πi(m + shift)x/T}`, `|m| ≤ modes`.
pub fn fourier_hill_eigenvalues(u: &Potential, shift: f64, modes: usize) -> Vec<f64> {
    let grid = u.grid();
    let n = grid.n();
    let base = 2.0 * std::f64::consts::PI / grid.length();
    let values = u.field().values();
    // û_j = (1/n) Σ u(x_l) e^{−i j base x_l}, by direct summation.
    let coefficient = |j: i64| -> Complex {
        if j.unsigned_abs() as usize >= n / 2 {
            return c(0.0);
        }
        values
            .iter()
            .enumerate()
            .map(|(l, v)| v * Complex::from_polar(1.0, -(j as f64) * base * grid.node(l)))
            .sum::<Complex>()
            / n as f64
    };
    let size = 2 * modes + 1;
    let index = |i: usize| i as i64 - modes as i64;
    let h = DMatrix::from_fn(size, size, |r, s| {
        let kinetic = if r == s { c(((index(r) as f64 + shift) * base).powi(2)) } else { c(0.0) };
        kinetic + coefficient(index(r) - index(s))
    });
    let mut eig: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Open gaps of the Fourier–Hill spectrum: consecutive pairs of the merged
/// periodic and antiperiodic eigenvalues, `(e₁, e₂), (e₃, e₄), …`, wider
/// than `min_width`.
pub fn fourier_hill_gaps(u: &Potential, modes: usize, count: usize, min_width: f64) -> Vec<(f64, f64)> {
    let mut all = fourier_hill_eigenvalues(u, 0.0, modes);
    all.extend(fourier_hill_eigenvalues(u, 0.5, modes));
    all.sort_by(f64::total_cmp);
    all.iter()
        .skip(1)
        .step_by(2)
        .zip(all.iter().skip(2).step_by(2))
        .take(count)
        .filter(|(a, b)| *b - *a > min_width)
        .map(|(&a, &b)| (a, b))
        .collect()
}

/// One classical Runge–Kutta step of `ẏ = f(y)`.
pub fn rk4_step(f: impl Fn(f64) -> f64, y: f64, dt: f64) -> f64 {
    let k1 = f(y);
    let k2 = f(y + 0.5 * dt * k1);
    let k3 = f(y + 0.5 * dt * k2);
    let k4 = f(y + dt * k3);
    y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

pub fn rk4(f: impl Fn(f64) -> f64, y0: f64, t: f64, steps: usize) -> f64 {
    let dt = t / steps as f64;
    (0..steps).fold(y0, |y, _| rk4_step(&f, y, dt))
}

/// First time `y` crosses zero under `ẏ = f(y)`: march with `dt` until the
/// sign flips, then bisect the length of a single step from the last state.
pub fn rk4_zero_crossing(f: impl Fn(f64) -> f64, y0: f64, dt: f64, t_max: f64) -> Option<f64> {
    let (mut t, mut y) = (0.0, y0);
    while t < t_max {
        let next = rk4_step(&f, y, dt);
        if next.signum() != y.signum() {
            let (mut lo, mut hi) = (0.0, dt);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if rk4_step(&f, y, mid).signum() == y.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some(t + 0.5 * (lo + hi));
        }
        t += dt;
        y = next;
    }
    None
}

/// `res_{λ=∞} λ³ψ(λ)ψ(−λ)dλ` for the one-soliton from its Laurent
/// expansion: the product is
/// `1 + χ/(λ+κ) − χ/(λ−κ) − χ²/(λ²−κ²)`, whose `λ⁻⁴` coefficient is
/// `−2κ³χ − κ²χ²`.
pub fn one_soliton_residue(kappa: f64, chi: f64) -> f64 {
    kappa * kappa * (2.0 * kappa * chi + chi * chi)
}

/// `|φ_y − φ_xx − 2λφ_x + uφ|` for the reduced function, with every
/// derivative a fourth-order central difference of plain evaluations.
pub fn kp_residual_by_differences(
    data: &SpectralDataG0<f64>,
    tp: &TimePoint<f64>,
    lambda: Complex,
    h: f64,
) -> Result<f64> {
    let phi = |dx: f64, dy: f64| -> Result<Complex> {
        let shifted = tp.with_time(1, tp.time(1) + dx).with_time(2, tp.time(2) + dy);
        BaSolution::new(data, &shifted)?.reduced(Side::Function, lambda, &[])
    };
    let d1 = |g: &dyn Fn(f64) -> Result<Complex>| -> Result<Complex> {
        Ok((g(-2.0 * h)? - g(2.0 * h)? + (g(h)? - g(-h)?) * 8.0) / (12.0 * h))
    };
    let d2 = |g: &dyn Fn(f64) -> Result<Complex>| -> Result<Complex> {
        Ok((-g(-2.0 * h)? - g(2.0 * h)? + (g(h)? + g(-h)?) * 16.0 - g(0.0)? * 30.0) / (12.0 * h * h))
    };
    let phi_x = d1(&|s| phi(s, 0.0))?;
    let phi_xx = d2(&|s| phi(s, 0.0))?;
    let phi_y = d1(&|s| phi(0.0, s))?;
    let u = BaSolution::new(data, tp)?.potential();
    Ok((phi_y - phi_xx - lambda * phi_x * 2.0 + u * phi(0.0, 0.0)?).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use melnikov_core::Grid;

    #[test]
    fn transfer_matrix_is_exact_for_zero_potential() {
        let u = Potential::zero(Grid::new(16, 2.0 * std::f64::consts::PI).unwrap());
        let tm = TransferMatrix::new(&u, 1000);
        for e in [-1.0, 0.3, 2.0] {
            let exact = 2.0 * (2.0 * std::f64::consts::PI * c(e).sqrt()).cos();
            assert!((tm.discriminant(e) - exact).norm() < 1e-9 * exact.norm().max(1.0));
        }
    }

    #[test]
    fn fourier_hill_recovers_free_spectrum() {
        let u = Potential::zero(Grid::new(16, 2.0 * std::f64::consts::PI).unwrap());
        let periodic = fourier_hill_eigenvalues(&u, 0.0, 4);
        assert_eq!(periodic[..3], [0.0, 1.0, 1.0]);
        let anti = fourier_hill_eigenvalues(&u, 0.5, 4);
        assert!((anti[0] - 0.25).abs() < 1e-14 && (anti[1] - 0.25).abs() < 1e-14);
        assert!(fourier_hill_gaps(&u, 4, 4, 1e-9).is_empty());
    }

    #[test]
    fn rk4_crossing_of_linear_decay() {
        let t = rk4_zero_crossing(|y| y - 1.0, 0.5, 1e-3, 5.0).unwrap();
        assert!((t - 2f64.ln()).abs() < 1e-12);
    }
}
