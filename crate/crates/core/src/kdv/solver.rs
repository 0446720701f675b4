//! Pseudo-spectral time stepping in Fourier space.
//!
//! The state is the coefficient vector `û`; the dispersive term is diagonal
//! (`L_k = d·(ik)³`) and treated exactly by an integrating factor or by
//! exponential time differencing. The zero mode of every right-hand side is
//! identically zero, so `û₀` never changes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::{bloch_pair, find_band_edges_with, BandEdgeOptions, PeriodicPotential};
use crate::grid::{derivative_multiplier, Field, PeriodicGrid, Spectral};
use crate::scalar::{cx, re, Cx, Real};
use crate::soliton::{FlowKind, FlowSetting, SolitonState};

use super::KdvCoefficients;

/// `‖u‖∞` beyond which a run is aborted.
pub const BLOW_UP: f64 = 1e6;
/// Minimum distance of a source energy from every band edge.
pub const MIN_EDGE_DISTANCE: f64 = 1e-3;
/// Largest tolerated `|Im u|`.
pub const MAX_IMAG: f64 = 1e-10;
/// Advective stability bound on `dt·n·max|u|·k_max`.
pub const ADVECTIVE_LIMIT: f64 = 2.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceEntry<T> {
    pub energy: T,
    pub coupling: T,
}

/// Bloch-pair sources `2∂ₓ Σ g_k ψ_kψ*_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec<T> {
    pub entries: Vec<SourceEntry<T>>,
    /// Steps between recomputations of the Bloch pairs.
    #[serde(default = "one")]
    pub refresh_every: usize,
    #[serde(default)]
    pub refresh_at: RefreshPoint,
}

/// State at which the frozen Bloch pairs of a step are computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefreshPoint {
    /// `u(t_n)`: the frozen source lags by half a step, first order in `dt`.
    StepStart,
    /// A predicted `u(t_n + dt/2)`: second order in `dt`.
    #[default]
    Midpoint,
}

fn one() -> usize {
    1
}

impl<T: Real> SourceSpec<T> {
    pub fn none() -> Self {
        Self { entries: Vec::new(), refresh_every: 1, refresh_at: RefreshPoint::Midpoint }
    }

    pub fn single(energy: T, coupling: T) -> Self {
        Self { entries: vec![SourceEntry { energy, coupling }], refresh_every: 1, refresh_at: RefreshPoint::Midpoint }
    }

    fn is_active(&self) -> bool {
        self.entries.iter().any(|e| e.coupling != T::zero())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    IfRk4,
    Etdrk4,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig<T> {
    pub grid: PeriodicGrid<T>,
    /// Nominal step; shortened so that a whole number of steps reaches `t_end`.
    pub dt: T,
    pub t_end: T,
    pub integrator: Integrator,
    pub dealias: bool,
    pub snapshot_every: usize,
    pub coefficients: KdvCoefficients<T>,
}

impl<T: Real> SolverConfig<T> {
    pub fn new(grid: PeriodicGrid<T>, dt: T, t_end: T) -> Self {
        Self {
            grid,
            dt,
            t_end,
            integrator: Integrator::IfRk4,
            dealias: true,
            snapshot_every: 1,
            coefficients: KdvCoefficients::standard(),
        }
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt - T::lit(1e-9)).ceil().to_usize().unwrap_or(0).max(1)
    }

    pub fn step_size(&self) -> T {
        self.t_end / T::from_count(self.steps())
    }

    fn validate(&self) -> Result<()> {
        let n = self.grid.n();
        if !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("solver grids need a power-of-two size, got {n}")));
        }
        if !(self.dt > T::zero() && self.t_end > T::zero()) || !self.t_end.is_finite() {
            return Err(Error::InvalidArgument("dt and t_end must be positive".into()));
        }
        if self.snapshot_every == 0 {
            return Err(Error::InvalidArgument("snapshot_every must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot<T> {
    pub t: T,
    pub u: Field<T>,
}

/// Conserved quantities at one snapshot.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantSample<T> {
    pub t: T,
    pub mean: T,
    /// `∫u² dx` over one period.
    pub l2: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport<T> {
    pub snapshots: Vec<Snapshot<T>>,
    pub invariants: Vec<InvariantSample<T>>,
    pub steps: usize,
    pub dt: T,
    /// Largest `|Im u|` seen after any step.
    pub max_imag: T,
    /// `max |u − u_exact|` over snapshots, for closed-form driven runs.
    pub exact_error: Option<T>,
}

impl<T: Real> RunReport<T> {
    pub fn initial(&self) -> &Field<T> {
        &self.snapshots[0].u
    }

    pub fn last(&self) -> &Field<T> {
        &self.snapshots.last().expect("at least the initial snapshot").u
    }

    pub fn mean_drift(&self) -> T {
        let m0 = self.invariants[0].mean;
        self.invariants.iter().fold(T::zero(), |d, s| d.max((s.mean - m0).abs()))
    }

    pub fn l2_drift(&self) -> T {
        let q0 = self.invariants[0].l2;
        self.invariants.iter().fold(T::zero(), |d, s| d.max((s.l2 - q0).abs()))
    }

    /// `‖u(t_end) − u(0)‖∞`.
    pub fn displacement(&self) -> T {
        self.last().distance(self.initial()).expect("same grid")
    }
}

/// `S = 2∂ₓ Σ g_k ψ_kψ*_k` with `mean(ψ_kψ*_k) = 1` and a real product.
pub fn source_term<T: Real>(u: &PeriodicPotential<T>, spec: &SourceSpec<T>) -> Result<Field<T>> {
    let grid = u.grid().clone();
    let n = grid.n();
    let products: Vec<Field<T>> = spec
        .entries
        .par_iter()
        .filter(|e| e.coupling != T::zero())
        .map(|e| Ok(bloch_pair(u, re(e.energy))?.product().scaled(re(e.coupling))))
        .collect::<Result<_>>()?;
    let mut sum = vec![re(T::zero()); n];
    for p in &products {
        for (s, v) in sum.iter_mut().zip(p.values()) {
            *s = *s + re(v.re);
        }
    }
    let spectral = Spectral::new(n);
    let s = Field::from_values(grid, sum)?.into_real();
    Ok(spectral.derivative(&s, 1).scaled(re(T::lit(2.0))).into_real())
}

/// `¼u_xxx − (3/4)(u²)_x + S`.
pub fn rhs<T: Real>(u: &PeriodicPotential<T>, spec: &SourceSpec<T>) -> Result<Field<T>> {
    rhs_with(u, spec, &KdvCoefficients::standard(), false)
}

pub fn rhs_with<T: Real>(
    u: &PeriodicPotential<T>,
    spec: &SourceSpec<T>,
    coeffs: &KdvCoefficients<T>,
    dealias: bool,
) -> Result<Field<T>> {
    let grid = u.grid().clone();
    let ops = Operators::new(&grid, coeffs, dealias, T::lit(1e-3));
    let hat = ops.spectral.forward(u.field().values());
    let mut out = ops.nonlinear(&hat);
    if spec.is_active() {
        let s = ops.spectral.forward(source_term(u, spec)?.values());
        for (o, (v, m)) in out.iter_mut().zip(s.iter().zip(&ops.mask)) {
            *o = *o + *v * *m;
        }
    }
    for ((o, v), l) in out.iter_mut().zip(&hat).zip(&ops.linear) {
        *o = *o + *v * *l;
    }
    Ok(Field::from_values(grid, ops.spectral.inverse(&out))?.into_real())
}

/// Fourier-space operators for one grid and step size.
struct Operators<T: Real> {
    grid: PeriodicGrid<T>,
    spectral: Spectral<T>,
    /// `d·(ik)³`.
    linear: Vec<Cx<T>>,
    /// `−(n/2)·ik`, zero at Nyquist.
    advect: Vec<Cx<T>>,
    mask: Vec<T>,
    e: Vec<Cx<T>>,
    e2: Vec<Cx<T>>,
    etd: Option<EtdCoefficients<T>>,
}

struct EtdCoefficients<T> {
    q: Vec<Cx<T>>,
    f1: Vec<Cx<T>>,
    f2: Vec<Cx<T>>,
    f3: Vec<Cx<T>>,
}

impl<T: Real> EtdCoefficients<T> {
    /// Contour averages of the ETDRK4 φ-functions, stable for small `hL`.
    fn new(linear: &[Cx<T>], h: T) -> Self {
        const NODES: usize = 32;
        let roots: Vec<Cx<T>> = (0..NODES)
            .map(|j| {
                let a = T::PI() * (T::from_count(j) + T::lit(0.5)) / T::from_count(NODES) * T::lit(2.0);
                cx(a.cos(), a.sin())
            })
            .collect();
        let avg = |l: Cx<T>, f: &dyn Fn(Cx<T>) -> Cx<T>| {
            roots.iter().fold(re(T::zero()), |s, r| s + f(l * h + *r)) / T::from_count(NODES) * h
        };
        let four = T::lit(4.0);
        let mut q = Vec::with_capacity(linear.len());
        let (mut f1, mut f2, mut f3) = (Vec::new(), Vec::new(), Vec::new());
        for &l in linear {
            q.push(avg(l, &|z| ((z / T::lit(2.0)).exp() - T::one()) / z));
            f1.push(avg(l, &|z| (-z - four + z.exp() * (z * z - z * T::lit(3.0) + four)) / (z * z * z)));
            f2.push(avg(l, &|z| (z + T::lit(2.0) + z.exp() * (z - T::lit(2.0))) / (z * z * z)));
            f3.push(avg(l, &|z| (-z * z - z * T::lit(3.0) - four + z.exp() * (re(four) - z)) / (z * z * z)));
        }
        Self { q, f1, f2, f3 }
    }
}

impl<T: Real> Operators<T> {
    fn new(grid: &PeriodicGrid<T>, coeffs: &KdvCoefficients<T>, dealias: bool, h: T) -> Self {
        let n = grid.n();
        let linear: Vec<Cx<T>> = (0..n).map(|j| derivative_multiplier(grid, j, 3) * coeffs.dispersion).collect();
        let advect: Vec<Cx<T>> =
            (0..n).map(|j| -derivative_multiplier(grid, j, 1) * (coeffs.nonlinear / T::lit(2.0))).collect();
        let cutoff = n / 3;
        let mask = (0..n)
            .map(|j| if !dealias || grid.mode(j).unsigned_abs() <= cutoff { T::one() } else { T::zero() })
            .collect();
        let e = linear.iter().map(|l| (*l * h).exp()).collect();
        let e2 = linear.iter().map(|l| (*l * (h / T::lit(2.0))).exp()).collect();
        Self { grid: grid.clone(), spectral: Spectral::new(n), linear, advect, mask, e, e2, etd: None }
    }

    fn with_etd(mut self, h: T) -> Self {
        self.etd = Some(EtdCoefficients::new(&self.linear, h));
        self
    }

    fn physical(&self, hat: &[Cx<T>]) -> (Vec<T>, T) {
        let values = self.spectral.inverse(hat);
        let imag = values.iter().fold(T::zero(), |m, v| m.max(v.im.abs()));
        (values.into_iter().map(|v| v.re).collect(), imag)
    }

    /// `−(n/2)(u²)_x`, masked.
    fn nonlinear(&self, hat: &[Cx<T>]) -> Vec<Cx<T>> {
        let (u, _) = self.physical(hat);
        let sq: Vec<Cx<T>> = u.iter().map(|v| re(*v * *v)).collect();
        let mut out = self.spectral.forward(&sq);
        for ((o, a), m) in out.iter_mut().zip(&self.advect).zip(&self.mask) {
            *o = *o * *a * *m;
        }
        out
    }
}

/// How the source enters the right-hand side.
enum Forcing<'a, T: Real> {
    None,
    /// Bloch pairs of the current state, frozen within a step.
    Bloch {
        spec: &'a SourceSpec<T>,
        cached: Vec<Cx<T>>,
    },
    /// `2∂ₓψ²(κ, x, c(t))` from the closed-form one-soliton.
    Prescribed {
        setting: FlowSetting<T>,
    },
}

impl<T: Real> Forcing<'_, T> {
    fn refresh(&mut self, ops: &Operators<T>, hat: &[Cx<T>], step: usize, h: T) -> Result<()> {
        let Forcing::Bloch { spec, cached } = self else {
            return Ok(());
        };
        if !step.is_multiple_of(spec.refresh_every.max(1)) {
            return Ok(());
        }
        if cached.is_empty() {
            *cached = bloch_source_hat(ops, hat, spec)?;
        }
        match spec.refresh_at {
            RefreshPoint::StepStart => *cached = bloch_source_hat(ops, hat, spec)?,
            RefreshPoint::Midpoint => {
                // Integrating-factor Euler half step with the previous source,
                // accurate to O(dt²) at the midpoint.
                let half = h / T::lit(2.0);
                let n = ops.nonlinear(hat);
                let predicted: Vec<Cx<T>> =
                    (0..hat.len()).map(|j| ops.e2[j] * (hat[j] + (n[j] + cached[j]) * half)).collect();
                *cached = bloch_source_hat(ops, &predicted, spec)?;
            }
        }
        Ok(())
    }

    fn at(&self, ops: &Operators<T>, t: T) -> Result<Option<Vec<Cx<T>>>> {
        match self {
            Forcing::None => Ok(None),
            Forcing::Bloch { cached, .. } => Ok(Some(cached.clone())),
            Forcing::Prescribed { setting } => {
                let state = setting.state_at(t);
                let values = ops
                    .grid
                    .nodes()
                    .into_iter()
                    .map(|x| Ok(re(T::lit(2.0) * state.psi_sq_x(x)?)))
                    .collect::<Result<Vec<_>>>()?;
                let mut hat = ops.spectral.forward(&values);
                for (h, m) in hat.iter_mut().zip(&ops.mask) {
                    *h = *h * *m;
                }
                Ok(Some(hat))
            }
        }
    }
}

fn bloch_source_hat<T: Real>(ops: &Operators<T>, hat: &[Cx<T>], spec: &SourceSpec<T>) -> Result<Vec<Cx<T>>> {
    let (u, _) = ops.physical(hat);
    let potential = PeriodicPotential::new(Field::from_real(ops.grid.clone(), u)?)?;
    check_edge_distance(&potential, spec)?;
    let s = source_term(&potential, spec)?;
    let mut out = ops.spectral.forward(s.values());
    for (c, m) in out.iter_mut().zip(&ops.mask) {
        *c = *c * *m;
    }
    Ok(out)
}

fn check_edge_distance<T: Real>(u: &PeriodicPotential<T>, spec: &SourceSpec<T>) -> Result<()> {
    let d = T::lit(MIN_EDGE_DISTANCE);
    let opts = BandEdgeOptions { samples: 9, refine_tol: T::lit(1e-12), ..BandEdgeOptions::default() };
    for entry in spec.entries.iter().filter(|e| e.coupling != T::zero()) {
        let report = find_band_edges_with(u, entry.energy - d, entry.energy + d, &opts)?;
        let distance = report.distance_to_edges(entry.energy);
        if distance < d {
            return Err(Error::SourceNearBandEdge {
                energy: entry.energy.to_f64_lossy(),
                distance: distance.to_f64_lossy(),
                min: MIN_EDGE_DISTANCE,
            });
        }
    }
    Ok(())
}

/// Full right-hand side `N(û, t)` without the linear part.
fn full_nonlinear<T: Real>(ops: &Operators<T>, forcing: &Forcing<'_, T>, hat: &[Cx<T>], t: T) -> Result<Vec<Cx<T>>> {
    let mut out = ops.nonlinear(hat);
    if let Some(s) = forcing.at(ops, t)? {
        for (o, v) in out.iter_mut().zip(s) {
            *o = *o + v;
        }
    }
    Ok(out)
}

/// Coefficient vector paired with a state vector.
type Term<'a, T> = (&'a [Cx<T>], &'a [Cx<T>]);

fn axpy<T: Real>(terms: &[Term<'_, T>]) -> Vec<Cx<T>> {
    let n = terms[0].0.len();
    (0..n).map(|j| terms.iter().fold(re(T::zero()), |s, (a, b)| s + a[j] * b[j])).collect()
}

fn scale<T: Real>(v: &[Cx<T>], s: T) -> Vec<Cx<T>> {
    v.iter().map(|x| *x * s).collect()
}

fn step<T: Real>(
    integrator: Integrator,
    ops: &Operators<T>,
    forcing: &Forcing<'_, T>,
    v: &[Cx<T>],
    t: T,
    h: T,
) -> Result<Vec<Cx<T>>> {
    let half = h / T::lit(2.0);
    let (e, e2) = (&ops.e[..], &ops.e2[..]);
    match integrator {
        Integrator::IfRk4 => {
            let k1 = full_nonlinear(ops, forcing, v, t)?;
            let a: Vec<_> = (0..v.len()).map(|j| e2[j] * (v[j] + k1[j] * half)).collect();
            let k2 = full_nonlinear(ops, forcing, &a, t + half)?;
            let b: Vec<_> = (0..v.len()).map(|j| e2[j] * v[j] + k2[j] * half).collect();
            let k3 = full_nonlinear(ops, forcing, &b, t + half)?;
            let c: Vec<_> = (0..v.len()).map(|j| e[j] * v[j] + e2[j] * k3[j] * h).collect();
            let k4 = full_nonlinear(ops, forcing, &c, t + h)?;
            let sixth = h / T::lit(6.0);
            Ok((0..v.len())
                .map(|j| e[j] * v[j] + (e[j] * k1[j] + e2[j] * (k2[j] + k3[j]) * T::lit(2.0) + k4[j]) * sixth)
                .collect())
        }
        Integrator::Etdrk4 => {
            let etd = ops.etd.as_ref().expect("ETD coefficients built for ETDRK4 runs");
            let nv = full_nonlinear(ops, forcing, v, t)?;
            let a = axpy(&[(e2, v), (&etd.q, &nv)]);
            let na = full_nonlinear(ops, forcing, &a, t + half)?;
            let b = axpy(&[(e2, v), (&etd.q, &na)]);
            let nb = full_nonlinear(ops, forcing, &b, t + half)?;
            let twice_nb_minus_nv: Vec<_> = nb.iter().zip(&nv).map(|(x, y)| *x * T::lit(2.0) - *y).collect();
            let c = axpy(&[(e2, &a), (&etd.q, &twice_nb_minus_nv)]);
            let nc = full_nonlinear(ops, forcing, &c, t + h)?;
            let mid: Vec<_> = na.iter().zip(&nb).map(|(x, y)| *x + *y).collect();
            let mid = scale(&mid, T::lit(2.0));
            Ok(axpy(&[(e, v), (&etd.f1, &nv), (&etd.f2, &mid), (&etd.f3, &nc)]))
        }
    }
}

fn invariants<T: Real>(grid: &PeriodicGrid<T>, t: T, u: &[T]) -> InvariantSample<T> {
    let n = T::from_count(u.len());
    let mean = u.iter().copied().sum::<T>() / n;
    let l2 = u.iter().map(|v| *v * *v).sum::<T>() / n * grid.length();
    InvariantSample { t, mean, l2 }
}

fn run<T: Real>(
    u0: &Field<T>,
    mut forcing: Forcing<'_, T>,
    cfg: &SolverConfig<T>,
    exact: Option<&dyn Fn(T, T) -> Result<T>>,
) -> Result<RunReport<T>> {
    cfg.validate()?;
    if u0.grid() != &cfg.grid {
        return Err(Error::InvalidGrid("initial data and solver grid differ".into()));
    }
    if !u0.is_real() && u0.max_imag() > T::zero() {
        return Err(Error::InvalidArgument("initial data must be real".into()));
    }
    let steps = cfg.steps();
    let h = cfg.step_size();
    let mut ops = Operators::new(&cfg.grid, &cfg.coefficients, cfg.dealias, h);
    if cfg.integrator == Integrator::Etdrk4 {
        ops = ops.with_etd(h);
    }
    let u_max = u0.max_abs().max(T::one());
    let advective = h * cfg.coefficients.nonlinear * u_max * cfg.grid.max_wavenumber();
    if advective > T::lit(ADVECTIVE_LIMIT) {
        return Err(Error::UnstableTimeStep {
            dt: h.to_f64_lossy(),
            limit: (T::lit(ADVECTIVE_LIMIT) / (cfg.coefficients.nonlinear * u_max * cfg.grid.max_wavenumber()))
                .to_f64_lossy(),
        });
    }

    let mut hat = ops.spectral.forward(u0.values());
    let initial: Vec<T> = u0.values().iter().map(|v| v.re).collect();
    let mut snapshots = vec![Snapshot { t: T::zero(), u: Field::from_real(cfg.grid.clone(), initial.clone())? }];
    let mut series = vec![invariants(&cfg.grid, T::zero(), &initial)];
    let mut max_imag = T::zero();
    let mut exact_error = T::zero();
    for s in 0..steps {
        let t = h * T::from_count(s);
        forcing.refresh(&ops, &hat, s, h)?;
        hat = step(cfg.integrator, &ops, &forcing, &hat, t, h)?;
        let t_next = h * T::from_count(s + 1);
        let (u, imag) = ops.physical(&hat);
        max_imag = max_imag.max(imag);
        let norm = u.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        if !(norm <= T::lit(BLOW_UP)) {
            return Err(Error::BlowUp { t: t_next.to_f64_lossy(), norm: norm.to_f64_lossy() });
        }
        if imag > T::lit(MAX_IMAG) {
            return Err(Error::LostRealness { t: t_next.to_f64_lossy(), imag: imag.to_f64_lossy() });
        }
        if (s + 1) % cfg.snapshot_every == 0 || s + 1 == steps {
            if let Some(f) = exact {
                for (x, v) in cfg.grid.nodes().into_iter().zip(&u) {
                    exact_error = exact_error.max((*v - f(x, t_next)?).abs());
                }
            }
            series.push(invariants(&cfg.grid, t_next, &u));
            snapshots.push(Snapshot { t: t_next, u: Field::from_real(cfg.grid.clone(), u)? });
        }
    }
    Ok(RunReport { snapshots, invariants: series, steps, dt: h, max_imag, exact_error: exact.map(|_| exact_error) })
}

/// Integrates `u_t = d·u_xxx − n·u·u_x + 2∂ₓ Σ g_k ψ_kψ*_k`.
pub fn evolve<T: Real>(u0: &PeriodicPotential<T>, spec: &SourceSpec<T>, cfg: &SolverConfig<T>) -> Result<RunReport<T>> {
    let forcing = if spec.is_active() { Forcing::Bloch { spec, cached: Vec::new() } } else { Forcing::None };
    run(u0.field(), forcing, cfg, None)
}

/// Integrates the one-soliton flow with the closed-form source `2∂ₓψ²(κ)`
/// along the exact `c(t)` and records the error against the exact potential.
///
/// The grid is expected to be centred on the soliton (origin `−L/2`); the
/// equation's coefficients are those of `cfg` (see
/// [`KdvCoefficients::soliton_c_clock`] for the pairing with `ċ = κ³c − 1`).
pub fn evolve_prescribed_source<T: Real>(kappa: T, c0: T, cfg: &SolverConfig<T>) -> Result<RunReport<T>> {
    let setting = FlowSetting::new(FlowKind::Melnikov, kappa, c0)?;
    let k3 = kappa * kappa * kappa;
    if c0 < T::one() / k3 {
        let t_star = crate::soliton::annihilation_time(kappa, c0)?;
        if cfg.t_end >= t_star {
            return Err(Error::InvalidArgument(format!(
                "t_end = {} reaches the annihilation time {t_star}",
                cfg.t_end
            )));
        }
    }
    let far = [T::zero(), cfg.t_end]
        .iter()
        .map(|&t| setting.state_at(t).position().map(|x| x.abs()).unwrap_or(T::infinity()))
        .fold(T::zero(), T::max);
    let required = T::lit(2.0) * (far + T::lit(20.0) / kappa);
    if cfg.grid.length() < required {
        return Err(Error::BoxTooSmall { length: cfg.grid.length().to_f64_lossy(), required: required.to_f64_lossy() });
    }
    let state0: SolitonState<T> = setting.state_at(T::zero());
    let values = cfg.grid.nodes().into_iter().map(|x| state0.potential(x)).collect::<Result<Vec<_>>>()?;
    let u0 = Field::from_real(cfg.grid.clone(), values)?;
    let exact = |x: T, t: T| setting.state_at(t).potential(x);
    run(&u0, Forcing::Prescribed { setting }, cfg, Some(&exact))
}
