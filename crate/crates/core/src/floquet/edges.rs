//! Roots of `Δ(E) = ±2` on a real interval and their classification.
//!
//! Simple roots are bracketed by sign changes of `Δ ∓ 2` on a uniform scan.
//! Double roots never change sign, so every interior local extremum of `Δ`
//! is refined by bisection on `Δ′` and its value compared with the level:
//! strictly beyond `±2` is an open gap (possibly narrower than the scan),
//! on the level is a candidate double point, accepted as a closed gap only
//! if `|Δ′|` and `‖M ∓ I‖` are both small.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{re, Real};

use super::{discriminant_derivative, scan_discriminant_with, HillPropagator, PeriodicPotential};

/// Which level a band edge sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeLevel {
    /// `Δ = 2`
    Periodic,
    /// `Δ = −2`
    Antiperiodic,
}

impl EdgeLevel {
    fn value<T: Real>(self) -> T {
        match self {
            EdgeLevel::Periodic => T::lit(2.0),
            EdgeLevel::Antiperiodic => T::lit(-2.0),
        }
    }

    /// Sign making `sign·(Δ − level)` positive inside the adjacent gap.
    fn orientation<T: Real>(self) -> T {
        match self {
            EdgeLevel::Periodic => T::one(),
            EdgeLevel::Antiperiodic => -T::one(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandEdge<T> {
    pub energy: T,
    pub level: EdgeLevel,
    /// Double point: `|Δ′| < derivative_tol` and `‖M ∓ I‖ < identity_tol`.
    pub closed: bool,
    pub derivative: T,
    pub identity_distance: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandEdgeOptions<T> {
    /// Uniform scan points, endpoints included.
    pub samples: usize,
    /// Bisection width for simple roots.
    pub root_tol: T,
    /// Oriented excess `sign·(Δ − level)` at an extremum above which the gap
    /// counts as open.
    pub touch_tol: T,
    pub derivative_tol: T,
    pub identity_tol: T,
    /// Propagator tolerance used for refinement.
    pub refine_tol: T,
}

impl<T: Real> Default for BandEdgeOptions<T> {
    fn default() -> Self {
        Self {
            samples: 2048,
            root_tol: T::lit(1e-10),
            touch_tol: T::lit(1e-11),
            derivative_tol: T::lit(1e-5),
            identity_tol: T::lit(1e-5),
            refine_tol: T::lit(1e-13),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport<T> {
    /// All roots of `Δ = ±2` in range, sorted by energy.
    pub edges: Vec<BandEdge<T>>,
    pub closed_gaps: Vec<T>,
    pub open_gaps: Vec<(T, T)>,
    pub scan_spacing: T,
    pub samples: usize,
    pub warnings: Vec<String>,
}

impl<T: Real> GapReport<T> {
    pub fn band_edges(&self) -> Vec<T> {
        self.edges.iter().map(|e| e.energy).collect()
    }

    /// Smallest distance from `energy` to any band edge (infinite if none).
    pub fn distance_to_edges(&self, energy: T) -> T {
        self.edges.iter().fold(T::infinity(), |d, e| d.min((e.energy - energy).abs()))
    }
}

pub fn find_band_edges<T: Real>(u: &PeriodicPotential<T>, e_min: T, e_max: T) -> Result<GapReport<T>> {
    find_band_edges_with(u, e_min, e_max, &BandEdgeOptions::default())
}

enum Candidate<T> {
    Crossing { level: EdgeLevel, lo: T, hi: T },
    Extremum { level: EdgeLevel, lo: T, hi: T },
}

pub fn find_band_edges_with<T: Real>(
    u: &PeriodicPotential<T>,
    e_min: T,
    e_max: T,
    opts: &BandEdgeOptions<T>,
) -> Result<GapReport<T>> {
    if !(e_min < e_max) || !e_min.is_finite() || !e_max.is_finite() {
        return Err(Error::InvalidArgument(format!("empty energy range [{e_min}, {e_max}]")));
    }
    if opts.samples < 3 {
        return Err(Error::InvalidArgument("band-edge scan needs at least 3 samples".into()));
    }
    let prop = HillPropagator::with_tolerance(u, opts.refine_tol);
    let spacing = (e_max - e_min) / T::from_count(opts.samples - 1);
    let energies: Vec<T> = (0..opts.samples).map(|i| e_min + spacing * T::from_count(i)).collect();
    let complex: Vec<_> = energies.iter().map(|&e| re(e)).collect();
    let delta: Vec<T> = scan_discriminant_with(&prop, &complex)?.iter().map(|s| s.delta.re).collect();

    let mut candidates = Vec::new();
    let mut exact = Vec::new();
    for level in [EdgeLevel::Periodic, EdgeLevel::Antiperiodic] {
        let lv = level.value::<T>();
        let o = level.orientation::<T>();
        let f: Vec<T> = delta.iter().map(|&d| o * (d - lv)).collect();
        for i in 0..f.len() - 1 {
            if f[i] * f[i + 1] < T::zero() {
                candidates.push(Candidate::Crossing { level, lo: energies[i], hi: energies[i + 1] });
            }
        }
        for i in 1..f.len() - 1 {
            let is_max = f[i] >= f[i - 1] && f[i] >= f[i + 1] && (f[i] > f[i - 1] || f[i] > f[i + 1]);
            if is_max && f[i] > -T::one() {
                candidates.push(Candidate::Extremum { level, lo: energies[i - 1], hi: energies[i + 1] });
            } else if f[i] == T::zero() {
                exact.push((level, energies[i]));
            }
        }
    }

    let outcomes: Vec<Result<Outcome<T>>> = candidates.par_iter().map(|c| resolve(&prop, c, opts)).collect();
    let mut roots: Vec<(EdgeLevel, T)> = exact;
    let mut touches: Vec<(EdgeLevel, T)> = Vec::new();
    let mut warnings = Vec::new();
    for o in outcomes {
        match o? {
            Outcome::Roots(level, rs) => roots.extend(rs.into_iter().map(|r| (level, r))),
            Outcome::Touch(level, e) => touches.push((level, e)),
            Outcome::Short(level, e, v) => {
                warnings.push(format!("extremum of the discriminant at E = {e} stops {v:e} short of {:?} level", level))
            }
        }
    }

    let dedupe = |v: &mut Vec<(EdgeLevel, T)>| {
        v.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite energies"));
        v.dedup_by(|a, b| a.0 == b.0 && (a.1 - b.1).abs() <= T::lit(10.0) * opts.root_tol);
    };
    dedupe(&mut roots);
    // A touching extremum may coincide with a bracketed root of a very narrow gap.
    touches.retain(|t| !roots.iter().any(|r| r.0 == t.0 && (r.1 - t.1).abs() <= T::lit(10.0) * opts.root_tol));
    dedupe(&mut touches);

    let mut edges = Vec::with_capacity(roots.len() + touches.len());
    for &(level, e) in &roots {
        let m = prop.monodromy(re(e))?;
        let d = discriminant_derivative(&prop, e)?;
        edges.push(BandEdge {
            energy: e,
            level,
            closed: false,
            derivative: d,
            identity_distance: identity_distance(&m, level),
        });
    }
    for &(level, e) in &touches {
        let m = prop.monodromy(re(e))?;
        let d = discriminant_derivative(&prop, e)?;
        let dist = identity_distance(&m, level);
        let closed = d.abs() < opts.derivative_tol && dist < opts.identity_tol;
        if !closed {
            warnings.push(format!(
                "double root of the discriminant at E = {e} with |dΔ/dE| = {:e}, ‖M ∓ I‖ = {:e}; treated as a zero-width open gap",
                d.abs(),
                dist
            ));
        }
        edges.push(BandEdge { energy: e, level, closed, derivative: d, identity_distance: dist });
    }
    edges.sort_by(|a, b| a.energy.partial_cmp(&b.energy).expect("finite energies"));

    let mut open_gaps = Vec::new();
    for level in [EdgeLevel::Periodic, EdgeLevel::Antiperiodic] {
        let same: Vec<&BandEdge<T>> = edges.iter().filter(|e| e.level == level).collect();
        for pair in same.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if a.closed || b.closed {
                continue;
            }
            let mid = (a.energy + b.energy) / T::lit(2.0);
            let d = prop.monodromy(re(mid))?.trace().re;
            if level.orientation::<T>() * (d - level.value::<T>()) > T::zero() {
                open_gaps.push((a.energy, b.energy));
            }
        }
        for e in same.iter().filter(|e| !e.closed && touches.iter().any(|t| t.1 == e.energy)) {
            open_gaps.push((e.energy, e.energy));
        }
    }
    open_gaps.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite energies"));

    let closed_gaps = edges.iter().filter(|e| e.closed).map(|e| e.energy).collect();
    warnings.push(format!(
        "scan density {} samples, spacing {spacing:e}; pairs of simple roots closer than the spacing are found only through the extremum of the discriminant between them",
        opts.samples
    ));
    Ok(GapReport { edges, closed_gaps, open_gaps, scan_spacing: spacing, samples: opts.samples, warnings })
}

enum Outcome<T> {
    Roots(EdgeLevel, Vec<T>),
    Touch(EdgeLevel, T),
    Short(EdgeLevel, T, T),
}

fn identity_distance<T: Real>(m: &super::Mat2<T>, level: EdgeLevel) -> T {
    let s = re(level.value::<T>() / T::lit(2.0));
    let d = [m.0[0][0] - s, m.0[0][1], m.0[1][0], m.0[1][1] - s];
    d.iter().fold(T::zero(), |a, v| a.max(v.norm()))
}

fn resolve<T: Real>(prop: &HillPropagator<T>, c: &Candidate<T>, opts: &BandEdgeOptions<T>) -> Result<Outcome<T>> {
    let oriented = |level: EdgeLevel, e: T| -> Result<T> {
        let d = prop.monodromy(re(e))?.trace().re;
        Ok(level.orientation::<T>() * (d - level.value::<T>()))
    };
    match *c {
        Candidate::Crossing { level, lo, hi } => {
            Ok(Outcome::Roots(level, vec![bisect(|e| oriented(level, e), lo, hi, opts.root_tol)?]))
        }
        Candidate::Extremum { level, lo, hi } => {
            // Oriented Δ has a maximum: its derivative goes from + to −.
            let o = level.orientation::<T>();
            let slope = |e: T| discriminant_derivative(prop, e).map(|d| o * d);
            let width = T::lit(1e-13) * T::one().max(lo.abs().max(hi.abs()));
            let top = bisect(slope, lo, hi, width)?;
            let v = oriented(level, top)?;
            if v > opts.touch_tol {
                let mut roots = Vec::new();
                for (a, b) in [(lo, top), (top, hi)] {
                    if oriented(level, a)? < T::zero() && oriented(level, b)? > T::zero()
                        || oriented(level, a)? > T::zero() && oriented(level, b)? < T::zero()
                    {
                        roots.push(bisect(|e| oriented(level, e), a, b, opts.root_tol)?);
                    }
                }
                Ok(Outcome::Roots(level, roots))
            } else if v >= -opts.touch_tol {
                Ok(Outcome::Touch(level, top))
            } else {
                Ok(Outcome::Short(level, top, -v))
            }
        }
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]`; returns the midpoint of
/// the final bracket. If `f` does not change sign, the endpoint of smaller
/// magnitude is returned.
fn bisect<T: Real>(f: impl Fn(T) -> Result<T>, mut lo: T, mut hi: T, width: T) -> Result<T> {
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == T::zero() {
        return Ok(lo);
    }
    if fhi == T::zero() {
        return Ok(hi);
    }
    if flo * fhi > T::zero() {
        return Ok(if flo.abs() < fhi.abs() { lo } else { hi });
    }
    for _ in 0..200 {
        if hi - lo <= width {
            break;
        }
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == T::zero() {
            return Ok(mid);
        }
        if (fm < T::zero()) == (flo < T::zero()) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / T::lit(2.0))
}
