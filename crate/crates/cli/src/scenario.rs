//! Scenario configurations. Every kind parses with unknown fields rejected
//! and is validated before any computation starts.

use std::f64::consts::PI;

use melnikov_core::ba::{CombinedPath, SpectralDataG0, TimePoint};
use melnikov_core::kdv::{Integrator, KdvCoefficients, RefreshPoint, SourceEntry};
use melnikov_core::soliton::FlowKind;
use melnikov_core::{Complex, Grid, Potential};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

/// Library errors raised while building inputs are input errors.
fn as_input(e: CliError) -> CliError {
    match e {
        CliError::Numerical(e) => CliError::Input(e.to_string()),
        other => other,
    }
}

fn finite(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite, got {v}")))
    }
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive, got {v}")))
    }
}

fn interval(name: &str, [a, b]: [f64; 2]) -> Result<(), CliError> {
    finite(name, a)?;
    finite(name, b)?;
    if a < b {
        Ok(())
    } else {
        Err(invalid(format!("{name} must satisfy lo < hi, got [{a}, {b}]")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedPotential {
    Zero,
}

/// `amplitude·cos(2π·harmonic·x/T)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CosinePotential {
    pub cos: f64,
    #[serde(default = "one_u32")]
    pub harmonic: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampledPotential {
    pub samples: Vec<f64>,
}

/// `"zero"`, `{"cos": a, "harmonic": m}` or `{"samples": [...]}` (one
/// period, uniformly spaced from the grid origin).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialSpec {
    Named(NamedPotential),
    Cosine(CosinePotential),
    Sampled(SampledPotential),
}

fn one_u32() -> u32 {
    1
}

impl PotentialSpec {
    /// Grid size implied by sampled values, if any.
    fn implied_n(&self) -> Option<usize> {
        match self {
            PotentialSpec::Sampled(s) => Some(s.samples.len()),
            _ => None,
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        match self {
            PotentialSpec::Named(_) => Ok(()),
            PotentialSpec::Cosine(c) => finite("cos amplitude", c.cos),
            PotentialSpec::Sampled(s) => s.samples.iter().try_for_each(|&v| finite("potential sample", v)),
        }
    }

    pub fn build(&self, grid: Grid) -> Result<Potential, CliError> {
        Ok(match self {
            PotentialSpec::Named(NamedPotential::Zero) => Potential::zero(grid),
            PotentialSpec::Cosine(c) => {
                let k = 2.0 * PI * f64::from(c.harmonic) / grid.length();
                let origin = grid.origin();
                Potential::from_fn(grid, move |x| c.cos * (k * (x - origin)).cos())
            }
            PotentialSpec::Sampled(s) => Potential::new(melnikov_core::RealField::from_real(grid, s.samples.clone())?)?,
        })
    }
}

/// Grid size for a potential: explicit `n` must agree with sampled data.
fn resolve_n(spec: &PotentialSpec, n: Option<usize>, default: usize) -> Result<usize, CliError> {
    match (spec.implied_n(), n) {
        (Some(m), Some(n)) if m != n => Err(invalid(format!("n = {n} but {m} potential samples given"))),
        (Some(m), _) => Ok(m),
        (None, n) => Ok(n.unwrap_or(default)),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloquetScan {
    pub u: PotentialSpec,
    #[serde(rename = "T")]
    pub period: f64,
    pub range: [f64; 2],
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default = "default_scan_samples")]
    pub samples: usize,
}

fn default_scan_samples() -> usize {
    400
}

impl FloquetScan {
    pub fn validate(&self) -> Result<(), CliError> {
        self.u.validate()?;
        positive("T", self.period)?;
        interval("range", self.range)?;
        if self.samples < 2 {
            return Err(invalid("samples must be at least 2"));
        }
        self.potential().map(|_| ()).map_err(as_input)
    }

    pub fn potential(&self) -> Result<Potential, CliError> {
        let n = resolve_n(&self.u, self.n, 64)?;
        self.u.build(Grid::new(n, self.period)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolitonDemo {
    pub kappa: f64,
    pub c0: f64,
    #[serde(default = "default_flow")]
    pub flow: FlowKind,
    /// Defaults to the annihilation time when there is one, else `5/κ³`.
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default = "default_demo_samples")]
    pub samples: usize,
    #[serde(default = "default_x_range")]
    pub x_range: [f64; 2],
    /// Number of `u(x)` profiles in the waterfall.
    #[serde(default = "default_profiles")]
    pub profiles: usize,
}

fn default_flow() -> FlowKind {
    FlowKind::Melnikov
}

fn default_demo_samples() -> usize {
    200
}

fn default_x_range() -> [f64; 2] {
    [-10.0, 10.0]
}

fn default_profiles() -> usize {
    6
}

impl SolitonDemo {
    pub fn validate(&self) -> Result<(), CliError> {
        positive("kappa", self.kappa)?;
        finite("c0", self.c0)?;
        if let Some(t) = self.t_end {
            positive("t_end", t)?;
        }
        interval("x_range", self.x_range)?;
        if self.samples < 2 || self.profiles < 1 {
            return Err(invalid("samples must be at least 2 and profiles at least 1"));
        }
        Ok(())
    }
}

/// `[re, im]`.
pub type ComplexPair = [f64; 2];

pub fn complex(p: ComplexPair) -> Complex {
    Complex::new(p[0], p[1])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaVerify {
    pub data: SpectralDataG0<f64>,
    pub time_point: TimePoint<f64>,
    /// Spectral parameters for the auxiliary-problem checks.
    pub lambdas: Vec<ComplexPair>,
    pub xs: Vec<f64>,
    #[serde(default)]
    pub path: Option<CombinedPath<f64>>,
    /// Path parameter at which the chain rule is checked.
    #[serde(default)]
    pub path_tau: f64,
    /// Path parameters sampled for the potential grid output.
    #[serde(default)]
    pub path_samples: Vec<f64>,
}

impl BaVerify {
    pub fn validate(&self) -> Result<(), CliError> {
        let n = self.data.n();
        if n == 0 {
            return Err(invalid("at least one pair is required"));
        }
        if self.time_point.taus().len() != n {
            return Err(invalid(format!("{} gluing parameters for {n} pairs", self.time_point.taus().len())));
        }
        if self.time_point.times().is_empty() {
            return Err(invalid("times must contain at least x"));
        }
        if self.lambdas.is_empty() || self.xs.is_empty() {
            return Err(invalid("lambdas and xs must be nonempty"));
        }
        self.xs.iter().try_for_each(|&x| finite("x", x))?;
        self.lambdas.iter().flatten().try_for_each(|&v| finite("lambda", v))?;
        finite("path_tau", self.path_tau)?;
        if let Some(p) = &self.path {
            if p.alphas.len() != n || p.betas.len() != n {
                return Err(invalid(format!("path needs {n} alphas and betas")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: Option<usize>,
    pub length: f64,
    #[serde(default)]
    pub origin: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `u_t = ¼u_xxx − (3/2)u·u_x`
    Standard,
    /// `u_t = ⅛u_xxx − ¾u·u_x`
    SolitonClock,
}

impl Normalization {
    pub fn coefficients(self) -> KdvCoefficients<f64> {
        match self {
            Normalization::Standard => KdvCoefficients::standard(),
            Normalization::SolitonClock => KdvCoefficients::soliton_c_clock(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveTolerances {
    #[serde(default = "default_drift_tol")]
    pub drift: f64,
    #[serde(default = "default_mean_tol")]
    pub mean: f64,
}

fn default_drift_tol() -> f64 {
    1e-5
}

fn default_mean_tol() -> f64 {
    1e-12
}

impl Default for EvolveTolerances {
    fn default() -> Self {
        Self { drift: default_drift_tol(), mean: default_mean_tol() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Evolve {
    pub grid: GridSpec,
    pub u0: PotentialSpec,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_integrator")]
    pub integrator: Integrator,
    #[serde(default = "yes")]
    pub dealias: bool,
    #[serde(default = "default_normalization")]
    pub normalization: Normalization,
    #[serde(default = "one_usize")]
    pub snapshot_every: usize,
    #[serde(default)]
    pub sources: Vec<SourceEntry<f64>>,
    #[serde(default = "one_usize")]
    pub refresh_every: usize,
    #[serde(default)]
    pub refresh_at: RefreshPoint,
    /// Real probe energies for the discriminant series.
    #[serde(default)]
    pub probes: Vec<f64>,
    #[serde(default)]
    pub tolerances: EvolveTolerances,
}

fn default_integrator() -> Integrator {
    Integrator::IfRk4
}

fn default_normalization() -> Normalization {
    Normalization::Standard
}

fn yes() -> bool {
    true
}

fn one_usize() -> usize {
    1
}

impl Evolve {
    pub fn validate(&self) -> Result<(), CliError> {
        self.u0.validate()?;
        positive("grid.length", self.grid.length)?;
        finite("grid.origin", self.grid.origin)?;
        positive("dt", self.dt)?;
        positive("t_end", self.t_end)?;
        if self.snapshot_every == 0 || self.refresh_every == 0 {
            return Err(invalid("snapshot_every and refresh_every must be at least 1"));
        }
        for s in &self.sources {
            finite("source energy", s.energy)?;
            finite("source coupling", s.coupling)?;
        }
        self.probes.iter().try_for_each(|&e| finite("probe", e))?;
        positive("tolerances.drift", self.tolerances.drift)?;
        positive("tolerances.mean", self.tolerances.mean)?;
        let n = resolve_n(&self.u0, self.grid.n, 128)?;
        if !n.is_power_of_two() {
            return Err(invalid(format!("grid size must be a power of two, got {n}")));
        }
        self.potential().map(|_| ()).map_err(as_input)
    }

    pub fn potential(&self) -> Result<Potential, CliError> {
        let n = resolve_n(&self.u0, self.grid.n, 128)?;
        self.u0.build(Grid::with_origin(n, self.grid.length, self.grid.origin)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyAll {
    /// Random one-soliton states in the seeded sweep.
    #[serde(default = "default_cases")]
    pub property_cases: usize,
}

fn default_cases() -> usize {
    64
}

/// A parsed and validated scenario.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Scenario {
    FloquetScan(FloquetScan),
    SolitonDemo(SolitonDemo),
    BaVerify(BaVerify),
    Evolve(Evolve),
    VerifyAll(VerifyAll),
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| invalid(format!("config: {e}")))
}

impl Scenario {
    /// Parses `text` as the configuration of `kind` and validates it.
    pub fn parse(kind: &str, text: &str) -> Result<Self, CliError> {
        let scenario = match kind {
            "floquet-scan" => Scenario::FloquetScan(parse(text)?),
            "soliton-demo" => Scenario::SolitonDemo(parse(text)?),
            "ba-verify" => Scenario::BaVerify(parse(text)?),
            "evolve" => Scenario::Evolve(parse(text)?),
            "verify-all" => Scenario::VerifyAll(parse(text)?),
            other => return Err(invalid(format!("unknown scenario kind {other}"))),
        };
        scenario.validate()?;
        Ok(scenario)
    }

    fn validate(&self) -> Result<(), CliError> {
        match self {
            Scenario::FloquetScan(s) => s.validate(),
            Scenario::SolitonDemo(s) => s.validate(),
            Scenario::BaVerify(s) => s.validate(),
            Scenario::Evolve(s) => s.validate(),
            Scenario::VerifyAll(_) => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_example_scan_parses() {
        let s = Scenario::parse("floquet-scan", r#"{"u": "zero", "T": 6.283185307, "range": [0.01, 2]}"#).unwrap();
        assert!(matches!(s, Scenario::FloquetScan(FloquetScan { samples: 400, .. })));
    }

    #[test]
    fn unknown_fields_and_bad_values_are_rejected() {
        for (kind, text) in [
            ("floquet-scan", r#"{"u": "zero", "T": 1, "range": [0, 1], "extra": 1}"#),
            ("floquet-scan", r#"{"u": "zero", "T": -1, "range": [0, 1]}"#),
            ("floquet-scan", r#"{"u": "zero", "T": 1, "range": [1, 0]}"#),
            ("floquet-scan", r#"{"u": {"cos": 1, "phase": 2}, "T": 1, "range": [0, 1]}"#),
            ("floquet-scan", r#"{"u": {"samples": [0, 0, 0]}, "T": 1, "range": [0, 1]}"#),
            ("soliton-demo", r#"{"kappa": 0, "c0": 0.5}"#),
            ("evolve", r#"{"grid": {"n": 48, "length": 6.28}, "u0": "zero", "dt": 0.01, "t_end": 1}"#),
            (
                "ba-verify",
                r#"{"data": {"pairs": []}, "time_point": {"times": [0], "taus": []}, "lambdas": [[2, 0]], "xs": [0]}"#,
            ),
            ("nonsense", "{}"),
        ] {
            assert!(matches!(Scenario::parse(kind, text), Err(CliError::Input(_))), "{kind}: {text}");
        }
    }

    #[test]
    fn cosine_potential_is_relative_to_the_origin() {
        let spec = PotentialSpec::Cosine(CosinePotential { cos: 0.3, harmonic: 2 });
        let u = spec.build(Grid::with_origin(16, 4.0, -2.0).unwrap()).unwrap();
        assert!((u.field().values()[0].re - 0.3).abs() < 1e-15);
        assert!((u.field().values()[4].re - 0.3 * PI.cos()).abs() < 1e-15);
    }
}
