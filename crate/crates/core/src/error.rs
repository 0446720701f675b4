use thiserror::Error;

/// Errors produced by the numerical routines.
///
/// Energies and positions are carried as `f64` regardless of the working
/// scalar so error values stay `'static + Send + Sync`.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("field length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("potentials have different periods ({a} vs {b})")]
    PeriodMismatch { a: f64, b: f64 },

    #[error("step-size underflow integrating Hill's equation at E = {energy_re}{energy_im:+}i near x = {x}")]
    StepUnderflow { energy_re: f64, energy_im: f64, x: f64 },

    #[error("energy E = {energy_re}{energy_im:+}i is degenerate (|Δ²−4| = {gap:e}): Bloch pair undefined")]
    DegenerateEnergy { energy_re: f64, energy_im: f64, gap: f64 },

    #[error("source energy {energy} lies {distance:e} from a band edge (minimum {min:e})")]
    SourceNearBandEdge { energy: f64, distance: f64, min: f64 },

    #[error("closed form is singular at x = {x} (denominator vanishes)")]
    SingularPoint { x: f64 },

    #[error("evaluation at a divisor pole: λ = {re}{im:+}i")]
    PoleAtDivisor { re: f64, im: f64 },

    #[error("Bloch product has vanishing mean at E = {energy} (dΔ/dE ≈ 0); cannot normalize")]
    VanishingBlochNorm { energy: f64 },

    #[error("c0 = {c0} is outside the annihilation regime 0 < c0 < κ⁻³ = {limit}")]
    NotInAnnihilationRegime { c0: f64, limit: f64 },

    #[error("contour radius {radius} must exceed 2κ = {min}")]
    ContourTooSmall { radius: f64, min: f64 },

    #[error("Baker–Akhiezer system is singular (condition number {condition:e})")]
    SingularBASystem { condition: f64 },

    #[error("kernel integral diverges in both directions (Re(λ−μ) = {real_part:e})")]
    NonConvergentDirection { real_part: f64 },

    #[error("spectral data are not KdV-symmetric")]
    NotKdVSymmetric,

    #[error("time step {dt} exceeds the stability limit {limit}")]
    UnstableTimeStep { dt: f64, limit: f64 },

    #[error("box length {length} too small, need at least {required}")]
    BoxTooSmall { length: f64, required: f64 },

    #[error("solution blew up at t = {t} (‖u‖∞ = {norm:e})")]
    BlowUp { t: f64, norm: f64 },

    #[error("solution lost realness at t = {t} (max |Im u| = {imag:e})")]
    LostRealness { t: f64, imag: f64 },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
