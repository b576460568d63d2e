use thiserror::Error;

/// Failures raised by the solver, the pressure law and the audits.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("mapped depth degenerates: min(h + eta) = {min_depth:.6e} <= h/4 = {limit:.6e}")]
    DegenerateDepth { min_depth: f64, limit: f64 },

    #[error("elliptic solve failed: {0}")]
    SolverFailure(String),

    #[error("input has nonzero mean {mean:.3e} (max |f| = {scale:.3e})")]
    NonzeroMean { mean: f64, scale: f64 },

    #[error("odd input does not vanish at the walls: f(0) = {left:.3e}, f(L) = {right:.3e}")]
    WallMismatch { left: f64, right: f64 },

    #[error("bad cutoff interval [{x0}, {x1}]")]
    BadInterval { x0: f64, x1: f64 },

    #[error("beach length {delta} must satisfy 0 < delta < L/2 = {half_length}")]
    BadBeach { delta: f64, half_length: f64 },

    #[error("initial energy is zero; normalized constants are undefined")]
    ZeroEnergy,

    #[error("audits need every step stored (sample_stride = {0})")]
    InsufficientSampling(usize),

    #[error("blow-up at t = {t:.6}: max |eta| = {max_eta:.6e} exceeds h/2")]
    BlowUp { t: f64, max_eta: f64 },

    #[error("cutoff sample {value:.3e} at index {index} is negative")]
    NegativeCutoff { index: usize, value: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("at t = {t:.6}: {source}")]
    AtTime {
        t: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Strips any time annotation.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtTime { source, .. } => source.root(),
            e => e,
        }
    }

    /// Blow-up and degenerate-depth failures are physical, everything else is
    /// an input or internal error.
    pub fn is_physics_failure(&self) -> bool {
        matches!(
            self.root(),
            Error::BlowUp { .. } | Error::DegenerateDepth { .. } | Error::SolverFailure(_) | Error::NonFinite(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
