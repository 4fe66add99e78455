use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("cavity outside stability range (length {length} m, mirror radius {radius} m)")]
    CavityUnstable { length: f64, radius: f64 },

    #[error("quadrature did not converge up to order {max_order} (last relative change {change:e})")]
    QuadratureNotConverged { max_order: usize, change: f64 },

    #[error("overlap requires a common waist plane for all modes")]
    WaistPlaneMismatch,

    #[error("mode basis is empty")]
    EmptyBasis,

    #[error("mode basis contains duplicate mode {0}")]
    DuplicateMode(String),

    #[error("coupling matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("eigensolver did not converge after {0} sweeps")]
    EigenNotConverged(usize),

    #[error("supermode index {index} out of range for {len} supermodes")]
    SupermodeOutOfRange { index: usize, len: usize },

    #[error("inconsistent operating point: {0}")]
    InconsistentOperatingPoint(String),

    #[error("time step {dt:e} s exceeds the stability bound {bound:e} s")]
    StepTooLarge { dt: f64, bound: f64 },

    #[error("local oscillator power must be positive")]
    ZeroLoPower,

    #[error("local oscillator mode must have unit norm (norm {0})")]
    LoNotNormalized(f64),

    #[error("too few samples: {samples} available, {required} required")]
    TooFewSamples { samples: usize, required: usize },

    #[error("{quantity} = {value} outside valid range [{min}, {max}]")]
    OutOfRange {
        quantity: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("energy conservation violated: relative error {0:e}")]
    EnergyConservation(f64),

    #[error("no phase-matched pair in range")]
    NoPhaseMatchedPair,

    #[error("no degeneracy crossing in the valid temperature range")]
    NoDegeneracyCrossing,

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit code: 2 for configuration problems, 3 for solver or physics failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Io(_) => 2,
            _ => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
