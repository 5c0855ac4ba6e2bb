use thiserror::Error;

/// Errors raised by the simulator and the reconstruction layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("invalid physical state: {0}")]
    Unphysical(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("adiabatic frame is degenerate at t = {t}: no field and zero detuning")]
    DegenerateFrame { t: f64 },

    #[error("step size underflow at t = {t} (h = {h:.3e}); problem is too stiff for the tolerance")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("invariant violated at t = {t}: {what} = {value:.3e}")]
    InvariantViolation { t: f64, what: &'static str, value: f64 },

    #[error("state has weight {leak:.3e} outside the addressed {{m, n}} block")]
    OutsideBlock { leak: f64 },

    #[error("calibration factor {factor:.3e} is below 1e-6; the signal cannot be converted to a population")]
    UnrecoverableAttenuation { factor: f64 },

    #[error("need at least {needed} measurement records, got {found}")]
    TooFewRecords { needed: usize, found: usize },

    #[error("i/o failure: {0}")]
    Io(String),

    #[error("measurement settings do not identify {direction}")]
    Unidentifiable { direction: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
