use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid needs at least 4 cells, got {0}")]
    GridTooSmall(usize),

    #[error("field has {got} values but the grid has {expected} cells")]
    LengthMismatch { expected: usize, got: usize },

    #[error("field value at cell {index} is not finite ({value})")]
    NonFiniteValue { index: usize, value: f64 },

    #[error("fields live on different grids (n = {left} vs n = {right})")]
    GridMismatch { left: usize, right: usize },

    #[error("kernel argument {0} lies outside [0, 1]")]
    KernelDomain(f64),

    #[error("unknown initial-data preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("spectral evaluation needs an even number of cells, got {0}")]
    OddGrid(usize),

    #[error("CFL number {courant:.3} exceeds 1 at t = {t}")]
    CflViolation { t: f64, courant: f64 },

    #[error("non-finite value produced at t = {t} (cell {index})")]
    NonFinite { t: f64, index: usize },

    #[error("CFL guard could not recover at t = {t}: step shrank to {tau:e}")]
    StepUnderflow { t: f64, tau: f64 },

    #[error(transparent)]
    Wave(#[from] crate::waves::WaveError),

    #[error(transparent)]
    Phase(#[from] crate::phase::PhaseError),

    #[error(transparent)]
    Diagnostics(#[from] crate::diagnostics::DiagnosticsError),
}

impl Error {
    /// Whether the error comes from a numerical breakdown rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::CflViolation { .. }
                | Error::NonFinite { .. }
                | Error::StepUnderflow { .. }
                | Error::Wave(
                    crate::waves::WaveError::NewtonDiverged { .. }
                        | crate::waves::WaveError::DampingFailed { .. }
                        | crate::waves::WaveError::ContinuationStall { .. }
                )
                | Error::Phase(_)
        )
    }
}
