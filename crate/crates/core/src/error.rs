use thiserror::Error;

/// Errors raised by the tomography, measurement and spectral modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("relative phase undefined: |<VV|rho|HH>| = {magnitude:e} is below the coherence floor {floor:e}")]
    UndefinedPhase { magnitude: f64, floor: f64 },

    #[error("measurement plan is not tomographically complete (design rank {rank} < 16)")]
    IncompletePlan { rank: usize },

    #[error("all Cholesky parameters are zero")]
    DegenerateParameters,

    #[error("wavelength {wavelength_nm} nm outside validity window [{min_nm}, {max_nm}] nm")]
    OutOfRange {
        wavelength_nm: f64,
        min_nm: f64,
        max_nm: f64,
    },

    #[error("cut-angle calibration failed: {0}")]
    CalibrationFailure(String),

    #[error("spectral width unresolved: {0}")]
    UnresolvedWidth(String),

    #[error("phase average undefined: spectrum has zero total intensity")]
    UndefinedAverage,

    #[error("metric `{metric}` undefined on {skipped} of {total} resamples")]
    UnstableMetric {
        metric: String,
        skipped: usize,
        total: usize,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag for error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::UndefinedPhase { .. } => "undefined-phase",
            Error::IncompletePlan { .. } => "incomplete-plan",
            Error::DegenerateParameters => "degenerate-parameter",
            Error::OutOfRange { .. } => "out-of-range",
            Error::CalibrationFailure(_) => "calibration-failure",
            Error::UnresolvedWidth(_) => "unresolved-width",
            Error::UndefinedAverage => "undefined-average",
            Error::UnstableMetric { .. } => "unstable-metric",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
