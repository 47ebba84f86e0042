use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("site {site} out of range for {n_ions} ion(s)")]
    SiteOutOfRange { site: usize, n_ions: usize },

    #[error("operator is not Hermitian (max |A - A^dag| = {0:e})")]
    NotHermitian(f64),

    #[error("operator is not unitary (max |U^dag U - I| = {0:e})")]
    NotUnitary(f64),

    #[error("operator is not a projector: {0}")]
    NotProjector(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("segment `{0}` has collapse operators; use Lindblad evolution")]
    CollapseOpsPresent(String),

    #[error("integration accuracy lost in segment `{label}`: {detail}; reduce dt_max")]
    IntegrationAccuracy { label: String, detail: String },

    #[error("sample time {time:e} s outside schedule [0, {end:e}] s")]
    SampleTimeOutOfRange { time: f64, end: f64 },

    #[error("schedule conflict: {0}")]
    ScheduleConflict(String),

    #[error("Fock cutoff too small: mode {mode} boundary population {population:e} exceeds {tolerance:e}")]
    CutoffExceeded {
        mode: usize,
        population: f64,
        tolerance: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("scenario parse error: {0}")]
    Parse(String),

    #[error("scenario validation failed: {0}")]
    Validation(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
