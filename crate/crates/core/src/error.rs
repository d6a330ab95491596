use thiserror::Error;

/// Failure modes shared by every module of the engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("argument outside the floating-point range of the exponential kernel: |z| = {magnitude}")]
    OverflowDomain { magnitude: f64 },
    #[error("sample grid of {count} points cannot resolve mode {mode}")]
    AliasRisk { mode: i64, count: usize },
    #[error("|lambda| = {magnitude} is too close to zero for the closed-form characteristic function")]
    NearZeroLambda { magnitude: f64 },
    #[error("truncation N = {truncation} does not cover the requested modes (needs {required})")]
    TruncationTooSmall { truncation: usize, required: usize },
    #[error("spectral parameter lies {distance:e} from the spectrum")]
    PoleProximity { distance: f64 },
    #[error("Jacobi sweeps did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("extrapolated leading constant is unstable (relative spread {spread:e})")]
    SlowConvergence { spread: f64 },
    #[error("recovered weights carry mixed signs (mode {mode}: {weight:e})")]
    SignInconsistency { mode: i64, weight: f64 },
    #[error("inconsistent spectra: {reason}")]
    InconsistentSpectra { reason: &'static str },
    #[error("recovered potential has squared norm {norm_sq}, expected 1")]
    NormMismatch { norm_sq: f64 },
    #[error("recovered coefficient of mode {mode} breaks the asserted symmetry by {defect:e}")]
    SymmetryViolation { mode: i64, defect: f64 },
    #[error("invalid input: {reason}")]
    InvalidInput { reason: &'static str },
}

impl SpectralError {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            SpectralError::OverflowDomain { .. } => "OverflowDomain",
            SpectralError::AliasRisk { .. } => "AliasRisk",
            SpectralError::NearZeroLambda { .. } => "NearZeroLambda",
            SpectralError::TruncationTooSmall { .. } => "TruncationTooSmall",
            SpectralError::PoleProximity { .. } => "PoleProximity",
            SpectralError::NoConvergence { .. } => "NoConvergence",
            SpectralError::SlowConvergence { .. } => "SlowConvergence",
            SpectralError::SignInconsistency { .. } => "SignInconsistency",
            SpectralError::InconsistentSpectra { .. } => "InconsistentSpectra",
            SpectralError::NormMismatch { .. } => "NormMismatch",
            SpectralError::SymmetryViolation { .. } => "SymmetryViolation",
            SpectralError::InvalidInput { .. } => "InvalidInput",
        }
    }
}

pub type Result<T> = core::result::Result<T, SpectralError>;
