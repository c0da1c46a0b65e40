use thiserror::Error;

/// Everything that can go wrong while building or checking the objects in
/// this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },
    #[error("inner function is not pure: ‖Θ(0)‖ = {norm:.17}")]
    NotPure { norm: f64 },
    #[error("invalid Blaschke-Potapov factor: {0}")]
    FactorInvalid(String),
    #[error("resolvent I − zA is numerically singular")]
    SingularResolvent,
    #[error("generation failed after {attempts} attempts: {reason}")]
    GenerationFailed { attempts: usize, reason: String },
    #[error("point {0} is outside the open unit disk")]
    OutOfDisk(String),
    #[error("W is not a strict contraction: ‖W‖ = {norm:.17}")]
    NotStrict { norm: f64 },
    #[error("feedback term I − D W* is numerically singular")]
    FeedbackSingular,
    #[error("transformed function failed validation: {0}")]
    PurityViolation(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("quadrature grid too coarse: doubling moved an entry by {change:.3e}")]
    GridTooCoarse { change: f64 },
    #[error("conjugation matrix is not symmetric (‖U − Uᵀ‖ = {residual:.3e}), Γ² ≠ id")]
    NotInvolutive { residual: f64 },
    #[error("image of C_Γ leaves K_Θ (distance {residual:.3e})")]
    NotInKTheta { residual: f64 },
    #[error("inputs fail the compatibility hypotheses: {0}")]
    IncompatibleInputs(String),
    #[error("sample sets live on different grids ({0} vs {1} nodes)")]
    GridMismatch(usize, usize),
    #[error("Gram system is ill-conditioned (condition number {cond:.3e})")]
    IllConditioned { cond: f64 },
    #[error("invalid grid size {0}: must be a power of two ≥ 8")]
    InvalidGrid(usize),
    #[error("malformed instance: {0}")]
    Malformed(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Malformed(e.to_string())
    }
}

impl Error {
    /// Variant name, stable across releases.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotUnitary { .. } => "NotUnitary",
            Error::NotPure { .. } => "NotPure",
            Error::FactorInvalid(_) => "FactorInvalid",
            Error::SingularResolvent => "SingularResolvent",
            Error::GenerationFailed { .. } => "GenerationFailed",
            Error::OutOfDisk(_) => "OutOfDisk",
            Error::NotStrict { .. } => "NotStrict",
            Error::FeedbackSingular => "FeedbackSingular",
            Error::PurityViolation(_) => "PurityViolation",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::GridTooCoarse { .. } => "GridTooCoarse",
            Error::NotInvolutive { .. } => "NotInvolutive",
            Error::NotInKTheta { .. } => "NotInKTheta",
            Error::IncompatibleInputs(_) => "IncompatibleInputs",
            Error::GridMismatch(..) => "GridMismatch",
            Error::IllConditioned { .. } => "IllConditioned",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::Malformed(_) => "Malformed",
            Error::Io(_) => "Io",
        }
    }
}
