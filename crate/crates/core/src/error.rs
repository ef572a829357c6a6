use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is singular to working precision")]
    Singular,

    #[error("matrix is not diagonalizable within working precision: {0}")]
    NonDiagonalizable(String),

    #[error("eigenvalue iteration failed to converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("not a density matrix: {0}")]
    NotAState(String),

    #[error("vector of length {0} cannot be reshaped to a square matrix")]
    BadLength(usize),

    #[error("invalid model field `{field}`: {message}")]
    InvalidModel { field: String, message: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("basis vectors are linearly dependent (vector {0})")]
    DependentBasis(usize),

    #[error("basis vector {0} is not Hermitian-symmetric")]
    NotHermitianSymmetric(usize),

    #[error("time step too coarse: |H| * dt = {product:.3e} exceeds {limit}")]
    StepTooCoarse { product: f64, limit: f64 },

    #[error("eigen-track {0} is degenerate")]
    DegenerateTrack(usize),

    #[error("eigen-track {0} has vanishing overlap with its initial left vector")]
    ZeroOverlap(usize),

    #[error("track index {0} out of range")]
    TrackOutOfRange(usize),

    #[error("generator has a single eigenvalue cluster; no admissible pair")]
    AllDegenerate,

    #[error("grid is empty")]
    EmptyGrid,

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidModel {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Short machine-readable code for structured error reporting.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::NonFinite => "non_finite",
            Error::Singular => "singular",
            Error::NonDiagonalizable(_) => "non_diagonalizable",
            Error::NoConvergence(_) => "no_convergence",
            Error::NotAState(_) => "not_a_state",
            Error::BadLength(_) => "bad_length",
            Error::InvalidModel { .. } => "invalid_model",
            Error::Precondition(_) => "precondition",
            Error::DependentBasis(_) => "dependent_basis",
            Error::NotHermitianSymmetric(_) => "not_hermitian_symmetric",
            Error::StepTooCoarse { .. } => "step_too_coarse",
            Error::DegenerateTrack(_) => "degenerate_track",
            Error::ZeroOverlap(_) => "zero_overlap",
            Error::TrackOutOfRange(_) => "track_out_of_range",
            Error::AllDegenerate => "all_degenerate",
            Error::EmptyGrid => "empty_grid",
            Error::Json(_) => "json",
            Error::Io(_) => "io",
        }
    }

    /// The offending input field, when one is known.
    pub fn field(&self) -> Option<&str> {
        match self {
            Error::InvalidModel { field, .. } => Some(field),
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
