use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("form degree {degree} out of range for this operation on T^{dimension}")]
    DegreeOutOfRange { degree: usize, dimension: usize },

    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid theory: {0}")]
    InvalidTheory(String),

    #[error("theory variant mismatch: {0}")]
    VariantMismatch(String),

    #[error("mass squared {mass2} coincides with a retained Laplacian eigenvalue")]
    MasslessMode { mass2: f64 },

    #[error("smearing has a harmonic component of size {norm:e} in a Gaussian-only computation")]
    MasslessSector { norm: f64 },

    #[error("quadratic form is not positive on the retained modes: {0}")]
    NotPositive(String),

    #[error("enumeration guard exceeded: {half_edges} half-edges (limit {limit})")]
    TooLarge { half_edges: u32, limit: u32 },

    #[error("quadrature did not converge: estimated error {estimate:e}")]
    QuadratureFail { estimate: f64 },

    #[error("not implemented: {0}")]
    NotImplemented(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DegreeOutOfRange { .. } => "DEGREE_OUT_OF_RANGE",
            Error::DegreeMismatch { .. } => "DEGREE_MISMATCH",
            Error::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
            Error::InvalidTheory(_) => "INVALID_THEORY",
            Error::VariantMismatch(_) => "VARIANT_MISMATCH",
            Error::MasslessMode { .. } => "MASSLESS_MODE",
            Error::MasslessSector { .. } => "MASSLESS_SECTOR",
            Error::NotPositive(_) => "NOT_POSITIVE",
            Error::TooLarge { .. } => "TOO_LARGE",
            Error::QuadratureFail { .. } => "QUADRATURE_FAIL",
            Error::NotImplemented(_) => "NOT_IMPLEMENTED",
            Error::Invalid(_) => "INVALID",
        }
    }

    /// True for failures of numerical guards (enumeration size, quadrature).
    pub fn is_numerical_guard(&self) -> bool {
        matches!(self, Error::TooLarge { .. } | Error::QuadratureFail { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
