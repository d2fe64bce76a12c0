use thiserror::Error;

/// Errors raised by measure construction, sampling and counting.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NodalError {
    #[error("weights sum to {0}, expected 1")]
    NotProbability(f64),
    #[error("atom ({0}, {1}) lies outside the closed unit disc")]
    SupportOutsideDisc(f64, f64),
    #[error("atom ({0}, {1}) has no antipodal partner of equal weight")]
    NotPiInvariant(f64, f64),
    #[error("measure is not supported on the unit circle")]
    NotOnCircle,
    #[error("empty atom list")]
    EmptyMeasure,
    #[error("invalid atom: {0}")]
    InvalidAtom(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("invalid preset parameter: {0}")]
    InvalidPresetParam(String),
    #[error("grid has no nodes")]
    EmptyGrid,
    #[error("grids are defined over different domains or spacings")]
    DomainMismatch,
    #[error("conditioning variance {0} is below the degeneracy threshold")]
    DegenerateConditioning(f64),
    #[error("measure is degenerate (smallest gradient eigenvalue {0})")]
    DegenerateMeasure(f64),
    #[error("{0} is not a sum of two squares")]
    NotSumOfTwoSquares(u64),
    #[error("{0} exceeds the enumeration cap")]
    TooLarge(u64),
    #[error("R schedule needs at least 3 increasing values")]
    ScheduleTooShort,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed measure file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, NodalError>;
