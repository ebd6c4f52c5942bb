use core::fmt;

/// Failure modes shared by every numeric routine in the crate.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Matrix dimension outside `1..=MAX_DIM`.
    InvalidDimension(usize),
    /// Entry count does not match the declared dimension, or operands disagree.
    DimensionMismatch { expected: usize, found: usize },
    NonFinite,
    NotHermitian,
    /// An iterative kernel exhausted its sweep or iteration budget.
    NoConvergence,
    Singular,
    NotPositiveDefinite,
    /// Two support-sampled regions or measures live on different grids.
    GridMismatch,
    NearPole,
    PoleOnSpectrum,
    ZeroFunction,
    /// The numerical range is not inside the working region (with the required margin).
    RegionViolation,
    NotContraction,
    BadCurve(&'static str),
    TooCloseToBoundary,
    ContourThroughSpectrum,
    OverlapError,
    /// A produced object failed one of its own structural checks.
    InvariantViolation(&'static str),
    InvalidArgument(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidDimension(d) => write!(f, "invalid matrix dimension {d}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NonFinite => f.write_str("non-finite entry"),
            Error::NotHermitian => f.write_str("matrix is not Hermitian"),
            Error::NoConvergence => f.write_str("iteration did not converge"),
            Error::Singular => f.write_str("matrix is numerically singular"),
            Error::NotPositiveDefinite => f.write_str("matrix is not positive definite"),
            Error::GridMismatch => f.write_str("operands are sampled on different grids"),
            Error::NearPole => f.write_str("evaluation point too close to a pole"),
            Error::PoleOnSpectrum => f.write_str("pole too close to the numerical range"),
            Error::ZeroFunction => f.write_str("function vanishes on the sampled boundary"),
            Error::RegionViolation => f.write_str("numerical range not contained in the region"),
            Error::NotContraction => f.write_str("operator is not a contraction"),
            Error::BadCurve(why) => write!(f, "invalid boundary curve: {why}"),
            Error::TooCloseToBoundary => f.write_str("point too close to the boundary"),
            Error::ContourThroughSpectrum => f.write_str("contour passes through the spectrum"),
            Error::OverlapError => f.write_str("contours overlap"),
            Error::InvariantViolation(what) => write!(f, "invariant violated: {what}"),
            Error::InvalidArgument(what) => write!(f, "invalid argument: {what}"),
        }
    }
}

impl core::error::Error for Error {}
