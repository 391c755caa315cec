use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("d must be a positive integer, got {0}")]
    InvalidD(i64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("operands belong to different fields (disc {0} vs {1})")]
    MixedFields(i64, i64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("an ideal needs at least one nonzero generator")]
    ZeroIdeal,
    #[error("discriminant {0} is not negative")]
    NonNegativeDiscriminant(i64),
    #[error("discriminant {0} is not fundamental")]
    NonFundamentalDiscriminant(i64),
    #[error("form ({0}, {1}, {2}) is not primitive")]
    ImprimitiveForm(i64, i64, i64),
    #[error("form ({0}, {1}, {2}) is not positive definite")]
    IndefiniteForm(i64, i64, i64),
    #[error("discriminant mismatch: {0} vs {1}")]
    DiscriminantMismatch(i64, i64),
    #[error("q must be at least 2, got {0}")]
    InvalidTorsionExponent(u64),
    #[error("class ({0}, {1}, {2}) is not {3}-torsion")]
    NotTorsion(i64, i64, i64, u64),
    #[error("the zero vector does not span a line")]
    ZeroVector,
    #[error("vector is not isotropic for h0")]
    NotIsotropic,
    #[error("{0}")]
    InvalidLevel(String),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors that signal a bug in this crate rather than bad input.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
