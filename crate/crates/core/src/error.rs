use std::fmt;

/// Errors raised by lattice construction, coding and shaping operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// The generator matrix is singular.
    DegenerateLattice,
    /// Two objects that must share a dimension do not.
    DimensionMismatch { expected: usize, found: usize },
    /// A matrix that must be square is not.
    NotSquare { rows: usize, cols: usize },
    /// The shaping lattice is not contained in the coding lattice.
    NotNested(String),
    /// A vector is not a codeword of the named code.
    NotACodeword,
    /// A vector is not a point of the constellation.
    NotAConstellationPoint(String),
    /// A message does not fit the code/shaping parameters.
    InvalidMessage(String),
    /// Field size is not a prime.
    NotPrime(u64),
    /// Enumeration or search size exceeds the supported bound.
    BoundExceeded(String),
    /// Unknown standard lattice or method name.
    UnknownName(String),
    /// Malformed text input.
    Parse { line: usize, msg: String },
    /// Bad parameter value.
    InvalidParameter(String),
    /// Two independent computations of the same quantity disagree.
    Internal(String),
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DegenerateLattice => write!(f, "degenerate lattice"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NotSquare { rows, cols } => write!(f, "matrix is {rows}x{cols}, expected square"),
            Error::NotNested(msg) => write!(f, "lattices are not nested: {msg}"),
            Error::NotACodeword => write!(f, "not a codeword"),
            Error::NotAConstellationPoint(msg) => write!(f, "not a constellation point: {msg}"),
            Error::InvalidMessage(msg) => write!(f, "invalid message: {msg}"),
            Error::NotPrime(q) => write!(f, "field size {q} is not prime"),
            Error::BoundExceeded(msg) => write!(f, "bound exceeded: {msg}"),
            Error::UnknownName(name) => write!(f, "unknown name '{name}'"),
            Error::Parse { line, msg } => write!(f, "parse error at line {line}: {msg}"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::Internal(msg) => write!(f, "internal invariant violated: {msg}"),
            Error::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
