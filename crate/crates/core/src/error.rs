use core::fmt;

/// Errors raised by model construction and trellis computations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A stochastic matrix row or probability vector is off by more than the
    /// validation tolerance.
    RowSum { row: usize, sum: f64 },
    /// The transition matrix is not irreducible.
    Reducible,
    /// Mismatched dimensions between model components or sequences.
    Dimension { expected: usize, found: usize },
    /// A scalar parameter is outside its admissible range.
    Range { name: &'static str, value: f64 },
    /// The observation sequence has probability zero under the model.
    ZeroProbability { step: usize },
    /// An output length outside the feasible band for the given block length.
    Length { len: usize, min: usize, max: usize },
    /// An enumeration or convolution would exceed the size guard.
    TooLarge { terms: u64, limit: u64 },
    /// The stationarity linear system is singular.
    SingularSystem,
    /// Invalid run configuration (alphabet mismatch, empty grid, ...).
    Config(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::RowSum { row, sum } => {
                write!(f, "row {row} sums to {sum}, expected 1")
            }
            Error::Reducible => write!(f, "transition matrix is not irreducible"),
            Error::Dimension { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::Range { name, value } => write!(f, "parameter {name} = {value} out of range"),
            Error::ZeroProbability { step } => {
                write!(f, "observation has probability zero at step {step}")
            }
            Error::Length { len, min, max } => {
                write!(f, "output length {len} outside feasible band [{min}, {max}]")
            }
            Error::TooLarge { terms, limit } => {
                write!(f, "enumeration of {terms} terms exceeds guard of {limit}")
            }
            Error::SingularSystem => write!(f, "stationarity system is singular"),
            Error::Config(msg) => write!(f, "invalid configuration: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
