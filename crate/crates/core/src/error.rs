use thiserror::Error;

/// Structural and configuration errors raised by the library.
///
/// Search failures are not errors: a search that finds nothing returns `None`
/// or an explicit outcome variant.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("variable index {var} out of range for {n} variables")]
    VarOutOfRange { var: usize, n: usize },

    #[error("assignment length {found} does not match expected length {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("clause {clause} has width {found}, expected {expected}")]
    WidthMismatch {
        clause: usize,
        expected: usize,
        found: usize,
    },

    #[error("DIMACS line {line}: {msg}")]
    Dimacs { line: usize, msg: String },

    #[error("radius {radius} exceeds variable count {n}")]
    RadiusTooLarge { radius: usize, n: usize },

    #[error("{n} variables exceeds the exhaustive enumeration bound of {bound}")]
    OverBound { n: usize, bound: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
