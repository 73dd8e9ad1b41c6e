use alloc::string::String;
use core::fmt;

/// Errors surfaced by path, functional, and solver operations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument falls outside the operation's domain (time out of range,
    /// reversed interval, coordinate or letter out of bounds, mismatched
    /// horizons or dimensions).
    Domain(String),
    /// A declared contract was violated: a derivative word outside the
    /// functional's smoothness class, or a numeric derivative requested at a
    /// depth that requires analytic derivatives.
    Contract(String),
    /// The SDE solver produced a nonfinite state.
    Blowup { step: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Contract(msg) => write!(f, "contract error: {msg}"),
            Error::Blowup { step } => {
                write!(f, "numerical blowup: nonfinite state at step {step}")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! domain_err {
    ($($arg:tt)*) => {
        $crate::Error::Domain(alloc::format!($($arg)*))
    };
}

macro_rules! contract_err {
    ($($arg:tt)*) => {
        $crate::Error::Contract(alloc::format!($($arg)*))
    };
}

pub(crate) use contract_err;
pub(crate) use domain_err;
