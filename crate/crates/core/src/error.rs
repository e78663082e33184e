use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Errors produced by the samplers, estimators, bounds and diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside the domain where the quantity is defined.
    Domain { what: &'static str, value: f64, constraint: &'static str },
    /// A callback or intermediate value became non-finite.
    Numerical(NumericalFailure),
    /// A numerical failure while producing Monte Carlo sample `index`.
    Sample { index: u64, failure: NumericalFailure },
    /// Not enough usable data for a statistical fit or test.
    InsufficientData(String),
    /// Degenerate distribution (zero variance) where a spread is required.
    Degenerate(&'static str),
    /// Invalid combination of options.
    Config(String),
}

/// Where and why a sample path produced a non-finite value.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericalFailure {
    pub source: FailureSource,
    pub value: f64,
    pub state: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureSource {
    InitialDatum,
    Forcing,
    PathLength,
}

impl fmt::Display for FailureSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailureSource::InitialDatum => f.write_str("initial datum"),
            FailureSource::Forcing => f.write_str("forcing term"),
            FailureSource::PathLength => f.write_str("path length"),
        }
    }
}

impl fmt::Display for NumericalFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} evaluated to {} at state {:?}", self.source, self.value, self.state)
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, value, constraint } => {
                write!(f, "{what} = {value} violates {constraint}")
            }
            Error::Numerical(e) => write!(f, "numerical failure: {e}"),
            Error::Sample { index, failure } => {
                write!(f, "numerical failure in sample {index}: {failure}")
            }
            Error::InsufficientData(msg) => write!(f, "insufficient data: {msg}"),
            Error::Degenerate(msg) => write!(f, "degenerate distribution: {msg}"),
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64, constraint: &'static str) -> Self {
        Error::Domain { what, value, constraint }
    }

    /// True for failures caused by the numerics of a run rather than by its configuration.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_) | Error::Sample { .. })
    }
}

pub type Result<T> = core::result::Result<T, Error>;
