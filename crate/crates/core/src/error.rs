//! Error type shared by every module of the toolkit.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::Lower => f.write_str("lower"),
            Side::Upper => f.write_str("upper"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{quantity} = {value:e} violates the {side} bound {limit:e}")]
    OutOfRange {
        quantity: &'static str,
        value: f64,
        side: Side,
        limit: f64,
    },

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("neuron never fires: drive {drive:e} A does not exceed leak {leak:e} A")]
    NeverFires { drive: f64, leak: f64 },

    #[error("leak dominated: membrane increment per pulse is {delta_v:e} V")]
    LeakDominated { delta_v: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("schedule event {index} overlaps: starts at {start:e} s before the previous event ends at {previous_end:e} s")]
    OverlappingEvents {
        index: usize,
        start: f64,
        previous_end: f64,
    },

    #[error("unknown device `{name}` (available: {available})")]
    UnknownDevice { name: String, available: String },

    #[error("{}", match .line { Some(l) => format!("parse error at line {l}: {msg}"), None => format!("parse error: {msg}") })]
    Parse { line: Option<usize>, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn parse(line: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// A quantity that may be unbounded, e.g. the SDF cap with no neuron leak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Limit {
    Finite(f64),
    Unbounded,
}

impl Limit {
    pub fn finite(self) -> Option<f64> {
        match self {
            Limit::Finite(v) => Some(v),
            Limit::Unbounded => None,
        }
    }

    /// True when `value` lies strictly above this limit.
    pub fn is_exceeded_by(self, value: f64) -> bool {
        match self {
            Limit::Finite(cap) => value > cap,
            Limit::Unbounded => false,
        }
    }
}

impl std::fmt::Display for Limit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Limit::Finite(v) => write!(f, "{v:e}"),
            Limit::Unbounded => f.write_str("unbounded"),
        }
    }
}

pub(crate) fn ensure_finite(value: f64, what: &'static str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite(what))
    }
}
