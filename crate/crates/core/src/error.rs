use thiserror::Error;

use crate::quantum_state::BellState;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A value violated its domain. `kind` names the quantity class
    /// ("probability", "visibility", ...), `name` the offending field.
    #[error("{name} = {value}: {kind} out of range [{lo}, {hi}]")]
    OutOfRange {
        name: String,
        kind: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("readout model is only defined for a {expected} target, got {got}")]
    UnsupportedState { expected: BellState, got: BellState },

    #[error(
        "closed-form ionization S is exact only for p_d >= {threshold:.6} at this visibility \
         (p_d = {p_d}); evaluate the four correlators instead"
    )]
    OutsideValidity { p_d: f64, threshold: f64 },

    #[error("{0} events cannot be split equally across the four settings")]
    Allocation(u64),

    #[error("no violation possible: S = {s:.6} <= 2")]
    NoViolation { s: f64 },

    #[error("correlator of an empty setting (N_s = 0)")]
    EmptyCounts,

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn out_of_range(
        name: impl Into<String>,
        kind: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    ) -> Self {
        Error::OutOfRange {
            name: name.into(),
            kind,
            value,
            lo,
            hi,
        }
    }
}

/// Checks that `value` is a finite probability.
pub(crate) fn check_probability(name: &str, value: f64) -> Result<f64> {
    check_range(name, "probability", value, 0.0, 1.0)
}

pub(crate) fn check_range(
    name: &str,
    kind: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(value)
    } else {
        Err(Error::out_of_range(name, kind, value, lo, hi))
    }
}

pub(crate) fn check_non_negative(name: &str, kind: &'static str, value: f64) -> Result<f64> {
    check_range(name, kind, value, 0.0, f64::INFINITY)
}
