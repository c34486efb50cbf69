use serde::Serialize;
use thiserror::Error;

/// Errors raised by the closed-form operations and the oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the mathematical domain of the operation.
    #[error("{name} = {value} is outside the valid domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    /// An approximation is used outside its regime of validity.
    #[error("regime violation: {0}")]
    Regime(String),
    /// The correlation coefficient reached the prolongation bound.
    #[error("r = {r} is at or above the prolongation bound r_bound = {r_bound}")]
    Bound { r: f64, r_bound: f64 },
    /// A matching condition hits a pole.
    #[error("resonance: {0}")]
    Resonance(String),
    /// A closed form saturates (overflow/underflow guard).
    #[error("saturation: {0}")]
    Saturation(String),
    /// A numeric oracle failed its self-consistency test.
    #[error("convergence failure: {0}")]
    Convergence(String),
    /// The requested check does not apply to the given input.
    #[error("not applicable: {0}")]
    Inapplicable(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// A value together with non-fatal regime warnings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Warned<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

impl<T> Warned<T> {
    pub fn clean(value: T) -> Self {
        Self {
            value,
            warnings: Vec::new(),
        }
    }

    pub fn with(value: T, warnings: Vec<String>) -> Self {
        Self { value, warnings }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Warned<U> {
        Warned {
            value: f(self.value),
            warnings: self.warnings,
        }
    }
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            expected: "finite and > 0",
        })
    }
}

pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            expected: "finite",
        })
    }
}
