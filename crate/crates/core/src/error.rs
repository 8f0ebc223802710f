//! Error type shared across the crate.

/// Errors surfaced by field evaluation and construction.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// A pipeline asked for more derivative orders than a jet carries.
    #[error("derivative order {needed} requested but only {available} available")]
    OrderExceeded { needed: usize, available: usize },

    /// A field is degenerate (singular matrix, vanishing denominator, ...)
    /// at a sample point.
    #[error("degenerate field: {what} at point ({p0}, {p1}, {p2}, {p3})")]
    Degenerate { what: String, p0: f64, p1: f64, p2: f64, p3: f64 },

    /// Scalar-domain failure without point context.
    #[error("numeric domain error: {0}")]
    NumericDomain(String),

    /// Value shapes of two objects cannot be combined.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Differential-form degree out of range for the operation.
    #[error("form degree {degree} invalid: {what}")]
    Degree { degree: usize, what: &'static str },

    /// A group-element constructor received data off the group.
    #[error("invalid group element: {0}")]
    Group(String),

    /// Expression parse failure.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn degenerate(what: impl Into<String>, p: &[f64; 4]) -> Self {
        Error::Degenerate { what: what.into(), p0: p[0], p1: p[1], p2: p[2], p3: p[3] }
    }

    /// Attach point context to a pointless numeric error.
    pub fn at_point(self, what: &str, p: &[f64; 4]) -> Self {
        match self {
            Error::NumericDomain(msg) => Error::degenerate(format!("{what}: {msg}"), p),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
