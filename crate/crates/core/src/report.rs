//! Verification reports shared by the series-level and numerical checks.

use std::cmp::Ordering;
use std::fmt;

use rug::Rational;
use serde::{Serialize, Serializer};

/// Size of a deviation: an exact rational or a float magnitude.
#[derive(Clone, Debug, PartialEq)]
pub enum Deviation {
    Exact(Rational),
    Float(f64),
}

impl Deviation {
    pub fn zero_exact() -> Self {
        Deviation::Exact(Rational::new())
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self, Deviation::Exact(q) if q.cmp0() == Ordering::Equal)
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Deviation::Exact(q) => q.to_f64(),
            Deviation::Float(x) => *x,
        }
    }

    /// The larger of two deviations; mixed kinds compare as floats.
    pub fn max(self, other: Deviation) -> Deviation {
        match (&self, &other) {
            (Deviation::Exact(a), Deviation::Exact(b)) => {
                if b > a {
                    other
                } else {
                    self
                }
            }
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                // NaN propagates as a failing deviation.
                if b.is_nan() || b > a {
                    Deviation::Float(b)
                } else {
                    Deviation::Float(a)
                }
            }
        }
    }

    /// `true` when the deviation is within `tol`; exact deviations pass only
    /// when they are exactly zero or `tol` is positive and they fit under it.
    pub fn within(&self, tol: f64) -> bool {
        match self {
            Deviation::Exact(q) => {
                if q.cmp0() == Ordering::Equal {
                    true
                } else {
                    tol > 0.0 && q.to_f64() <= tol
                }
            }
            Deviation::Float(x) => x.is_finite() && *x <= tol,
        }
    }
}

impl fmt::Display for Deviation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Deviation::Exact(q) => write!(f, "{q}"),
            Deviation::Float(x) => write!(f, "{x:e}"),
        }
    }
}

impl Serialize for Deviation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Deviation::Exact(q) => s.serialize_str(&q.to_string()),
            Deviation::Float(x) if x.is_finite() => s.serialize_f64(*x),
            Deviation::Float(x) => s.serialize_str(&x.to_string()),
        }
    }
}

/// Whether the data a check depends on is itself valid (for example, a
/// spec whose nodes actually solve the residue system).
#[derive(Clone, Debug, Serialize)]
pub struct Precondition {
    pub description: String,
    pub value: f64,
    pub tolerance: f64,
    pub ok: bool,
}

/// Outcome of one identity check.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub identity: String,
    /// Exclusive `t`-exponent bound of the compared coefficients, when the
    /// check is a series identity.
    pub trunc: Option<i64>,
    pub mode: String,
    pub max_abs_deviation: Deviation,
    pub tolerance: f64,
    pub pass: bool,
    pub checked_coefficients: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precondition: Option<Precondition>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(
        identity: impl Into<String>,
        mode: impl Into<String>,
        deviation: Deviation,
        tolerance: f64,
        checked: usize,
    ) -> Self {
        let pass = deviation.within(tolerance);
        Self {
            identity: identity.into(),
            trunc: None,
            mode: mode.into(),
            max_abs_deviation: deviation,
            tolerance,
            pass,
            checked_coefficients: checked,
            precondition: None,
            notes: Vec::new(),
        }
    }

    pub fn with_trunc(mut self, trunc: i64) -> Self {
        self.trunc = Some(trunc);
        self
    }

    pub fn with_precondition(mut self, pre: Precondition) -> Self {
        self.pass &= pre.ok;
        self.precondition = Some(pre);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}
