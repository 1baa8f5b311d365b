use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A single broken invariant of a parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NotFinite { key: &'static str, value: f64 },
    GovernmentResources { g: f64, l: f64, gbar: f64 },
    InterventionZeroPoint { a: f64, gbar: f64 },
    DamageNotBelowCap { l: f64, gbar: f64 },
    DamageNotPositive { l: f64 },
    Phi { phi: f64 },
    Cost { c: f64 },
    Role { key: &'static str, reason: String },
}

impl Violation {
    /// Config key the violation is attributed to.
    pub fn key(&self) -> &'static str {
        match self {
            Violation::NotFinite { key, .. } => key,
            Violation::GovernmentResources { .. } => "g",
            Violation::InterventionZeroPoint { .. } => "a",
            Violation::DamageNotBelowCap { .. } | Violation::DamageNotPositive { .. } => "l",
            Violation::Phi { .. } => "phi",
            Violation::Cost { .. } => "c",
            Violation::Role { key, .. } => key,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotFinite { key, value } => write!(f, "{key} must be finite, got {value}"),
            Violation::GovernmentResources { g, l, gbar } => {
                write!(f, "g = {g} must lie strictly inside (l, gbar) = ({l}, {gbar})")
            }
            Violation::InterventionZeroPoint { a, gbar } => {
                write!(f, "a = {a} must exceed gbar = {gbar}")
            }
            Violation::DamageNotBelowCap { l, gbar } => {
                write!(f, "l = {l} must be below gbar = {gbar}")
            }
            Violation::DamageNotPositive { l } => write!(f, "l = {l} must be positive"),
            Violation::Phi { phi } => write!(f, "phi = {phi} must lie in [0, 1]"),
            Violation::Cost { c } => write!(f, "c = {c} must be positive"),
            Violation::Role { key, reason } => write!(f, "{key}: {reason}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter `{name}` = {value} out of domain: {reason}")]
    ParameterDomain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("derivative undefined at x = {x} (clamp point or knot)")]
    DerivativeUndefined { x: f64 },

    #[error("monotonicity violated at x = {x}: {reason}")]
    MonotonicityViolation { x: f64, reason: &'static str },

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("invalid parameters: {}", join(.0))]
    Validation(Vec<Violation>),

    #[error("phi_bar undefined: 1 - W(gbar) = {0} is not positive")]
    DivisionDomain(f64),

    #[error("g_hat requires phi_bar < phi < 1, got phi = {phi}, phi_bar = {phi_bar}")]
    ThresholdDomain { phi: f64, phi_bar: f64 },

    #[error("tolerance gap does not change sign on (l, gbar): D(l) = {d_lo}, D(gbar) = {d_hi}")]
    Bracketing { d_lo: f64, d_hi: f64 },

    #[error("bisection did not converge: residual {residual} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },

    #[error("regime classification unsupported: {0}")]
    ClassificationUnsupported(String),

    #[error("sampling unsupported: {0}")]
    SamplingUnsupported(&'static str),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
