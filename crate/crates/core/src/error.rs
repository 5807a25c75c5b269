use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Input outside the domain of a function (non-finite, out of range).
    Domain { what: &'static str, value: f64 },
    /// A design parameter violates its invariant.
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    /// Adaptive quadrature ran out of subdivisions before reaching tolerance.
    Convergence { estimate: f64, error_estimate: f64 },
    /// The root bracket does not contain a sign change.
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    /// Bracket expansion gave up before the target was exceeded.
    BracketExhausted { last_hi: f64, last_value: f64, target: f64 },
    /// A power target at or above the attainable ceiling.
    Infeasible { target: f64, ceiling: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, value } => write!(f, "{what}: argument {value} outside domain"),
            Error::InvalidParameter {
                name,
                value,
                reason,
            } => write!(f, "invalid parameter {name} = {value}: {reason}"),
            Error::Convergence {
                estimate,
                error_estimate,
            } => write!(
                f,
                "quadrature did not converge (estimate {estimate}, error estimate {error_estimate})"
            ),
            Error::NoSignChange { lo, hi, f_lo, f_hi } => write!(
                f,
                "no sign change on [{lo}, {hi}] (f = {f_lo}, {f_hi})"
            ),
            Error::BracketExhausted {
                last_hi,
                last_value,
                target,
            } => write!(
                f,
                "bracket expansion exhausted at {last_hi} (value {last_value}, target {target})"
            ),
            Error::Infeasible { target, ceiling } => write!(
                f,
                "target {target} not attainable, ceiling is {ceiling}"
            ),
        }
    }
}

impl core::error::Error for Error {}

impl Error {
    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Convergence { .. } | Error::NoSignChange { .. } | Error::BracketExhausted { .. }
        )
    }
}
