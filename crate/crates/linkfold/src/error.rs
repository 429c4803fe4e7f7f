use std::fmt;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Input violates a precondition (wrong size, non-simple, bad orientation, ...).
    InvalidInput(String),
    /// Triangle inequality violated (within the degeneracy slack).
    DegenerateTriangle,
    /// Length vector fails condition (c1): some length >= sum of the others.
    InfeasibleLengths,
    /// An iterative solver exhausted its budget.
    ConvergenceFailure(String),
    /// Constraint gradient vanished; the projected direction is undefined.
    SingularConstraint,
    /// A strain-energy denominator fell below the contact threshold.
    NearContact,
    /// Malformed parameters (e.g. bump function with a >= b).
    InvalidParams(String),
    /// Step-size underflow: the integrator could not accept any step.
    Stalled { time: f64 },
    /// The refolding search exhausted its iteration budget without a
    /// connecting geodesic.
    NoConnectionFound { iterations: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::DegenerateTriangle => write!(f, "degenerate triangle"),
            Error::InfeasibleLengths => {
                write!(f, "infeasible lengths: condition (c1) violated")
            }
            Error::ConvergenceFailure(msg) => write!(f, "convergence failure: {msg}"),
            Error::SingularConstraint => write!(f, "singular constraint gradient"),
            Error::NearContact => write!(f, "configuration at the self-contact boundary"),
            Error::InvalidParams(msg) => write!(f, "invalid parameters: {msg}"),
            Error::Stalled { time } => write!(f, "integrator stalled at t = {time}"),
            Error::NoConnectionFound { iterations } => {
                write!(f, "no connecting geodesic found after {iterations} iterations")
            }
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
