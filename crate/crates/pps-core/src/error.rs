use core::fmt;

/// Errors reported by generators, transforms and estimators.
///
/// `ParameterDomain` names the contract a caller violated; `DegenerateInput`
/// marks inputs that are structurally valid but carry too little data for the
/// requested operation (an empty stream has no rate).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoreError {
    ParameterDomain { what: &'static str },
    DegenerateInput { what: &'static str },
    InvalidStream { violations: usize },
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::ParameterDomain { what } => write!(f, "parameter domain violation: {what}"),
            CoreError::DegenerateInput { what } => write!(f, "degenerate input: {what}"),
            CoreError::InvalidStream { violations } => {
                write!(f, "event stream violates {violations} invariant(s)")
            }
        }
    }
}

impl core::error::Error for CoreError {}
