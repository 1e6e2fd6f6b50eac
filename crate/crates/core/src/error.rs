use alloc::string::String;
use core::fmt;

/// Errors shared across the design engine.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside its mathematical domain.
    Domain(&'static str),
    /// A specification failed validation; the message names the offending field.
    InvalidSpec(String),
    /// A bracketed root-finder could not isolate a solution.
    RootFind(&'static str),
    /// The quadrature refinement loop could not reach the probability tolerance.
    GridResolution,
    /// The requested design admits no valid boundaries (e.g. futility crossing efficacy).
    Infeasible(&'static str),
    /// The futility fixed-point iteration hit its cap without converging.
    FixedPointDiverged,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(what) => write!(f, "domain error: {what}"),
            Error::InvalidSpec(msg) => write!(f, "invalid specification: {msg}"),
            Error::RootFind(what) => write!(f, "root finding failed: {what}"),
            Error::GridResolution => {
                write!(f, "quadrature grid refinement failed to reach tolerance")
            }
            Error::Infeasible(what) => write!(f, "infeasible design: {what}"),
            Error::FixedPointDiverged => {
                write!(f, "futility fixed-point iteration did not converge")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
