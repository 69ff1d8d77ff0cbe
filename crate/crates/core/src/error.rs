use alloc::string::String;

/// Failure modes shared by every solver in the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter violates the precondition of the operation it was passed to.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Point evaluation outside the domain on which a potential is defined.
    #[error("x = {x} is outside the domain of {shape} ({reason})")]
    Domain {
        shape: &'static str,
        x: f64,
        reason: &'static str,
    },

    /// A root finder could not locate a sign change or stalled inside its bracket.
    #[error("root finder failed in [{lo}, {hi}] (residual {residual:e}): {reason}")]
    RootFinder {
        lo: f64,
        hi: f64,
        residual: f64,
        reason: &'static str,
    },

    /// The grid domain is too short for the highest requested level.
    #[error("grid domain [{x_min}, {x_max}] too small for level {level}: boundary decay {decay:.2} < {required:.2}")]
    DomainTooSmall {
        x_min: f64,
        x_max: f64,
        level: usize,
        decay: f64,
        required: f64,
    },

    /// Grid refinement hit its point budget before the levels settled.
    #[error("grid refinement did not converge: relative change {change:e} at {points} points (limit {limit})")]
    Accuracy {
        change: f64,
        points: usize,
        limit: usize,
    },

    /// The spectrum does not carry enough levels for the thermal tail bound.
    #[error("spectrum truncated: {available} levels available, about {needed} needed at T = {temperature:e}")]
    Truncation {
        available: usize,
        needed: usize,
        temperature: f64,
    },

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error("quadrature did not reach tolerance: estimate {estimate:e}, error {error:e} after {intervals} intervals")]
    Quadrature {
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    /// No evaluated point satisfies the optimizer's feasibility constraint.
    #[error("no feasible point: {reason}")]
    Infeasible { reason: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by caller input rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::InvalidParameter { .. } | Error::Domain { .. })
    }
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, alloc::format!("must be finite and > 0, got {value}")))
    }
}

pub(crate) fn require_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, alloc::format!("must be finite, got {value}")))
    }
}
