use std::fmt;

use thiserror::Error;

use crate::system::Solution;

/// A single step could not be completed.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError {
    /// A stage produced NaN or infinite values. The caller should retry with
    /// a smaller step.
    #[error("non-finite value in stage {stage} of step starting at t = {t}")]
    NonFinite { t: f64, stage: usize, rhs_evals: u64 },
}

impl StepError {
    /// Right-hand side evaluations spent before the failure.
    pub fn rhs_evals(&self) -> u64 {
        match *self {
            StepError::NonFinite { rhs_evals, .. } => rhs_evals,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrateError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("step size {h:e} fell below the minimum {h_min:e} at t = {t}")]
    StepUnderflow { t: f64, h: f64, h_min: f64 },
    #[error("iteration cap of {0} steps reached")]
    MaxSteps(u64),
    #[error(transparent)]
    Step(#[from] StepError),
}

/// An integration that stopped early. `partial` holds the state and
/// statistics reached before the abort.
#[derive(Debug, Clone)]
pub struct Aborted<S> {
    pub error: IntegrateError,
    pub partial: Solution<S>,
}

impl<S> Aborted<S> {
    pub(crate) fn new(error: IntegrateError, partial: Solution<S>) -> Self {
        Aborted { error, partial }
    }
}

impl<S> fmt::Display for Aborted<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "integration aborted at t = {}: {}", self.partial.t, self.error)
    }
}

impl<S: fmt::Debug> std::error::Error for Aborted<S> {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}
