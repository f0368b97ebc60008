use thiserror::Error;

use crate::cone::Convention;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point is not in the cone: {0}")]
    NotInCone(String),

    /// Schur complement is zero up to rounding.
    #[error("point lies on the cone boundary (schur complement {schur:e})")]
    Boundary { schur: f64 },

    #[error("principal branch violated at minor {minor} (continuous argument {argument:.6})")]
    BranchCut { minor: usize, argument: f64 },

    #[error("index convention mismatch: expected {expected:?}, got {got:?}")]
    Convention { expected: Convention, got: Convention },

    #[error("convergence domain violated: {}", .violations.join("; "))]
    ConvergenceDomain { violations: Vec<String> },

    #[error("quadrature did not converge: estimated error {achieved:e}, requested {requested:e}")]
    Accuracy { achieved: f64, requested: f64 },

    #[error("monte carlo estimate rejected: {non_finite} of {samples} samples were not finite")]
    NonFinite { non_finite: u64, samples: u64 },

    #[error("infeasible constraint system: {}", .binding.join("; "))]
    Infeasible { binding: Vec<String> },

    #[error("witness construction failed: {0}")]
    Construction(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn domain(violations: Vec<String>) -> Self {
        Error::ConvergenceDomain { violations }
    }
}

/// Collects named strict inequalities and fails with every violated one.
#[derive(Debug, Default)]
pub(crate) struct RangeCheck {
    violations: Vec<String>,
}

impl RangeCheck {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    /// Requires `value > bound`.
    pub(crate) fn gt(&mut self, name: &str, value: f64, bound: f64) -> &mut Self {
        if !(value > bound) {
            self.violations.push(format!("{name} = {value} must exceed {bound}"));
        }
        self
    }

    pub(crate) fn finish(&mut self) -> Result<()> {
        if self.violations.is_empty() {
            Ok(())
        } else {
            Err(Error::domain(std::mem::take(&mut self.violations)))
        }
    }
}
