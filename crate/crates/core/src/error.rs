//! Errors shared by evaluation, semantics, and checking.

use crate::semantics::State;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    #[error("type mismatch: {0}")]
    TypeMismatch(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("modulo by zero")]
    ModuloByZero,

    /// The program can make no legal step: a branch probability evaluated
    /// outside [0, 1], a guard was not boolean, or evaluation itself failed.
    #[error("stuck program at state {state}: {cause}")]
    Stuck { state: Box<State>, cause: String },

    #[error("exploration budget must be positive")]
    BudgetNotPositive,

    #[error("reward value {value} at state {state} lies outside [0, 1]")]
    RewardOutOfRange { state: String, value: String },

    #[error("policy table has no entry for demonic state {state}")]
    PolicyGap { state: Box<State> },

    #[error("trial {trial} exceeded the step cap of {cap}")]
    TrialStepCapExceeded { trial: u64, cap: u64 },

    #[error("box bound evaluated to {value}, outside [0, 1]")]
    BoundOutOfRange { value: String },

    /// A nested box inside a reward embedding came back inconclusive, so the
    /// reward has no exact value at this final state.
    #[error("embedded formula is inconclusive at final state {state}: {cause}")]
    InnerUnknown { state: String, cause: String },

    #[error("validity check needs at least one valuation")]
    EmptyEnvSet,

    #[error("empty interval: lower bound {lo} exceeds upper bound {hi}")]
    EmptyInterval { lo: String, hi: String },

    #[error("{0}")]
    DomainViolation(String),
}
