//! Exact model checking of probabilistic dynamic logic (pDL) formulas against
//! probabilistic guarded-command (pGCL) programs.
//!
//! A program denotes a Markov decision process whose states pair a variable
//! valuation with the statement left to run. Demonic choice contributes the
//! nondeterministic actions; probabilistic choice contributes the transition
//! distributions. The checker decides `p`-box formulas by computing the
//! minimal expected value of an embedded reward over all policies, using
//! exact rational arithmetic throughout, and reports a three-valued verdict
//! so that loops which exhaust the exploration budget degrade to sound
//! intervals instead of wrong answers.

pub mod error;
pub mod eval;
pub mod expectation;
pub mod laws;
pub mod logic;
pub mod semantics;
pub mod syntax;

pub use error::Error;
pub use eval::{eval_expr, substitute, Valuation, Value};
pub use expectation::{
    expected_value_under_policy, min_expectation, monte_carlo, Bounds, MonteCarlo, Policy,
    RewardFn, DEFAULT_BUDGET,
};
pub use laws::{conj_bound, disj_bound, pchoice_bound, policy_value_interval, truncate};
pub use logic::{
    check_pbox, check_pbox_with_bounds, check_valid, embed_reward, satisfies, ValidityReport,
    Verdict,
};
pub use semantics::{explore, successors, ActionChoice, ActionLabel, MdpGraph, State};
pub use syntax::{
    parse_formula, parse_formula_with_loader, parse_program, parse_valuation, BinOp, Expr,
    Formula, ParseError, ProgramLoader, Stmt, UnOp,
};

use num_bigint::BigInt;
use num_rational::BigRational;

/// Shorthand for building an exact rational. Panics on a zero denominator.
pub fn ratio(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}
