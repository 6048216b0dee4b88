//! Combinators for bounds that provably transfer between formulas: the
//! probability a conjunction, disjunction, or probabilistic composition
//! inherits from its parts, reward truncation, and the two-sided interval a
//! fixed policy's success probability must lie in.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::Error;
use crate::eval::eval_expr;
use crate::expectation::RewardFn;
use crate::logic::embed_reward;
use crate::semantics::State;
use crate::syntax::{Expr, Formula};

fn require_unit(name: &str, value: &BigRational) -> Result<(), Error> {
    if value.is_negative() || *value > BigRational::one() {
        return Err(Error::DomainViolation(format!(
            "{name} = {value} lies outside [0, 1]"
        )));
    }
    Ok(())
}

/// Bound guaranteed for a conjunction when its conjuncts hold with
/// probability at least `p1` and `p2`: max(p1 + p2 - 1, 0).
pub fn conj_bound(p1: &BigRational, p2: &BigRational) -> Result<BigRational, Error> {
    require_unit("p1", p1)?;
    require_unit("p2", p2)?;
    let sum = p1 + p2 - BigRational::one();
    Ok(if sum.is_negative() {
        BigRational::zero()
    } else {
        sum
    })
}

/// Bound guaranteed for a disjunction: min(p1, p2).
pub fn disj_bound(p1: &BigRational, p2: &BigRational) -> Result<BigRational, Error> {
    require_unit("p1", p1)?;
    require_unit("p2", p2)?;
    Ok(p1.min(p2).clone())
}

/// Bound guaranteed after a probabilistic choice taken with probability
/// `e_val`: the convex combination of the branch bounds.
pub fn pchoice_bound(
    e_val: &BigRational,
    p1: &BigRational,
    p2: &BigRational,
) -> Result<BigRational, Error> {
    require_unit("e_val", e_val)?;
    require_unit("p1", p1)?;
    require_unit("p2", p2)?;
    Ok(e_val * p1 + (BigRational::one() - e_val) * p2)
}

/// Truncate the expectation `p` by `phi`: the reward that pays `p`'s value
/// where `phi` is satisfied and 0 where it is violated.
///
/// `p` must evaluate to a rational in [0, 1] at every queried state; `phi`
/// must decide at every queried state (an undecided body surfaces as an
/// error from the embedded reward).
pub fn truncate(p: Expr, phi: Formula, budget: u64) -> RewardFn {
    let embedded = embed_reward(phi, budget);
    RewardFn::from_fn(move |state: &State| {
        let value = eval_expr(&state.env, &p)?;
        let weight = value.as_rational().ok_or_else(|| {
            Error::TypeMismatch(format!("expectation `{p}` is not numeric"))
        })?;
        if weight.is_negative() || weight > BigRational::one() {
            return Err(Error::RewardOutOfRange {
                state: state.to_string(),
                value: weight.to_string(),
            });
        }
        Ok(weight * embedded.eval(state)?)
    })
}

/// The interval every fixed policy's success probability for a property must
/// lie in, given lower bounds on the minimal probability of the property and
/// of its negation: [lo_phi, 1 - lo_not_phi].
///
/// Inconsistent inputs (an empty interval) are reported as an error.
pub fn policy_value_interval(
    lo_phi: &BigRational,
    lo_not_phi: &BigRational,
) -> Result<(BigRational, BigRational), Error> {
    require_unit("lo_phi", lo_phi)?;
    require_unit("lo_not_phi", lo_not_phi)?;
    let hi = BigRational::one() - lo_not_phi;
    if *lo_phi > hi {
        return Err(Error::EmptyInterval {
            lo: lo_phi.to_string(),
            hi: hi.to_string(),
        });
    }
    Ok((lo_phi.clone(), hi))
}
