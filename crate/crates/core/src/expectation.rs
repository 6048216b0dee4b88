//! Minimal expected values over all policies, exact policy values, and
//! Monte Carlo estimation.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, RandBigInt};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::semantics::{successors, ActionChoice, ActionLabel, State};

/// Default exploration budget, counted in successor expansions.
pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// A total reward function on states with values in [0, 1], evaluated at
/// final states. The range is checked at every evaluation.
#[derive(Clone)]
pub struct RewardFn {
    f: Arc<dyn Fn(&State) -> Result<BigRational, Error> + Send + Sync>,
}

impl RewardFn {
    /// Wrap an arbitrary reward. The wrapped function must stay within
    /// [0, 1]; evaluation reports any violation.
    pub fn from_fn(
        f: impl Fn(&State) -> Result<BigRational, Error> + Send + Sync + 'static,
    ) -> RewardFn {
        RewardFn { f: Arc::new(f) }
    }

    /// The constant reward. Panics if `value` lies outside [0, 1].
    pub fn constant(value: BigRational) -> RewardFn {
        assert!(
            !value.is_negative() && value <= BigRational::one(),
            "constant reward {value} outside [0, 1]"
        );
        RewardFn::from_fn(move |_| Ok(value.clone()))
    }

    pub fn eval(&self, state: &State) -> Result<BigRational, Error> {
        let v = (self.f)(state)?;
        if v.is_negative() || v > BigRational::one() {
            return Err(Error::RewardOutOfRange {
                state: state.to_string(),
                value: v.to_string(),
            });
        }
        Ok(v)
    }
}

impl fmt::Debug for RewardFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("RewardFn(..)")
    }
}

/// Sound enclosure of an expected value.
///
/// `exact` holds exactly when no state's value had to be bracketed, in which
/// case `lo == hi` is the expectation itself. `steps_used` counts successor
/// expansions; `truncated_states` counts the bracketing events (cycles and
/// budget exhaustion).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bounds {
    pub lo: BigRational,
    pub hi: BigRational,
    pub exact: bool,
    pub steps_used: u64,
    pub truncated_states: u64,
}

impl fmt::Display for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exact {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

/// How demonic states are resolved when a single policy's value is wanted.
#[derive(Debug, Clone)]
pub enum Policy {
    AlwaysLeft,
    AlwaysRight,
    /// The policy that flips a fair coin at every demonic state. Exact
    /// evaluation averages the two actions; sampling flips per visit, driven
    /// by this seed.
    UniformRandom { seed: u64 },
    /// Explicit table from demonic states to the action to take. A missing
    /// entry is an error.
    ByTable(HashMap<State, ActionLabel>),
}

enum Combine<'a> {
    /// Minimize over actions: the demonic infimum.
    Min,
    /// Follow one policy.
    Follow(&'a Policy),
}

struct Engine<'a> {
    reward: &'a RewardFn,
    combine: Combine<'a>,
    budget_left: u64,
    steps_used: u64,
    truncated: u64,
    memo: HashMap<State, (BigRational, BigRational)>,
    on_stack: HashSet<State>,
}

impl<'a> Engine<'a> {
    fn new(reward: &'a RewardFn, combine: Combine<'a>, budget: u64) -> Engine<'a> {
        Engine {
            reward,
            combine,
            budget_left: budget,
            steps_used: 0,
            truncated: 0,
            memo: HashMap::new(),
            on_stack: HashSet::new(),
        }
    }

    /// Recursive Bellman evaluation with memoization.
    ///
    /// When a state recurs on the evaluation stack or the budget is gone, its
    /// contribution is bracketed by [0, 1]. Bracketing is sound in both
    /// directions: rewards lie in [0, 1], lower bounds propagate through
    /// weighted sums and minima monotonically (replacing a subvalue by 0 can
    /// only shrink the result, so `lo` under-approximates every policy's
    /// value), and replacing a subvalue by 1 can only grow the result, so
    /// `hi` over-approximates the infimum achieved by the policies that the
    /// remaining exact structure forces.
    fn value(&mut self, state: &State) -> Result<(BigRational, BigRational), Error> {
        if state.is_final() {
            let v = self.reward.eval(state)?;
            return Ok((v.clone(), v));
        }
        if let Some(cached) = self.memo.get(state) {
            return Ok(cached.clone());
        }
        if self.on_stack.contains(state) || self.budget_left == 0 {
            self.truncated += 1;
            return Ok((BigRational::zero(), BigRational::one()));
        }
        self.budget_left -= 1;
        self.steps_used += 1;
        let actions = successors(state)?;
        self.on_stack.insert(state.clone());
        let result = self.combine_actions(state, &actions);
        self.on_stack.remove(state);
        let bounds = result?;
        self.memo.insert(state.clone(), bounds.clone());
        Ok(bounds)
    }

    fn action_value(&mut self, action: &ActionChoice) -> Result<(BigRational, BigRational), Error> {
        let mut lo = BigRational::zero();
        let mut hi = BigRational::zero();
        for (p, next) in &action.transitions {
            let (nlo, nhi) = self.value(next)?;
            lo += p * nlo;
            hi += p * nhi;
        }
        Ok((lo, hi))
    }

    fn combine_actions(
        &mut self,
        state: &State,
        actions: &[ActionChoice],
    ) -> Result<(BigRational, BigRational), Error> {
        debug_assert!(!actions.is_empty(), "non-final state offers no actions");
        match &self.combine {
            Combine::Min => {
                let mut best: Option<(BigRational, BigRational)> = None;
                for action in actions {
                    let (lo, hi) = self.action_value(action)?;
                    best = Some(match best {
                        None => (lo, hi),
                        Some((blo, bhi)) => (blo.min(lo), bhi.min(hi)),
                    });
                }
                Ok(best.expect("at least one action"))
            }
            Combine::Follow(policy) => match policy {
                _ if actions.len() == 1 => self.action_value(&actions[0]),
                Policy::AlwaysLeft => self.action_value(pick(actions, ActionLabel::Left)),
                Policy::AlwaysRight => self.action_value(pick(actions, ActionLabel::Right)),
                Policy::UniformRandom { .. } => {
                    let mut lo = BigRational::zero();
                    let mut hi = BigRational::zero();
                    let half = BigRational::new(BigInt::one(), BigInt::from(2));
                    for action in actions {
                        let (alo, ahi) = self.action_value(action)?;
                        lo += &half * alo;
                        hi += &half * ahi;
                    }
                    Ok((lo, hi))
                }
                Policy::ByTable(table) => {
                    let label = table.get(state).copied().ok_or_else(|| Error::PolicyGap {
                        state: Box::new(state.clone()),
                    })?;
                    self.action_value(pick(actions, label))
                }
            },
        }
    }

    fn bounds_for(mut self, start: &State) -> Result<Bounds, Error> {
        let (lo, hi) = self.value(start)?;
        Ok(Bounds {
            lo,
            hi,
            exact: self.truncated == 0,
            steps_used: self.steps_used,
            truncated_states: self.truncated,
        })
    }
}

fn pick(actions: &[ActionChoice], label: ActionLabel) -> &ActionChoice {
    actions
        .iter()
        .find(|a| a.label == label)
        .expect("demonic states offer both left and right")
}

/// The minimal expected value of `reward` over all policies, from `start`.
///
/// Identical states are merged, so probabilistically branching programs cost
/// states, not paths. Cycles and budget exhaustion yield a sound interval
/// with `exact == false` instead of diverging.
pub fn min_expectation(start: &State, reward: &RewardFn, budget: u64) -> Result<Bounds, Error> {
    if budget == 0 {
        return Err(Error::BudgetNotPositive);
    }
    Engine::new(reward, Combine::Min, budget).bounds_for(start)
}

/// The expected value of `reward` under one fixed policy.
pub fn expected_value_under_policy(
    start: &State,
    reward: &RewardFn,
    policy: &Policy,
    budget: u64,
) -> Result<Bounds, Error> {
    if budget == 0 {
        return Err(Error::BudgetNotPositive);
    }
    Engine::new(reward, Combine::Follow(policy), budget).bounds_for(start)
}

/// A Monte Carlo estimate of the expected reward under a policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarlo {
    pub estimate: f64,
    pub stderr: f64,
    pub trials: u64,
}

/// Estimate the expected reward by sampling `trials` runs under `policy`.
///
/// Each trial derives its own random stream from `seed` and the trial index,
/// so results do not depend on execution order. Probabilistic branches are
/// resolved by their exact rational probability. Every sampled run must
/// reach a final state within `step_cap` steps.
pub fn monte_carlo(
    start: &State,
    reward: &RewardFn,
    policy: &Policy,
    trials: u64,
    seed: u64,
    step_cap: u64,
) -> Result<MonteCarlo, Error> {
    if trials == 0 {
        return Err(Error::DomainViolation(
            "monte carlo needs at least one trial".to_string(),
        ));
    }
    let mut sum = BigRational::zero();
    let mut sum_sq = BigRational::zero();
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        let mut policy_rng = match policy {
            Policy::UniformRandom { seed } => Some(trial_rng(*seed, trial)),
            _ => None,
        };
        let mut state = start.clone();
        let mut steps = 0u64;
        while !state.is_final() {
            if steps >= step_cap {
                return Err(Error::TrialStepCapExceeded {
                    trial,
                    cap: step_cap,
                });
            }
            steps += 1;
            let actions = successors(&state)?;
            let action = if actions.len() == 1 {
                &actions[0]
            } else {
                match policy {
                    Policy::AlwaysLeft => pick(&actions, ActionLabel::Left),
                    Policy::AlwaysRight => pick(&actions, ActionLabel::Right),
                    Policy::UniformRandom { .. } => {
                        let flip = policy_rng
                            .as_mut()
                            .expect("uniform policy carries an rng")
                            .gen_bool(0.5);
                        pick(
                            &actions,
                            if flip {
                                ActionLabel::Left
                            } else {
                                ActionLabel::Right
                            },
                        )
                    }
                    Policy::ByTable(table) => {
                        let label =
                            table.get(&state).copied().ok_or_else(|| Error::PolicyGap {
                                state: Box::new(state.clone()),
                            })?;
                        pick(&actions, label)
                    }
                }
            };
            state = sample_transition(&action.transitions, &mut rng);
        }
        let r = reward.eval(&state)?;
        sum += &r;
        sum_sq += &r * &r;
    }
    let n = BigRational::from_integer(BigInt::from(trials));
    let mean = &sum / &n;
    let estimate = mean.to_f64().unwrap_or(f64::NAN);
    let stderr = if trials < 2 {
        0.0
    } else {
        // Sample variance of the mean: (sum_sq - n * mean^2) / (n - 1) / n,
        // computed exactly before the final conversion.
        let num = &sum_sq - &n * &mean * &mean;
        let denom = (&n - BigRational::one()) * &n;
        let var = &num / &denom;
        if var.is_negative() {
            0.0
        } else {
            var.to_f64().unwrap_or(f64::NAN).sqrt()
        }
    };
    Ok(MonteCarlo {
        estimate,
        stderr,
        trials,
    })
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Draw one successor according to an exact rational distribution.
fn sample_transition(transitions: &[(BigRational, State)], rng: &mut ChaCha8Rng) -> State {
    if transitions.len() == 1 {
        return transitions[0].1.clone();
    }
    // Scale all probabilities to a common denominator and draw an integer
    // uniformly below it; the draw is exact, no floating point involved.
    let mut denom = BigInt::one();
    for (p, _) in transitions {
        denom = num_integer::lcm(denom, p.denom().clone());
    }
    let draw = rng.gen_bigint_range(&BigInt::zero(), &denom);
    let mut acc = BigInt::zero();
    for (p, state) in transitions {
        acc += p.numer() * (&denom / p.denom());
        if draw < acc {
            return state.clone();
        }
    }
    // Probabilities sum to one, so the loop always returns.
    unreachable!("distribution sums to 1")
}
