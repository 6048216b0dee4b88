//! Three-valued satisfaction checking for formulas over program states.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::Error;
use crate::eval::{eval_expr, substitute, Valuation};
use crate::expectation::{min_expectation, Bounds, RewardFn};
use crate::semantics::State;
use crate::syntax::{Expr, Formula, Stmt};

/// Outcome of checking a formula in one environment.
///
/// `Unknown` arises only from box formulas whose minimal success probability
/// could not be pinned down exactly (unbounded loops, exhausted budget); it
/// carries the sound interval that was computed and a human-readable cause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Satisfied,
    Violated,
    Unknown { bounds: Bounds, cause: String },
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Satisfied => f.write_str("satisfied"),
            Verdict::Violated => f.write_str("violated"),
            Verdict::Unknown { .. } => f.write_str("unknown"),
        }
    }
}

/// Check a formula in `env`.
///
/// Connectives follow three-valued logic: a violated conjunct decides a
/// conjunction even when the other side is unknown, and negation swaps
/// satisfied with violated while leaving unknown alone. Quantifiers expand
/// their finite domain by substitution. Box formulas compare the bound
/// against the minimal expected success probability of their body over all
/// policies; `budget` caps each such expectation computation separately.
pub fn satisfies(env: &Valuation, formula: &Formula, budget: u64) -> Result<Verdict, Error> {
    match formula {
        Formula::Atom(e) => match eval_expr(env, e)?.as_bool() {
            Some(true) => Ok(Verdict::Satisfied),
            Some(false) => Ok(Verdict::Violated),
            None => Err(Error::TypeMismatch(format!(
                "formula atom `{e}` is not boolean"
            ))),
        },
        Formula::Not(inner) => Ok(match satisfies(env, inner, budget)? {
            Verdict::Satisfied => Verdict::Violated,
            Verdict::Violated => Verdict::Satisfied,
            unknown => unknown,
        }),
        Formula::And(left, right) => {
            match satisfies(env, left, budget)? {
                Verdict::Violated => Ok(Verdict::Violated),
                Verdict::Satisfied => satisfies(env, right, budget),
                unknown => match satisfies(env, right, budget)? {
                    Verdict::Violated => Ok(Verdict::Violated),
                    _ => Ok(unknown),
                },
            }
        }
        Formula::Forall { var, domain, body } => {
            let mut undecided = None;
            for value in domain {
                let instance = substitute(body, var, value);
                match satisfies(env, &instance, budget)? {
                    Verdict::Violated => return Ok(Verdict::Violated),
                    Verdict::Satisfied => {}
                    unknown => {
                        if undecided.is_none() {
                            undecided = Some(unknown);
                        }
                    }
                }
            }
            Ok(undecided.unwrap_or(Verdict::Satisfied))
        }
        Formula::PBox {
            program,
            bound,
            body,
        } => {
            let value = eval_expr(env, bound)?;
            let p = value.as_rational().ok_or_else(|| {
                Error::TypeMismatch(format!("probability bound `{bound}` is not numeric"))
            })?;
            if p.is_negative() || p > BigRational::one() {
                return Err(Error::BoundOutOfRange {
                    value: p.to_string(),
                });
            }
            check_pbox(env, program, &p, body, budget)
        }
    }
}

/// Check one box formula whose bound has already been evaluated.
///
/// The environment is first restricted to the variables the program or the
/// body can observe, so unrelated bindings never split states. Variables the
/// program may read before assigning, and variables free in the body that
/// the program does not assign on every path, must be bound in `env`.
pub fn check_pbox(
    env: &Valuation,
    program: &Stmt,
    bound: &BigRational,
    body: &Formula,
    budget: u64,
) -> Result<Verdict, Error> {
    Ok(check_pbox_with_bounds(env, program, bound, body, budget)?.0)
}

/// Like `check_pbox`, but also hands back the computed expectation bounds,
/// for callers that report numbers and not just the verdict.
pub fn check_pbox_with_bounds(
    env: &Valuation,
    program: &Stmt,
    bound: &BigRational,
    body: &Formula,
    budget: u64,
) -> Result<(Verdict, Bounds), Error> {
    let body_free = free_variables(body);
    let usage = scan(program);
    for var in usage.maybe_read.iter().chain(body_free.difference(&usage.surely_assigned)) {
        if !env.contains(var) {
            return Err(Error::UnboundVariable(var.clone()));
        }
    }
    let mut relevant = program.variables();
    relevant.extend(body_free);
    let start = State::new(env.restricted_to(&relevant), program.clone());
    let reward = embed_reward(body.clone(), budget);
    let bounds = min_expectation(&start, &reward, budget)?;
    let verdict = if *bound <= bounds.lo {
        Verdict::Satisfied
    } else if *bound > bounds.hi {
        Verdict::Violated
    } else {
        let cause = format!(
            "minimal success probability only bracketed to [{}, {}] after truncating {} state(s); bound {} falls inside",
            bounds.lo, bounds.hi, bounds.truncated_states, bound
        );
        Verdict::Unknown {
            bounds: bounds.clone(),
            cause,
        }
    };
    Ok((verdict, bounds))
}

/// Turn a formula into the reward that pays 1 where it is satisfied and 0
/// where it is violated. A state where the formula is unknown has no
/// defensible reward, so evaluation reports it as an error.
pub fn embed_reward(formula: Formula, budget: u64) -> RewardFn {
    RewardFn::from_fn(move |state: &State| match satisfies(&state.env, &formula, budget)? {
        Verdict::Satisfied => Ok(BigRational::one()),
        Verdict::Violated => Ok(BigRational::zero()),
        Verdict::Unknown { cause, .. } => Err(Error::InnerUnknown {
            state: state.to_string(),
            cause,
        }),
    })
}

/// Result of checking a formula across a set of environments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidityReport {
    pub verdict: Verdict,
    /// The environment that violated the formula, or the first one that was
    /// undecided. Absent when every environment satisfies it.
    pub witness: Option<Valuation>,
}

/// Check a formula in every given environment. Violation anywhere wins and
/// names its witness; otherwise one undecided environment makes the whole
/// report undecided.
pub fn check_valid(
    formula: &Formula,
    envs: &[Valuation],
    budget: u64,
) -> Result<ValidityReport, Error> {
    if envs.is_empty() {
        return Err(Error::EmptyEnvSet);
    }
    let mut undecided = None;
    for env in envs {
        match satisfies(env, formula, budget)? {
            Verdict::Violated => {
                return Ok(ValidityReport {
                    verdict: Verdict::Violated,
                    witness: Some(env.clone()),
                })
            }
            Verdict::Satisfied => {}
            unknown => {
                if undecided.is_none() {
                    undecided = Some((unknown, env.clone()));
                }
            }
        }
    }
    Ok(match undecided {
        Some((verdict, env)) => ValidityReport {
            verdict,
            witness: Some(env),
        },
        None => ValidityReport {
            verdict: Verdict::Satisfied,
            witness: None,
        },
    })
}

/// Variables whose current binding a formula can observe.
///
/// A box formula observes its bound, whatever its program may read before
/// writing, and whatever its body observes that the program does not assign
/// on every terminating path.
fn free_variables(formula: &Formula) -> BTreeSet<String> {
    match formula {
        Formula::Atom(e) => e.variables(),
        Formula::Not(inner) => free_variables(inner),
        Formula::And(left, right) => {
            let mut out = free_variables(left);
            out.extend(free_variables(right));
            out
        }
        Formula::Forall { var, body, .. } => {
            let mut out = free_variables(body);
            out.remove(var);
            out
        }
        Formula::PBox {
            program,
            bound,
            body,
        } => {
            let usage = scan(program);
            let mut out = bound.variables();
            out.extend(usage.maybe_read.iter().cloned());
            for var in free_variables(body) {
                if !usage.surely_assigned.contains(&var) {
                    out.insert(var);
                }
            }
            out
        }
    }
}

/// Conservative def-before-use summary of a program.
struct Usage {
    /// Variables some execution may read before assigning them.
    maybe_read: BTreeSet<String>,
    /// Variables every terminating execution assigns.
    surely_assigned: BTreeSet<String>,
}

fn scan(stmt: &Stmt) -> Usage {
    match stmt {
        Stmt::Skip => Usage {
            maybe_read: BTreeSet::new(),
            surely_assigned: BTreeSet::new(),
        },
        Stmt::Assign { var, expr } => Usage {
            maybe_read: expr.variables(),
            surely_assigned: [var.clone()].into(),
        },
        Stmt::Seq(first, rest) => {
            let a = scan(first);
            let b = scan(rest);
            let mut maybe_read = a.maybe_read;
            for var in b.maybe_read {
                if !a.surely_assigned.contains(&var) {
                    maybe_read.insert(var);
                }
            }
            let mut surely_assigned = a.surely_assigned;
            surely_assigned.extend(b.surely_assigned);
            Usage {
                maybe_read,
                surely_assigned,
            }
        }
        Stmt::Demonic(left, right) => branch_usage(None, left, right),
        Stmt::ProbChoice { prob, left, right } => branch_usage(Some(prob), left, right),
        Stmt::If {
            guard,
            then_branch,
            else_branch,
        } => branch_usage(Some(guard), then_branch, else_branch),
        Stmt::While { guard, body } => {
            let inner = scan(body);
            let mut maybe_read = guard.variables();
            maybe_read.extend(inner.maybe_read);
            // The loop may run zero times, so nothing is surely assigned.
            Usage {
                maybe_read,
                surely_assigned: BTreeSet::new(),
            }
        }
    }
}

fn branch_usage(cond: Option<&Expr>, left: &Stmt, right: &Stmt) -> Usage {
    let a = scan(left);
    let b = scan(right);
    let mut maybe_read = cond.map(Expr::variables).unwrap_or_default();
    maybe_read.extend(a.maybe_read);
    maybe_read.extend(b.maybe_read);
    Usage {
        maybe_read,
        surely_assigned: a
            .surely_assigned
            .intersection(&b.surely_assigned)
            .cloned()
            .collect(),
    }
}
