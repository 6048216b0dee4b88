//! Reusable law checks over fuzzed programs.
//!
//! Each function draws `count` random instances from a seeded fuzzer and
//! panics with full context on the first counterexample. The laws are stated
//! against exact expectations wherever the semantics is exact; only the two
//! `simulation_*` checks are statistical, and those count failures against an
//! explicit pass-rate floor instead of failing on a single unlucky seed.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use pdlcheck_core::{
    check_pbox, check_valid, embed_reward, expected_value_under_policy, min_expectation,
    monte_carlo, parse_program, pchoice_bound, policy_value_interval, ratio, satisfies, truncate,
    Bounds, Expr, Formula, Policy, RewardFn, State, Stmt, Valuation, Value, Verdict,
    DEFAULT_BUDGET,
};

use super::{collect_demonic_states, Fuzzer};

fn exact_lo(bounds: &Bounds, what: &str) -> BigRational {
    assert!(
        bounds.exact,
        "{what}: expected an exact value, got {bounds}"
    );
    bounds.lo.clone()
}

/// Exact minimal probability that `formula` holds on termination of
/// `program` from `env`.
fn exact_min(env: &Valuation, program: &Stmt, formula: &Formula, what: &str) -> BigRational {
    let start = State::new(env.clone(), program.clone());
    let bounds = min_expectation(&start, &embed_reward(formula.clone(), DEFAULT_BUDGET), DEFAULT_BUDGET)
        .unwrap_or_else(|e| panic!("{what}: expectation failed on {start}: {e}"));
    exact_lo(&bounds, what)
}

fn pbox_verdict(env: &Valuation, program: &Stmt, bound: &BigRational, body: &Formula) -> Verdict {
    check_pbox(env, program, bound, body, DEFAULT_BUDGET)
        .unwrap_or_else(|e| panic!("box check failed on {program} with bound {bound}: {e}"))
}

fn assert_satisfied(v: &Verdict, ctx: impl Fn() -> String) {
    assert!(matches!(v, Verdict::Satisfied), "{}: got {v}", ctx());
}

fn assert_violated(v: &Verdict, ctx: impl Fn() -> String) {
    assert!(matches!(v, Verdict::Violated), "{}: got {v}", ctx());
}

fn bound_expr(p: &BigRational) -> Expr {
    Expr::Const(Value::rational(p.clone()))
}

// ---------------------------------------------------------------------------
// Monotonicity of the bound
// ---------------------------------------------------------------------------

/// A box with bound zero holds for every program and body, even when the
/// engine can only bracket the probability.
pub fn zero_bound_always_satisfied(seed: u64, count: usize) {
    let mut fz = Fuzzer::new(seed);
    let zero = BigRational::zero();
    for i in 0..count {
        let env = fz.env();
        let prog = fz.program();
        let phi = Formula::atom(fz.comparison_expr());
        for budget in [DEFAULT_BUDGET, 1] {
            let v = check_pbox(&env, &prog, &zero, &phi, budget)
                .unwrap_or_else(|e| panic!("case {i}: check failed on {prog}: {e}"));
            assert_satisfied(&v, || format!("case {i} (budget {budget}): [{prog}]_0 on {env}"));
        }
    }
}

/// If a bound is met, every smaller bound is met too.
pub fn lowering_a_satisfied_bound_stays_satisfied(seed: u64, count: usize) {
    let mut fz = Fuzzer::new(seed);
    for i in 0..count {
        let env = fz.env();
        let prog = fz.program();
        let phi = Formula::atom(fz.comparison_expr());
        let value = exact_min(&env, &prog, &phi, "exact probability");
        for k in 0..=4i64 {
            let lower = &value * ratio(k, 4);
            let v = pbox_verdict(&env, &prog, &lower, &phi);
            assert_satisfied(&v, || {
                format!("case {i}: [{prog}]_{lower} {phi} on {env} (exact value {value})")
            });
        }
    }
}

/// A bound met by a conjunction is met by each conjunct alone.
pub fn conjunction_bound_transfers_to_conjuncts(seed: u64, count: usize) {
    let mut fz = Fuzzer::new(seed);
    for i in 0..count {
        let env = fz.env();
        let prog = fz.program();
        let phi1 = fz.state_formula();
        let phi2 = fz.state_formula();
        let both = Formula::and(phi1.clone(), phi2.clone());
        let p = exact_min(&env, &prog, &both, "conjunction probability");
        for (side, phi) in [("left", &phi1), ("right", &phi2)] {
            let v = pbox_verdict(&env, &prog, &p, phi);
            assert_satisfied(&v, || {
                format!("case {i} ({side} conjunct): [{prog}]_{p} {phi} on {env}")
            });
        }
    }
}

/// Weakening the body to anything it implies preserves the bound.
pub fn bound_survives_weakening_to_implied_formula(seed: u64, count: usize) {
    let mut fz = Fuzzer::new(seed);
    for i in 0..count {
        let env = fz.env();
        let prog = fz.program();
        let phi1 = fz.state_formula();
        let weaker = Formula::or(phi1.clone(), fz.state_formula());
        let p = exact_min(&env, &prog, &phi1, "stronger-body probability");
        let v = pbox_verdict(&env, &prog, &p, &weaker);
        assert_satisfied(&v, || {
            format!("case {i}: [{prog}]_{p} {weaker} on {env} (bound from {phi1})")
        });
    }
}

// ---------------------------------------------------------------------------
// Combining bounds across connectives
// ---------------------------------------------------------------------------

/// Two met bounds combine into a met bound on the conjunction:
/// max(p1 + p2 - 1, 0).
pub fn conjunction_inherits_combined_bound(seed: u64, count: usize) {
    let mut fz = Fuzzer::new(seed);
    for i in 0..count {
        let env = fz.env();
        let prog = fz.program();
        let phi1 = fz.state_formula();
        let phi2 = fz.state_formula();
        let p1 = exact_min(&env, &prog, &phi1, "first conjunct");
        let p2 = exact_min(&env, &prog, &phi2, "second conjunct");
        let q = pdlcheck_core::conj_bound(&p1, &p2).unwrap();
        let v = pbox_verdict(&env, &prog, &q, &Formula::and(phi1.clone(), phi2.clone()));
        assert_satisfied(&v, || {
            format!("case {i}: [{prog}]_{q} ({phi1}) && ({phi2}) on {env} from p1={p1}, p2={p2}")
        });
    }
}

/// If either disjunct's box holds, the disjunction's box holds at the
/// smaller of the two bounds.
pub fn disjunction_inherits_minimum_bound(seed: u64, count: usize) {
    let mut fz = Fuzzer::new(seed);
    for i in 0..count {
        let env = fz.env();
        let prog = fz.program();
        let phi1 = fz.state_formula();
        let phi2 = fz.state_formula();
        // Only one premise box is anchored to a bound that actually holds;
        // the other side gets an arbitrary bound, which is the shape of the
        // law: a disjunction of boxes implies the box of the disjunction.
        let anchored_left = fz.coin();
        let (p1, p2) = if anchored_left {
            (exact_min(&env, &prog, &phi1, "anchored disjunct"), fz.probability())
        } else {
            (fz.probability(), exact_min(&env, &prog, &phi2, "anchored disjunct"))
        };
        let q = pdlcheck_core::disj_bound(&p1, &p2).unwrap();
        let v = pbox_verdict(&env, &prog, &q, &Formula::or(phi1.clone(), phi2.clone()));
        assert_satisfied(&v, || {
            format!(
                "case {i}: [{prog}]_{q} ({phi1}) || ({phi2}) on {env} \
                 from p1={p1}, p2={p2}, anchored_left={anchored_left}"
            )
        });
    }
}

// ---------------------------------------------------------------------------
// Quantifier exchange
// ---------------------------------------------------------------------------

/// A box around a universally quantified body implies the universally
/// quantified box.
pub fn universal_quantifier_commutes_out_of_box(seed: u64, count: usize) {
    let mut fz = Fuzzer::new(seed);
    for i in 0..count {
        let env = fz.env();
        let prog = fz.program();
        let domain: Vec<Value> = (0..fz.domain_size()).map(Value::int).collect();
        let body = fz.formula_with_logical("l");
        let quantified = Formula::forall("l", domain.clone(), body.clone());
        let p = exact_min(&env, &prog, &quantified, "quantified-body probability");
        // Premise by construction: the box of the forall holds at its exact
        // probability.
        let premise = Formula::pbox(prog.clone(), bound_expr(&p), quantified);
        let conclusion = Formula::forall(
            "l",
            domain,
            Formula::pbox(prog.clone(), bound_expr(&p), body),
        );
        for (name, f) in [("premise", &premise), ("conclusion", &conclusion)] {
            let v = satisfies(&env, f, DEFAULT_BUDGET)
                .unwrap_or_else(|e| panic!("case {i}: {name} failed on {prog}: {e}"));
            assert_satisfied(&v, || format!("case {i} ({name}): {f} on {env}"));
        }
    }
}

/// An existentially quantified box implies the box of the existentially
/// quantified body.
pub fn existential_quantifier_commutes_into_box(seed: u64, count: usize) {
    let mut fz = Fuzzer::new(seed);
    for i in 0..count {
        let env = fz.env();
        let prog = fz.program();
        let size = fz.domain_size();
        let domain: Vec<Value> = (0..size).map(Value::int).collect();
        let body = fz.formula_with_logical("l");
        // Anchor the premise at one witness value.
        let witness = fz.pick(size);
        let witnessed =
            pdlcheck_core::substitute(&body, "l", &Value::int(witness));
        let p = exact_min(&env, &prog, &witnessed, "witnessed-body probability");
        let premise = Formula::exists(
            "l",
            domain.clone(),
            Formula::pbox(prog.clone(), bound_expr(&p), body.clone()),
        );
        let conclusion = Formula::pbox(
            prog.clone(),
            bound_expr(&p),
            Formula::exists("l", domain, body),
        );
        for (name, f) in [("premise", &premise), ("conclusion", &conclusion)] {
            let v = satisfies(&env, f, DEFAULT_BUDGET)
                .unwrap_or_else(|e| panic!("case {i}: {name} failed on {prog}: {e}"));
            assert_satisfied(&v, || {
                format!("case {i} ({name}, witness {witness}): {f} on {env}")
            });
        }
    }
}

/// The converses of the two quantifier-exchange laws are false; a fair coin
/// refutes both.
pub fn quantifier_exchange_converses_fail() {
    let coin = parse_program("{ x := 0 } [1/2] { x := 1 }").unwrap();
    let env = Valuation::default();
    let eq = |_: ()| {
        Formula::atom(Expr::binary(
            pdlcheck_core::BinOp::Eq,
            Expr::var("x"),
            Expr::var("l"),
        ))
    };
    let domain = vec![Value::int(0), Value::int(1)];
    let half = ratio(1, 2);
    let one = BigRational::one();

    // Every face is hit with probability exactly 1/2 ...
    let each = Formula::forall(
        "l",
        domain.clone(),
        Formula::pbox(coin.clone(), bound_expr(&half), eq(())),
    );
    let v = satisfies(&env, &each, DEFAULT_BUDGET).unwrap();
    assert_satisfied(&v, || format!("per-face bound: {each}"));
    // ... but no single run hits every face.
    let all_at_once = Formula::pbox(
        coin.clone(),
        bound_expr(&half),
        Formula::forall("l", domain.clone(), eq(())),
    );
    let v = satisfies(&env, &all_at_once, DEFAULT_BUDGET).unwrap();
    assert_violated(&v, || format!("conjoined faces: {all_at_once}"));

    // Some face always comes up ...
    let some_face = Formula::pbox(
        coin.clone(),
        bound_expr(&one),
        Formula::exists("l", domain.clone(), eq(())),
    );
    let v = satisfies(&env, &some_face, DEFAULT_BUDGET).unwrap();
    assert_satisfied(&v, || format!("some face: {some_face}"));
    // ... but no particular face is certain.
    let certain_face = Formula::exists(
        "l",
        domain,
        Formula::pbox(coin, bound_expr(&one), eq(())),
    );
    let v = satisfies(&env, &certain_face, DEFAULT_BUDGET).unwrap();
    assert_violated(&v, || format!("a certain face: {certain_face}"));
}

// ---------------------------------------------------------------------------
// Implications as truncated bounds
// ---------------------------------------------------------------------------

/// `phi1 -> [s]_p phi2` holds exactly when the box holds at the bound
/// `truncate(p, phi1)`, which zeroes the requirement wherever `phi1` fails.
pub fn implication_folds_into_truncated_bound(seed: u64, count: usize) {
    let mut fz = Fuzzer::new(seed);
    for i in 0..count {
        let env = fz.env();
        let prog = fz.program();
        let phi1 = fz.state_formula();
        let phi2 = fz.state_formula();
        let p = fz.probability();
        let implication = Formula::implies(
            phi1.clone(),
            Formula::pbox(prog.clone(), bound_expr(&p), phi2.clone()),
        );
        let lhs = satisfies(&env, &implication, DEFAULT_BUDGET)
            .unwrap_or_else(|e| panic!("case {i}: implication failed on {prog}: {e}"));

        let truncated = truncate(bound_expr(&p), phi1.clone(), DEFAULT_BUDGET);
        let effective = truncated
            .eval(&State::new(env.clone(), Stmt::Skip))
            .unwrap_or_else(|e| panic!("case {i}: truncated bound failed: {e}"));
        let rhs = pbox_verdict(&env, &prog, &effective, &phi2);

        assert_eq!(
            std::mem::discriminant(&lhs),
            std::mem::discriminant(&rhs),
            "case {i}: ({phi1}) -> [{prog}]_{p} ({phi2}) on {env}: \
             implication was {lhs}, truncated bound {effective} was {rhs}"
        );
    }
}

/// Checking an implication over an environment set agrees with checking the
/// truncated bound in each environment, and a violation names a real
/// witness.
pub fn validity_over_environment_sets_matches_pointwise(seed: u64, count: usize) {
    let mut fz = Fuzzer::new(seed);
    for i in 0..count {
        let envs: Vec<Valuation> = (0..3).map(|_| fz.env()).collect();
        let prog = fz.program();
        let phi1 = fz.state_formula();
        let phi2 = fz.state_formula();
        let p = fz.probability();
        let formula = Formula::implies(
            phi1.clone(),
            Formula::pbox(prog.clone(), bound_expr(&p), phi2.clone()),
        );
        let report = check_valid(&formula, &envs, DEFAULT_BUDGET)
            .unwrap_or_else(|e| panic!("case {i}: validity check failed on {prog}: {e}"));
        let pointwise: Vec<Verdict> = envs
            .iter()
            .map(|env| satisfies(env, &formula, DEFAULT_BUDGET).unwrap())
            .collect();
        let any_violated = pointwise.iter().any(|v| matches!(v, Verdict::Violated));
        let all_satisfied = pointwise.iter().all(|v| matches!(v, Verdict::Satisfied));
        match &report.verdict {
            Verdict::Violated => {
                assert!(any_violated, "case {i}: spurious violation of {formula}");
                let witness = report.witness.as_ref().expect("violations carry a witness");
                let at_witness = satisfies(witness, &formula, DEFAULT_BUDGET).unwrap();
                assert_violated(&at_witness, || {
                    format!("case {i}: witness {witness} does not violate {formula}")
                });
            }
            Verdict::Satisfied => {
                assert!(all_satisfied, "case {i}: missed violation of {formula}");
                assert!(report.witness.is_none(), "case {i}: witness without failure");
            }
            Verdict::Unknown { .. } => {
                panic!("case {i}: unexpected unknown for loop-free {formula}")
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Program constructs
// ---------------------------------------------------------------------------

/// The value of a probabilistic choice is the probability-weighted mix of
/// its branch values, and the mixed bound is attained.
pub fn probabilistic_choice_mixes_branch_bounds(seed: u64, count: usize) {
    let mut fz = Fuzzer::new(seed);
    for i in 0..count {
        let env = fz.env();
        let s1 = fz.program();
        let s2 = fz.program();
        let e = fz.probability();
        let phi = fz.state_formula();
        let mixed = Stmt::ProbChoice {
            prob: bound_expr(&e),
            left: Box::new(s1.clone()),
            right: Box::new(s2.clone()),
        };
        let v1 = exact_min(&env, &s1, &phi, "left branch");
        let v2 = exact_min(&env, &s2, &phi, "right branch");
        let whole = exact_min(&env, &mixed, &phi, "mixed program");
        let expected = &e * &v1 + (BigRational::one() - &e) * &v2;
        assert_eq!(
            whole, expected,
            "case {i}: value of {mixed} for {phi} on {env}"
        );
        let q = pchoice_bound(&e, &v1, &v2).unwrap();
        let v = pbox_verdict(&env, &mixed, &q, &phi);
        assert_satisfied(&v, || format!("case {i}: [{mixed}]_{q} {phi} on {env}"));
    }
}

/// A demonic choice is worth the worse of its branches: the minimum bound is
/// attained and anything above it fails.
pub fn demonic_choice_requires_both_branches(seed: u64, count: usize) {
    let mut fz = Fuzzer::new(seed);
    let one = BigRational::one();
    for i in 0..count {
        let env = fz.env();
        let s1 = fz.program();
        let s2 = fz.program();
        let phi = fz.state_formula();
        let choice = Stmt::Demonic(Box::new(s1.clone()), Box::new(s2.clone()));
        let v1 = exact_min(&env, &s1, &phi, "left branch");
        let v2 = exact_min(&env, &s2, &phi, "right branch");
        let whole = exact_min(&env, &choice, &phi, "demonic program");
        let expected = v1.clone().min(v2.clone());
        assert_eq!(
            whole, expected,
            "case {i}: value of {choice} for {phi} on {env}"
        );
        let v = pbox_verdict(&env, &choice, &expected, &phi);
        assert_satisfied(&v, || format!("case {i}: [{choice}]_{expected} {phi} on {env}"));
        if expected < one {
            let above = &expected + (&one - &expected) / ratio(2, 1);
            let v = pbox_verdict(&env, &choice, &above, &phi);
            assert_violated(&v, || {
                format!("case {i}: [{choice}]_{above} {phi} on {env} (value {expected})")
            });
        }
    }
}

/// Without an adversary, running `s1; s2` is worth running `s1` into the
/// value of `s2`: the two-stage expectation equals the flat one.
pub fn sequencing_composes_expectations(seed: u64, count: usize) {
    let mut fz = Fuzzer::new(seed);
    for i in 0..count {
        let env = fz.env();
        let s1 = fz.demonic_free_program();
        let s2 = fz.demonic_free_program();
        let phi = fz.state_formula();
        let flat = exact_min(
            &env,
            &Stmt::seq(s1.clone(), s2.clone()),
            &phi,
            "flat sequence",
        );
        let tail = s2.clone();
        let inner_phi = phi.clone();
        let staged_reward = RewardFn::from_fn(move |state: &State| {
            let bounds = min_expectation(
                &State::new(state.env.clone(), tail.clone()),
                &embed_reward(inner_phi.clone(), DEFAULT_BUDGET),
                DEFAULT_BUDGET,
            )?;
            if !bounds.exact {
                return Err(pdlcheck_core::Error::DomainViolation(
                    "inner expectation was not exact".to_string(),
                ));
            }
            Ok(bounds.lo)
        });
        let staged = min_expectation(
            &State::new(env.clone(), s1.clone()),
            &staged_reward,
            DEFAULT_BUDGET,
        )
        .unwrap_or_else(|e| panic!("case {i}: staged expectation failed: {e}"));
        assert!(staged.exact, "case {i}: staged value not exact");
        assert_eq!(
            staged.lo, flat,
            "case {i}: staged vs flat value of ({s1}); ({s2}) for {phi} on {env}"
        );
    }
}

/// The sequencing rule: if `phi1` guarantees `[s2]_c phi2`, then the box of
/// the whole sequence holds at the expected truncated bound.
pub fn sequencing_bound_from_truncated_premise(seed: u64, count: usize) {
    let mut fz = Fuzzer::new(seed);
    for i in 0..count {
        let env = fz.env();
        let s1 = fz.program();
        let s2 = fz.program();
        let phi2 = fz.state_formula();
        let c = fz.probability();
        // The premise formula: exactly the guarantee the rule asks for, so
        // its validity is immediate.
        let phi1 = Formula::pbox(s2.clone(), bound_expr(&c), phi2.clone());
        let truncated = truncate(bound_expr(&c), phi1, DEFAULT_BUDGET);
        let staged = min_expectation(
            &State::new(env.clone(), s1.clone()),
            &truncated,
            DEFAULT_BUDGET,
        )
        .unwrap_or_else(|e| panic!("case {i}: truncated expectation failed: {e}"));
        let bound = staged.lo;
        let v = pbox_verdict(&env, &Stmt::seq(s1.clone(), s2.clone()), &bound, &phi2);
        assert_satisfied(&v, || {
            format!("case {i}: [({s1}); ({s2})]_{bound} {phi2} on {env} (c = {c})")
        });
    }
}

/// A box around `skip` at bound one is just the body.
pub fn skip_box_at_bound_one_is_the_body(seed: u64, count: usize) {
    let mut fz = Fuzzer::new(seed);
    let one = BigRational::one();
    for i in 0..count {
        let env = fz.env();
        let phi = fz.state_formula();
        let direct = satisfies(&env, &phi, DEFAULT_BUDGET).unwrap();
        let boxed = pbox_verdict(&env, &Stmt::Skip, &one, &phi);
        assert_eq!(
            std::mem::discriminant(&direct),
            std::mem::discriminant(&boxed),
            "case {i}: {phi} on {env}: direct {direct}, boxed {boxed}"
        );
    }
}

/// A leading `skip` changes nothing.
pub fn leading_skip_is_transparent(seed: u64, count: usize) {
    let mut fz = Fuzzer::new(seed);
    for i in 0..count {
        let env = fz.env();
        let s = fz.program();
        let phi = fz.state_formula();
        let plain = exact_min(&env, &s, &phi, "plain program");
        let skipped = exact_min(
            &env,
            &Stmt::seq(Stmt::Skip, s.clone()),
            &phi,
            "skip-prefixed program",
        );
        assert_eq!(plain, skipped, "case {i}: skip; ({s}) for {phi} on {env}");
    }
}

/// A leading assignment is the same as starting from the updated
/// environment.
pub fn leading_assignment_updates_the_environment(seed: u64, count: usize) {
    let mut fz = Fuzzer::new(seed);
    for i in 0..count {
        let env = fz.env();
        let s = fz.program();
        let phi = fz.state_formula();
        let (var, expr) = fz.assignment_parts();
        let value = pdlcheck_core::eval_expr(&env, &expr).unwrap();
        let updated = env.with(var.clone(), value);
        let prefixed = exact_min(
            &env,
            &Stmt::seq(Stmt::assign(var.clone(), expr.clone()), s.clone()),
            &phi,
            "assignment-prefixed program",
        );
        let direct = exact_min(&updated, &s, &phi, "updated-environment program");
        assert_eq!(
            prefixed, direct,
            "case {i}: {var} := {expr}; ({s}) for {phi} on {env}"
        );
    }
}

/// A conditional is worth exactly its taken branch.
pub fn conditional_reduces_to_taken_branch(seed: u64, count: usize) {
    let mut fz = Fuzzer::new(seed);
    for i in 0..count {
        let env = fz.env();
        let guard = fz.comparison_expr();
        let s1 = fz.program();
        let s2 = fz.program();
        let phi = fz.state_formula();
        let conditional = Stmt::If {
            guard: guard.clone(),
            then_branch: Box::new(s1.clone()),
            else_branch: Box::new(s2.clone()),
        };
        let taken = if pdlcheck_core::eval_expr(&env, &guard)
            .unwrap()
            .as_bool()
            .unwrap()
        {
            &s1
        } else {
            &s2
        };
        let whole = exact_min(&env, &conditional, &phi, "conditional");
        let branch = exact_min(&env, taken, &phi, "taken branch");
        assert_eq!(whole, branch, "case {i}: {conditional} for {phi} on {env}");
    }
}

/// A loop is worth its one-step unrolling into a conditional.
pub fn loop_unrolls_to_conditional(seed: u64, count: usize) {
    let mut fz = Fuzzer::new(seed);
    for i in 0..count {
        let env = fz.env();
        let phi = fz.state_formula();
        let whole = fz.bounded_loop();
        let Stmt::While { guard, body } = whole.clone() else {
            unreachable!("bounded_loop builds a while statement")
        };
        let unrolled = Stmt::If {
            guard,
            then_branch: Box::new(Stmt::seq((*body).clone(), whole.clone())),
            else_branch: Box::new(Stmt::Skip),
        };
        let looped = exact_min(&env, &whole, &phi, "loop");
        let stepped = exact_min(&env, &unrolled, &phi, "unrolled loop");
        assert_eq!(looped, stepped, "case {i}: {whole} for {phi} on {env}");
    }
}

// ---------------------------------------------------------------------------
// Policies
// ---------------------------------------------------------------------------

/// Every policy's value lies between the worst case for the body and one
/// minus the worst case for its negation.
pub fn policy_value_lies_in_two_sided_interval(seed: u64, count: usize) {
    let mut fz = Fuzzer::new(seed);
    let mut rng = StdRng::seed_from_u64(seed ^ 0x9e3779b97f4a7c15);
    for i in 0..count {
        let env = fz.env();
        let prog = fz.program();
        let phi = fz.state_formula();
        let start = State::new(env.clone(), prog.clone());
        let lo_phi = exact_min(&env, &prog, &phi, "body value");
        let lo_not = exact_min(&env, &prog, &Formula::not(phi.clone()), "negated value");
        let (lo, hi) = policy_value_interval(&lo_phi, &lo_not)
            .unwrap_or_else(|e| panic!("case {i}: interval failed on {prog}: {e}"));

        let mut policies = vec![
            Policy::AlwaysLeft,
            Policy::AlwaysRight,
            Policy::UniformRandom { seed: seed ^ i as u64 },
        ];
        if let Some(demonic) = collect_demonic_states(&start) {
            let table: HashMap<_, _> = demonic
                .into_iter()
                .map(|s| {
                    let label = if rng.gen_bool(0.5) {
                        pdlcheck_core::ActionLabel::Left
                    } else {
                        pdlcheck_core::ActionLabel::Right
                    };
                    (s, label)
                })
                .collect();
            policies.push(Policy::ByTable(table));
        }
        let reward = embed_reward(phi.clone(), DEFAULT_BUDGET);
        for policy in &policies {
            let bounds = expected_value_under_policy(&start, &reward, policy, DEFAULT_BUDGET)
                .unwrap_or_else(|e| panic!("case {i}: policy value failed on {prog}: {e}"));
            let value = exact_lo(&bounds, "policy value");
            assert!(
                lo <= value && value <= hi,
                "case {i}: policy {policy:?} on {prog} for {phi}: \
                 value {value} outside [{lo}, {hi}] on {env}"
            );
        }
    }
}

// ---------------------------------------------------------------------------
// Union bound
// ---------------------------------------------------------------------------

/// Without an adversary the disjunction obeys the union bound; a demonic
/// counterexample shows why the adversary breaks it.
pub fn disjunction_bound_splits_without_demonic(seed: u64, count: usize) {
    let mut fz = Fuzzer::new(seed);
    for i in 0..count {
        let env = fz.env();
        let prog = fz.demonic_free_program();
        let phi1 = fz.state_formula();
        let phi2 = fz.state_formula();
        let v1 = exact_min(&env, &prog, &phi1, "first disjunct");
        let v2 = exact_min(&env, &prog, &phi2, "second disjunct");
        let both = exact_min(
            &env,
            &prog,
            &Formula::or(phi1.clone(), phi2.clone()),
            "disjunction",
        );
        assert!(
            both <= &v1 + &v2,
            "case {i}: union bound failed on {prog}: \
             P({phi1} || {phi2}) = {both} > {v1} + {v2} on {env}"
        );
    }

    // With an adversary the bound fails: each disjunct alone can be forced
    // to zero while their disjunction is certain.
    let prog = parse_program("{ x := 0 } [] { x := 1 }").unwrap();
    let env = Valuation::default();
    let phi1 = parse_formula("x == 0");
    let phi2 = parse_formula("x == 1");
    let v1 = exact_min(&env, &prog, &phi1, "forced-zero disjunct");
    let v2 = exact_min(&env, &prog, &phi2, "forced-zero disjunct");
    let both = exact_min(&env, &prog, &Formula::or(phi1, phi2), "certain disjunction");
    assert_eq!(v1, BigRational::zero());
    assert_eq!(v2, BigRational::zero());
    assert_eq!(both, BigRational::one());
}

fn parse_formula(text: &str) -> Formula {
    pdlcheck_core::parse_formula(text).unwrap()
}

// ---------------------------------------------------------------------------
// Expectation laws
// ---------------------------------------------------------------------------

/// Expectations always land in the unit interval, brackets are ordered, and
/// exact answers have equal endpoints.
pub fn expectations_stay_in_unit_interval(seed: u64, count: usize) {
    let mut fz = Fuzzer::new(seed);
    let zero = BigRational::zero();
    let one = BigRational::one();
    for i in 0..count {
        let env = fz.env();
        let prog = fz.program();
        let phi = fz.state_formula();
        let start = State::new(env.clone(), prog.clone());
        let reward = embed_reward(phi.clone(), DEFAULT_BUDGET);
        for budget in [DEFAULT_BUDGET, 2] {
            let bounds = min_expectation(&start, &reward, budget)
                .unwrap_or_else(|e| panic!("case {i}: expectation failed on {prog}: {e}"));
            assert!(
                zero <= bounds.lo && bounds.lo <= bounds.hi && bounds.hi <= one,
                "case {i} (budget {budget}): disordered bounds {bounds} on {prog}"
            );
            if bounds.exact {
                assert_eq!(bounds.lo, bounds.hi, "case {i}: exact but split {bounds}");
            }
        }
    }
}

/// A reward that is pointwise at most another has an expectation at most the
/// other's.
pub fn pointwise_dominated_rewards_give_dominated_expectations(seed: u64, count: usize) {
    let mut fz = Fuzzer::new(seed);
    for i in 0..count {
        let env = fz.env();
        let prog = fz.program();
        let phi1 = fz.state_formula();
        let phi2 = fz.state_formula();
        let smaller = exact_min(
            &env,
            &prog,
            &Formula::and(phi1.clone(), phi2.clone()),
            "conjunction value",
        );
        let larger = exact_min(&env, &prog, &phi1, "conjunct value");
        assert!(
            smaller <= larger,
            "case {i}: domination failed on {prog}: \
             P(({phi1}) && ({phi2})) = {smaller} > P({phi1}) = {larger} on {env}"
        );
    }
}

/// The worst case of a sum is at least the sum of the worst cases.
pub fn expectation_is_superadditive(seed: u64, count: usize) {
    let mut fz = Fuzzer::new(seed);
    for i in 0..count {
        let env = fz.env();
        let prog = fz.program();
        let phi1 = fz.state_formula();
        let phi2 = fz.state_formula();
        let a = fz.probability();
        let start = State::new(env.clone(), prog.clone());
        // a * [phi1] and (1 - a) * [phi2]; the sum stays within [0, 1].
        let r1 = scaled_indicator(a.clone(), phi1.clone());
        let r2 = scaled_indicator(BigRational::one() - &a, phi2.clone());
        let weight = a.clone();
        let f1 = phi1.clone();
        let f2 = phi2.clone();
        let sum = RewardFn::from_fn(move |state: &State| {
            let one = BigRational::one();
            let i1 = indicator(state, &f1)?;
            let i2 = indicator(state, &f2)?;
            Ok(&weight * i1 + (one - &weight) * i2)
        });
        let e1 = min_expectation(&start, &r1, DEFAULT_BUDGET).unwrap();
        let e2 = min_expectation(&start, &r2, DEFAULT_BUDGET).unwrap();
        let es = min_expectation(&start, &sum, DEFAULT_BUDGET).unwrap();
        assert!(es.exact && e1.exact && e2.exact, "case {i}: inexact values");
        assert!(
            es.lo >= &e1.lo + &e2.lo,
            "case {i}: superadditivity failed on {prog}: \
             {} < {} + {} (a = {a}) on {env}",
            es.lo,
            e1.lo,
            e2.lo
        );
    }
}

/// Scaling the reward by a constant scales the expectation exactly.
pub fn constant_factors_scale_expectations(seed: u64, count: usize) {
    let mut fz = Fuzzer::new(seed);
    let factors: Vec<BigRational> = vec![
        BigRational::zero(),
        ratio(1, 4),
        ratio(1, 3),
        ratio(1, 2),
        ratio(2, 3),
        BigRational::one(),
    ];
    for i in 0..count {
        let env = fz.env();
        let prog = fz.program();
        let phi = fz.state_formula();
        let start = State::new(env.clone(), prog.clone());
        let base = exact_min(&env, &prog, &phi, "base value");
        for c in &factors {
            let scaled = min_expectation(
                &start,
                &scaled_indicator(c.clone(), phi.clone()),
                DEFAULT_BUDGET,
            )
            .unwrap();
            let value = exact_lo(&scaled, "scaled value");
            assert_eq!(
                value,
                c * &base,
                "case {i}: scaling by {c} on {prog} for {phi} on {env}"
            );
        }
    }
}

/// Staging a sequence through an inner worst case never overstates the flat
/// worst case (with an adversary the two stages optimize separately, so the
/// staged value can be strictly smaller).
pub fn nested_expectation_understates_flat_expectation(seed: u64, count: usize) {
    let mut fz = Fuzzer::new(seed);
    for i in 0..count {
        let env = fz.env();
        let s1 = fz.program();
        let s2 = fz.program();
        let phi = fz.state_formula();
        let flat = exact_min(
            &env,
            &Stmt::seq(s1.clone(), s2.clone()),
            &phi,
            "flat sequence",
        );
        let tail = s2.clone();
        let inner_phi = phi.clone();
        let staged_reward = RewardFn::from_fn(move |state: &State| {
            Ok(min_expectation(
                &State::new(state.env.clone(), tail.clone()),
                &embed_reward(inner_phi.clone(), DEFAULT_BUDGET),
                DEFAULT_BUDGET,
            )?
            .lo)
        });
        let staged = min_expectation(
            &State::new(env.clone(), s1.clone()),
            &staged_reward,
            DEFAULT_BUDGET,
        )
        .unwrap();
        assert!(
            staged.lo <= flat,
            "case {i}: staged {} exceeds flat {flat} on ({s1}); ({s2}) for {phi} on {env}",
            staged.lo
        );
    }
}

fn indicator(state: &State, phi: &Formula) -> Result<BigRational, pdlcheck_core::Error> {
    match satisfies(&state.env, phi, DEFAULT_BUDGET)? {
        Verdict::Satisfied => Ok(BigRational::one()),
        Verdict::Violated => Ok(BigRational::zero()),
        Verdict::Unknown { cause, .. } => Err(pdlcheck_core::Error::InnerUnknown {
            state: state.to_string(),
            cause,
        }),
    }
}

fn scaled_indicator(c: BigRational, phi: Formula) -> RewardFn {
    RewardFn::from_fn(move |state: &State| Ok(&c * indicator(state, &phi)?))
}

// ---------------------------------------------------------------------------
// Embedding laws
// ---------------------------------------------------------------------------

/// On any single state the conjunction's indicator is at least the sum of
/// the conjuncts' indicators minus one.
pub fn embeddings_obey_conjunction_floor(seed: u64, count: usize) {
    let mut fz = Fuzzer::new(seed);
    let one = BigRational::one();
    for i in 0..count {
        let state = State::new(fz.env(), Stmt::Skip);
        let phi1 = fz.state_formula();
        let phi2 = fz.state_formula();
        let both = indicator(&state, &Formula::and(phi1.clone(), phi2.clone())).unwrap();
        let i1 = indicator(&state, &phi1).unwrap();
        let i2 = indicator(&state, &phi2).unwrap();
        assert!(
            both >= &i1 + &i2 - &one,
            "case {i}: floor failed at {state} for ({phi1}) && ({phi2})"
        );
    }
}

/// Negation complements the indicator exactly.
pub fn embedding_complements_negation(seed: u64, count: usize) {
    let mut fz = Fuzzer::new(seed);
    let one = BigRational::one();
    for i in 0..count {
        let state = State::new(fz.env(), Stmt::Skip);
        let phi = fz.state_formula();
        let direct = indicator(&state, &phi).unwrap();
        let negated = indicator(&state, &Formula::not(phi.clone())).unwrap();
        assert_eq!(
            negated,
            &one - &direct,
            "case {i}: complement failed at {state} for {phi}"
        );
    }
}

// ---------------------------------------------------------------------------
// Simulation (statistical)
// ---------------------------------------------------------------------------

const TRIALS: u64 = 300;
const STEP_CAP: u64 = 10_000;

/// Monte Carlo estimates agree with the exact value of the same policy to
/// within five standard errors. Statistical: a small failure quota guards
/// against unlucky seeds.
pub fn simulation_matches_exact_policy_value(seed: u64, count: usize) {
    let mut fz = Fuzzer::new(seed);
    let mut failures = 0usize;
    for i in 0..count {
        let env = fz.env();
        let prog = fz.program();
        let phi = fz.state_formula();
        let start = State::new(env.clone(), prog.clone());
        let policy = match i % 3 {
            0 => Policy::AlwaysLeft,
            1 => Policy::AlwaysRight,
            _ => Policy::UniformRandom { seed: seed ^ i as u64 },
        };
        let reward = embed_reward(phi.clone(), DEFAULT_BUDGET);
        let exact = exact_lo(
            &expected_value_under_policy(&start, &reward, &policy, DEFAULT_BUDGET).unwrap(),
            "policy value",
        );
        let mc = monte_carlo(&start, &reward, &policy, TRIALS, seed ^ (i as u64) << 1, STEP_CAP)
            .unwrap_or_else(|e| panic!("case {i}: simulation failed on {prog}: {e}"));
        let target = rational_to_f64(&exact);
        let slack = if mc.stderr == 0.0 { 1e-9 } else { 5.0 * mc.stderr };
        if (mc.estimate - target).abs() > slack {
            failures += 1;
        }
    }
    assert!(
        failures <= count / 100,
        "simulation drifted from exact values in {failures} of {count} cases"
    );
}

/// Monte Carlo estimates respect the two-sided interval (up to sampling
/// error). Statistical, with the same failure quota.
pub fn simulation_respects_two_sided_interval(seed: u64, count: usize) {
    let mut fz = Fuzzer::new(seed);
    let mut failures = 0usize;
    for i in 0..count {
        let env = fz.env();
        let prog = fz.program();
        let phi = fz.state_formula();
        let start = State::new(env.clone(), prog.clone());
        let lo_phi = exact_min(&env, &prog, &phi, "body value");
        let lo_not = exact_min(&env, &prog, &Formula::not(phi.clone()), "negated value");
        let (lo, hi) = policy_value_interval(&lo_phi, &lo_not).unwrap();
        let policy = Policy::UniformRandom { seed: seed ^ i as u64 };
        let reward = embed_reward(phi.clone(), DEFAULT_BUDGET);
        let mc = monte_carlo(&start, &reward, &policy, TRIALS, seed ^ (i as u64) << 1, STEP_CAP)
            .unwrap_or_else(|e| panic!("case {i}: simulation failed on {prog}: {e}"));
        let slack = if mc.stderr == 0.0 { 1e-9 } else { 5.0 * mc.stderr };
        let ok = mc.estimate >= rational_to_f64(&lo) - slack
            && mc.estimate <= rational_to_f64(&hi) + slack;
        if !ok {
            failures += 1;
        }
    }
    assert!(
        failures <= count / 100,
        "simulated values left the two-sided interval in {failures} of {count} cases"
    );
}

fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().expect("unit-interval rationals convert to f64")
}
