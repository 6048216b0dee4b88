//! Shared fixtures for the benchmarks: the case-study programs and the
//! formulas checked against them.

use num_rational::BigRational;
use pdlcheck_core::{parse_formula, parse_program, parse_valuation, Formula, Stmt, Valuation};

pub const MONTY_HALL: &str = "\
{ prize := 0 } [] { { prize := 1 } [] { prize := 2 } };
{ choice := 0 } [1/3] { { choice := 1 } [1/2] { choice := 2 } };
if prize == choice {
    { open := (prize + 1) % 3 } [] { open := (prize + 2) % 3 }
} else {
    open := (2 * prize - choice) % 3
};
if switch {
    choice := (2 * choice - open) % 3
} else {
    skip
}";

pub const DIE: &str = "\
{ x := 1 } [1/6] { { x := 2 } [1/5] { { x := 3 } [1/4] { { x := 4 } [1/3] { { x := 5 } [1/2] { x := 6 } } } } }";

pub fn monty_hall() -> Stmt {
    parse_program(MONTY_HALL).expect("program parses")
}

pub fn die() -> Stmt {
    parse_program(DIE).expect("program parses")
}

/// n success-counting trials, each taking `s := 1` with probability 1/2.
pub fn bernoulli(n: u64) -> Stmt {
    parse_program(&format!(
        "i := 0; c := 0; \
         while i < {n} {{ {{ s := 0 }} [1/2] {{ s := 1 }}; c := c + s; i := i + 1 }}"
    ))
    .expect("program parses")
}

pub fn deviation(n: u64, delta: &BigRational) -> Formula {
    parse_formula(&format!(
        "c / {n} - 1/2 > {delta} || 1/2 - c / {n} > {delta}"
    ))
    .expect("formula parses")
}

pub fn switched() -> Valuation {
    parse_valuation("switch=true").expect("valuation parses")
}
