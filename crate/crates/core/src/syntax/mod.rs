//! Concrete syntax: abstract syntax trees, lexer, parsers, and printers.
//!
//! Programs (`.pgcl`) and formulas (`.pdl`) share one lexer. Comments run
//! from `#` to end of line. Identifiers match `[A-Za-z_][A-Za-z0-9_]*`;
//! the lexer treats a bare `_` as punctuation (it anchors the box bound in
//! `[s]_{p}`), so `_` alone is not a variable name. Rational literals `a/b`
//! are first-class constants: the parser folds a division of two integer
//! literals into a single rational constant.

mod ast;
mod lexer;
mod parser;
mod pretty;

pub use ast::{BinOp, Expr, Formula, Stmt, UnOp};
pub use parser::{
    parse_formula, parse_formula_with_loader, parse_program, parse_valuation, ParseError,
    ProgramLoader,
};
