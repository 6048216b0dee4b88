//! Printers that emit parseable concrete syntax.
//!
//! Round-tripping print-then-parse returns a structurally equal tree for
//! every tree the parser itself can produce (sequences associated to the
//! right, folded rational and negative literals, desugared formulas).

use std::fmt;

use super::ast::{BinOp, Expr, Formula, Stmt, UnOp};
use crate::eval::Value;

fn precedence(op: BinOp) -> u8 {
    match op {
        BinOp::Implies => 1,
        BinOp::Or => 2,
        BinOp::And => 3,
        BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne => 4,
        BinOp::Add | BinOp::Sub => 5,
        BinOp::Mul | BinOp::Div | BinOp::Mod => 6,
    }
}

fn expr_prec(e: &Expr) -> u8 {
    match e {
        // A rational literal prints as `n/d`, which reads back as a
        // division, so it must be protected exactly like one.
        Expr::Const(Value::Rat(_)) => precedence(BinOp::Div),
        Expr::Const(_) | Expr::Var(_) => 8,
        Expr::Unary(..) => 7,
        Expr::Binary(op, ..) => precedence(*op),
    }
}

fn is_comparison(op: BinOp) -> bool {
    precedence(op) == 4
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    let prec = expr_prec(e);
    let parens = prec < min_prec;
    if parens {
        write!(f, "(")?;
    }
    match e {
        Expr::Const(v) => write!(f, "{v}")?,
        Expr::Var(name) => write!(f, "{name}")?,
        Expr::Unary(op, inner) => {
            match op {
                UnOp::Not => write!(f, "!")?,
                UnOp::Neg => write!(f, "-")?,
            }
            write_expr(f, inner, 7)?;
        }
        Expr::Binary(op, lhs, rhs) => {
            let p = precedence(*op);
            // `=>` associates right, comparisons do not chain, the rest
            // associate left.
            let (lmin, rmin) = if *op == BinOp::Implies {
                (p + 1, p)
            } else if is_comparison(*op) {
                (p + 1, p + 1)
            } else {
                (p, p + 1)
            };
            write_expr(f, lhs, lmin)?;
            write!(f, " {} ", op.symbol())?;
            write_expr(f, rhs, rmin)?;
        }
    }
    if parens {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, 0)
    }
}

/// Print a statement as a sequence item: a left-nested sequence needs braces
/// to survive the parser's right association.
fn write_item(f: &mut fmt::Formatter<'_>, s: &Stmt) -> fmt::Result {
    if matches!(s, Stmt::Seq(..)) {
        write!(f, "{{{s}}}")
    } else {
        write!(f, "{s}")
    }
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stmt::Skip => write!(f, "skip"),
            Stmt::Assign { var, expr } => write!(f, "{var} := {expr}"),
            Stmt::Seq(first, rest) => {
                write_item(f, first)?;
                write!(f, "; {rest}")
            }
            Stmt::Demonic(left, right) => write!(f, "{{{left}}} [] {{{right}}}"),
            Stmt::ProbChoice { prob, left, right } => {
                write!(f, "{{{left}}} [{prob}] {{{right}}}")
            }
            Stmt::If {
                guard,
                then_branch,
                else_branch,
            } => write!(f, "if {guard} {{ {then_branch} }} else {{ {else_branch} }}"),
            Stmt::While { guard, body } => write!(f, "while {guard} {{ {body} }}"),
        }
    }
}

/// Formula printing precedence: quantifiers are loosest, then `&&`, then the
/// prefix forms (`!` and boxes), then atoms.
fn formula_prec(formula: &Formula) -> u8 {
    match formula {
        Formula::Forall { .. } => 0,
        Formula::And(..) => 2,
        Formula::Not(_) | Formula::PBox { .. } => 3,
        Formula::Atom(_) => 4,
    }
}

fn write_formula(f: &mut fmt::Formatter<'_>, formula: &Formula, min_prec: u8) -> fmt::Result {
    let prec = formula_prec(formula);
    let parens = prec < min_prec;
    if parens {
        write!(f, "(")?;
    }
    match formula {
        Formula::Atom(e) => write!(f, "{e}")?,
        Formula::Not(inner) => {
            // Parenthesize the operand: a bare comparison after `!` would
            // read back with the wrong grouping.
            write!(f, "!")?;
            write_formula(f, inner, 5)?;
        }
        Formula::And(l, r) => {
            // The parser builds `&&` chains left-associated.
            write_formula(f, l, 2)?;
            write!(f, " && ")?;
            write_formula(f, r, 3)?;
        }
        Formula::Forall { var, domain, body } => {
            write!(f, "forall {var} in {{")?;
            for (i, v) in domain.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, "}}. ")?;
            write_formula(f, body, 0)?;
        }
        Formula::PBox {
            program,
            bound,
            body,
        } => {
            write!(f, "[{program}]_{{{bound}}} ")?;
            write_formula(f, body, 3)?;
        }
    }
    if parens {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, self, 0)
    }
}
