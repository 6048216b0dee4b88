//! Values, valuations, and exact expression evaluation.

use std::collections::btree_map;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::Error;
use crate::syntax::{BinOp, Expr, Formula, UnOp};

/// A runtime value: an integer, a boolean, or a non-integral rational.
///
/// Rationals with denominator 1 are collapsed to `Int` on construction, so
/// structural equality coincides with numeric equality and values hash
/// consistently when they appear in states.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Int(BigInt),
    Bool(bool),
    Rat(BigRational),
}

impl Value {
    pub fn int(n: impl Into<BigInt>) -> Value {
        Value::Int(n.into())
    }

    /// Canonicalizing constructor: integral rationals become `Int`.
    pub fn rational(r: BigRational) -> Value {
        if r.is_integer() {
            Value::Int(r.to_integer())
        } else {
            Value::Rat(r)
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    /// Numeric view of the value, if it has one.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self {
            Value::Int(n) => Some(BigRational::from_integer(n.clone())),
            Value::Rat(r) => Some(r.clone()),
            Value::Bool(_) => None,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Value::Int(_) => "integer",
            Value::Bool(_) => "boolean",
            Value::Rat(_) => "rational",
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Rat(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

/// A finite map from variable names to values. Lookups of unbound names are
/// errors, never defaults.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Valuation {
    bindings: BTreeMap<String, Value>,
}

impl Valuation {
    pub fn new() -> Valuation {
        Valuation::default()
    }

    pub fn get(&self, name: &str) -> Result<&Value, Error> {
        self.bindings
            .get(name)
            .ok_or_else(|| Error::UnboundVariable(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.bindings.contains_key(name)
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Value) {
        self.bindings.insert(name.into(), value);
    }

    /// Copy with `name` bound to `value`.
    pub fn with(&self, name: impl Into<String>, value: Value) -> Valuation {
        let mut next = self.clone();
        next.insert(name, value);
        next
    }

    /// Copy keeping only the named variables.
    pub fn restricted_to(&self, keep: &BTreeSet<String>) -> Valuation {
        Valuation {
            bindings: self
                .bindings
                .iter()
                .filter(|(k, _)| keep.contains(*k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    pub fn iter(&self) -> btree_map::Iter<'_, String, Value> {
        self.bindings.iter()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }
}

impl FromIterator<(String, Value)> for Valuation {
    fn from_iter<I: IntoIterator<Item = (String, Value)>>(iter: I) -> Valuation {
        Valuation {
            bindings: iter.into_iter().collect(),
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (k, v)) in self.bindings.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        write!(f, "}}")
    }
}

fn numeric(op: &str, v: &Value) -> Result<BigRational, Error> {
    v.as_rational()
        .ok_or_else(|| Error::TypeMismatch(format!("`{op}` needs a numeric operand, got {}", v.kind())))
}

fn boolean(op: &str, v: &Value) -> Result<bool, Error> {
    v.as_bool()
        .ok_or_else(|| Error::TypeMismatch(format!("`{op}` needs a boolean operand, got {}", v.kind())))
}

fn integer(op: &str, v: &Value) -> Result<BigInt, Error> {
    match v {
        Value::Int(n) => Ok(n.clone()),
        other => Err(Error::TypeMismatch(format!(
            "`{op}` needs an integer operand, got {}",
            other.kind()
        ))),
    }
}

/// Evaluate `expr` under `env` with exact arithmetic.
///
/// `/` is exact rational division, `%` is Euclidean remainder on integers
/// (nonnegative for a positive modulus), and the boolean connectives
/// short-circuit left to right.
pub fn eval_expr(env: &Valuation, expr: &Expr) -> Result<Value, Error> {
    match expr {
        Expr::Const(v) => Ok(v.clone()),
        Expr::Var(name) => env.get(name).cloned(),
        Expr::Unary(op, inner) => {
            let v = eval_expr(env, inner)?;
            match op {
                UnOp::Not => Ok(Value::Bool(!boolean("!", &v)?)),
                UnOp::Neg => Ok(Value::rational(-numeric("-", &v)?)),
            }
        }
        Expr::Binary(op, lhs, rhs) => {
            // Short-circuit forms first; everything else is strict.
            match op {
                BinOp::And => {
                    return if !boolean("&&", &eval_expr(env, lhs)?)? {
                        Ok(Value::Bool(false))
                    } else {
                        Ok(Value::Bool(boolean("&&", &eval_expr(env, rhs)?)?))
                    };
                }
                BinOp::Or => {
                    return if boolean("||", &eval_expr(env, lhs)?)? {
                        Ok(Value::Bool(true))
                    } else {
                        Ok(Value::Bool(boolean("||", &eval_expr(env, rhs)?)?))
                    };
                }
                BinOp::Implies => {
                    return if !boolean("=>", &eval_expr(env, lhs)?)? {
                        Ok(Value::Bool(true))
                    } else {
                        Ok(Value::Bool(boolean("=>", &eval_expr(env, rhs)?)?))
                    };
                }
                _ => {}
            }
            let l = eval_expr(env, lhs)?;
            let r = eval_expr(env, rhs)?;
            match op {
                BinOp::Add => Ok(Value::rational(numeric("+", &l)? + numeric("+", &r)?)),
                BinOp::Sub => Ok(Value::rational(numeric("-", &l)? - numeric("-", &r)?)),
                BinOp::Mul => Ok(Value::rational(numeric("*", &l)? * numeric("*", &r)?)),
                BinOp::Div => {
                    let denom = numeric("/", &r)?;
                    if denom.is_zero() {
                        return Err(Error::DivisionByZero);
                    }
                    Ok(Value::rational(numeric("/", &l)? / denom))
                }
                BinOp::Mod => {
                    let a = integer("%", &l)?;
                    let b = integer("%", &r)?;
                    if b.is_zero() {
                        return Err(Error::ModuloByZero);
                    }
                    // Euclidean remainder: always in [0, |b|).
                    let mut m = a.mod_floor(&b);
                    if m.is_negative() {
                        m += b.abs();
                    }
                    Ok(Value::Int(m))
                }
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    let (a, b) = (numeric(op.symbol(), &l)?, numeric(op.symbol(), &r)?);
                    Ok(Value::Bool(match op {
                        BinOp::Lt => a < b,
                        BinOp::Le => a <= b,
                        BinOp::Gt => a > b,
                        BinOp::Ge => a >= b,
                        _ => unreachable!(),
                    }))
                }
                BinOp::Eq | BinOp::Ne => {
                    let eq = values_equal(&l, &r)?;
                    Ok(Value::Bool(if matches!(op, BinOp::Eq) { eq } else { !eq }))
                }
                BinOp::And | BinOp::Or | BinOp::Implies => unreachable!(),
            }
        }
    }
}

fn values_equal(l: &Value, r: &Value) -> Result<bool, Error> {
    match (l, r) {
        (Value::Bool(a), Value::Bool(b)) => Ok(a == b),
        (Value::Bool(_), _) | (_, Value::Bool(_)) => Err(Error::TypeMismatch(format!(
            "`==` cannot compare {} with {}",
            l.kind(),
            r.kind()
        ))),
        // Both numeric; canonical form makes structural equality numeric.
        _ => Ok(l == r),
    }
}

/// Replace every free occurrence of the logical variable `var` in `formula`
/// by the constant `value`.
///
/// Substitution rewrites atomic formulas and box bounds; programs are left
/// untouched because they cannot refer to logical variables. An inner binder
/// of the same name shadows, so its body is left alone.
pub fn substitute(formula: &Formula, var: &str, value: &Value) -> Formula {
    match formula {
        Formula::Atom(e) => Formula::Atom(subst_expr(e, var, value)),
        Formula::Not(f) => Formula::Not(Box::new(substitute(f, var, value))),
        Formula::And(l, r) => Formula::And(
            Box::new(substitute(l, var, value)),
            Box::new(substitute(r, var, value)),
        ),
        Formula::Forall { var: v, domain, body } => {
            if v == var {
                formula.clone()
            } else {
                Formula::Forall {
                    var: v.clone(),
                    domain: domain.clone(),
                    body: Box::new(substitute(body, var, value)),
                }
            }
        }
        Formula::PBox { program, bound, body } => Formula::PBox {
            program: program.clone(),
            bound: subst_expr(bound, var, value),
            body: Box::new(substitute(body, var, value)),
        },
    }
}

fn subst_expr(expr: &Expr, var: &str, value: &Value) -> Expr {
    match expr {
        Expr::Const(_) => expr.clone(),
        Expr::Var(name) if name == var => Expr::Const(value.clone()),
        Expr::Var(_) => expr.clone(),
        Expr::Unary(op, inner) => Expr::Unary(*op, Box::new(subst_expr(inner, var, value))),
        Expr::Binary(op, l, r) => Expr::Binary(
            *op,
            Box::new(subst_expr(l, var, value)),
            Box::new(subst_expr(r, var, value)),
        ),
    }
}
