//! Abstract syntax for expressions, statements, and formulas.

use std::collections::BTreeSet;

use crate::eval::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    /// Boolean negation `!`.
    Not,
    /// Arithmetic negation `-`.
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    /// Exact rational division.
    Div,
    /// Euclidean remainder on integers.
    Mod,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
    /// Boolean implication `=>`.
    Implies,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
            BinOp::Implies => "=>",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(Value),
    Var(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// All variable names occurring in the expression.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    pub(crate) fn collect_variables(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(name) => {
                out.insert(name.clone());
            }
            Expr::Unary(_, inner) => inner.collect_variables(out),
            Expr::Binary(_, l, r) => {
                l.collect_variables(out);
                r.collect_variables(out);
            }
        }
    }
}

/// A guarded-command statement. `Seq` chains associate to the right as the
/// parser builds them.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Stmt {
    Skip,
    Assign {
        var: String,
        expr: Expr,
    },
    Seq(Box<Stmt>, Box<Stmt>),
    /// Demonic (adversarial) choice between two statements.
    Demonic(Box<Stmt>, Box<Stmt>),
    /// Run `left` with the probability `prob` evaluates to, else `right`.
    ProbChoice {
        prob: Expr,
        left: Box<Stmt>,
        right: Box<Stmt>,
    },
    If {
        guard: Expr,
        then_branch: Box<Stmt>,
        else_branch: Box<Stmt>,
    },
    While {
        guard: Expr,
        body: Box<Stmt>,
    },
}

impl Stmt {
    pub fn seq(first: Stmt, second: Stmt) -> Stmt {
        Stmt::Seq(Box::new(first), Box::new(second))
    }

    pub fn assign(var: impl Into<String>, expr: Expr) -> Stmt {
        Stmt::Assign {
            var: var.into(),
            expr,
        }
    }

    /// All variable names occurring anywhere in the statement.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    pub(crate) fn collect_variables(&self, out: &mut BTreeSet<String>) {
        match self {
            Stmt::Skip => {}
            Stmt::Assign { var, expr } => {
                out.insert(var.clone());
                expr.collect_variables(out);
            }
            Stmt::Seq(a, b) | Stmt::Demonic(a, b) => {
                a.collect_variables(out);
                b.collect_variables(out);
            }
            Stmt::ProbChoice { prob, left, right } => {
                prob.collect_variables(out);
                left.collect_variables(out);
                right.collect_variables(out);
            }
            Stmt::If {
                guard,
                then_branch,
                else_branch,
            } => {
                guard.collect_variables(out);
                then_branch.collect_variables(out);
                else_branch.collect_variables(out);
            }
            Stmt::While { guard, body } => {
                guard.collect_variables(out);
                body.collect_variables(out);
            }
        }
    }
}

/// A formula of the logic. Disjunction, implication, and existential
/// quantification are surface syntax only; the parser desugars them, so no
/// parsed formula contains them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    /// Atomic formula: a boolean-valued expression over program and logical
    /// variables.
    Atom(Expr),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    /// Universal quantification of a logical variable over a finite, ordered,
    /// duplicate-free list of values.
    Forall {
        var: String,
        domain: Vec<Value>,
        body: Box<Formula>,
    },
    /// `[program]_{bound} body`: the minimal expected value of the embedded
    /// `body` reward after running `program` is at least `bound`.
    PBox {
        program: Box<Stmt>,
        bound: Expr,
        body: Box<Formula>,
    },
}

impl Formula {
    pub fn atom(e: Expr) -> Formula {
        Formula::Atom(e)
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Box::new(l), Box::new(r))
    }

    /// `l || r`, desugared to `!(!l && !r)`.
    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::not(Formula::and(Formula::not(l), Formula::not(r)))
    }

    /// `l -> r`, desugared to `!(l && !r)`.
    pub fn implies(l: Formula, r: Formula) -> Formula {
        Formula::not(Formula::and(l, Formula::not(r)))
    }

    pub fn forall(var: impl Into<String>, domain: Vec<Value>, body: Formula) -> Formula {
        Formula::Forall {
            var: var.into(),
            domain,
            body: Box::new(body),
        }
    }

    /// `exists var in domain. body`, desugared to `!forall var. !body`.
    pub fn exists(var: impl Into<String>, domain: Vec<Value>, body: Formula) -> Formula {
        Formula::not(Formula::forall(var, domain, Formula::not(body)))
    }

    pub fn pbox(program: Stmt, bound: Expr, body: Formula) -> Formula {
        Formula::PBox {
            program: Box::new(program),
            bound,
            body: Box::new(body),
        }
    }

    /// Variables of every program embedded in the formula.
    pub fn program_variables(&self) -> BTreeSet<String> {
        let mut vars = BTreeSet::new();
        self.collect_program_variables(&mut vars);
        vars
    }

    fn collect_program_variables(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(_) => {}
            Formula::Not(f) => f.collect_program_variables(out),
            Formula::And(l, r) => {
                l.collect_program_variables(out);
                r.collect_program_variables(out);
            }
            Formula::Forall { body, .. } => body.collect_program_variables(out),
            Formula::PBox { program, body, .. } => {
                program.collect_variables(out);
                body.collect_program_variables(out);
            }
        }
    }
}
