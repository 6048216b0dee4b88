//! Recursive-descent parsers for programs, formulas, and valuations.

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use super::ast::{BinOp, Expr, Formula, Stmt, UnOp};
use super::lexer::{lex, Tok, Token};
use crate::eval::Value;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(line: u32, col: u32, message: String) -> ParseError {
        ParseError { line, col, message }
    }
}

/// Loader for `@path` program references inside formulas.
pub type ProgramLoader = dyn FnMut(&str) -> Result<String, String>;

/// Parse a program in concrete syntax.
pub fn parse_program(text: &str) -> Result<Stmt, ParseError> {
    let mut p = Parser::new(text)?;
    let stmt = p.stmt()?;
    p.expect_eof()?;
    Ok(stmt)
}

/// Parse a formula. Program references (`@path`) are rejected; use
/// [`parse_formula_with_loader`] to resolve them.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    parse_formula_with_loader(text, &mut |path: &str| {
        Err(format!("program reference `@{path}` needs a file loader"))
    })
}

/// Parse a formula, resolving each `@path` program reference through
/// `loader`, which returns the program source text for a path.
pub fn parse_formula_with_loader(
    text: &str,
    loader: &mut ProgramLoader,
) -> Result<Formula, ParseError> {
    let mut p = Parser::new(text)?;
    p.loader = Some(loader);
    let formula = p.formula()?;
    p.expect_eof()?;
    p.check_formula_scopes()?;
    Ok(formula)
}

/// Parse a comma-separated valuation such as `x=1, switch=true, mu=1/2`.
/// The empty string denotes the empty valuation.
pub fn parse_valuation(text: &str) -> Result<crate::eval::Valuation, ParseError> {
    let mut p = Parser::new(text)?;
    let mut out = crate::eval::Valuation::new();
    if p.peek() != &Tok::Eof {
        loop {
            let (name, line, col) = p.expect_ident("variable name")?;
            if out.contains(&name) {
                return Err(ParseError::new(
                    line,
                    col,
                    format!("duplicate binding for `{name}`"),
                ));
            }
            p.expect(&Tok::Eq, "`=`")?;
            let value = p.value()?;
            out.insert(name, value);
            if p.peek() == &Tok::Comma {
                p.bump();
            } else {
                break;
            }
        }
    }
    p.expect_eof()?;
    Ok(out)
}

/// Occurrence of a name in formula position, recorded for scope checking.
struct NameUse {
    name: String,
    line: u32,
    col: u32,
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    loader: Option<&'a mut ProgramLoader>,
    /// Logical binders currently in scope (formula parsing only).
    scope: Vec<String>,
    /// Every binder introduced anywhere in the formula.
    binders: Vec<NameUse>,
    /// Name uses in atoms and bounds that no enclosing binder captured.
    free_uses: Vec<NameUse>,
    /// Union of the variables of all embedded programs.
    program_vars: BTreeSet<String>,
}

impl<'a> Parser<'a> {
    fn new(text: &str) -> Result<Parser<'a>, ParseError> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            loader: None,
            scope: Vec::new(),
            binders: Vec::new(),
            free_uses: Vec::new(),
            program_vars: BTreeSet::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (u32, u32) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: String) -> ParseError {
        let (line, col) = self.here();
        ParseError::new(line, col, message)
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        let got = self.peek();
        if let Some(kw) = got.keyword_name() {
            if wanted.contains("identifier") || wanted.contains("expression") {
                return self.error_here(format!(
                    "reserved word `{kw}` cannot be used as an identifier (expected {wanted})"
                ));
            }
        }
        self.error_here(format!("expected {wanted}, found {}", got.describe()))
    }

    fn expect(&mut self, tok: &Tok, wanted: &str) -> Result<Token, ParseError> {
        if self.peek() == tok {
            Ok(self.bump())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        if self.peek() == &Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    fn expect_ident(&mut self, wanted: &str) -> Result<(String, u32, u32), ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let t = self.bump();
                Ok((name, t.line, t.col))
            }
            _ => Err(self.unexpected(wanted)),
        }
    }

    // ----- statements -----

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let first = self.item()?;
        if self.peek() == &Tok::Semi {
            self.bump();
            let rest = self.stmt()?;
            Ok(Stmt::seq(first, rest))
        } else {
            Ok(first)
        }
    }

    fn item(&mut self) -> Result<Stmt, ParseError> {
        match self.peek().clone() {
            Tok::KwSkip => {
                self.bump();
                Ok(Stmt::Skip)
            }
            Tok::Ident(name) => {
                self.bump();
                self.expect(&Tok::Assign, "`:=`")?;
                let expr = self.expr()?;
                Ok(Stmt::assign(name, expr))
            }
            Tok::KwIf => {
                self.bump();
                let guard = self.expr()?;
                let then_branch = self.block()?;
                self.expect(&Tok::KwElse, "`else`")?;
                let else_branch = self.block()?;
                Ok(Stmt::If {
                    guard,
                    then_branch: Box::new(then_branch),
                    else_branch: Box::new(else_branch),
                })
            }
            Tok::KwWhile => {
                self.bump();
                let guard = self.expr()?;
                let body = self.block()?;
                Ok(Stmt::While {
                    guard,
                    body: Box::new(body),
                })
            }
            Tok::LBrace => {
                let left = self.block()?;
                self.choice_tail(left)
            }
            _ => Err(self.unexpected(
                "a statement (`skip`, an assignment, `if`, `while`, or `{`)",
            )),
        }
    }

    fn block(&mut self) -> Result<Stmt, ParseError> {
        self.expect(&Tok::LBrace, "`{`")?;
        let s = self.stmt()?;
        self.expect(&Tok::RBrace, "`}`")?;
        Ok(s)
    }

    /// After a brace-delimited operand, `[]` or `[e]` continues a choice.
    /// Chains associate to the right.
    fn choice_tail(&mut self, left: Stmt) -> Result<Stmt, ParseError> {
        if self.peek() != &Tok::LBracket {
            return Ok(left);
        }
        self.bump();
        if self.peek() == &Tok::RBracket {
            self.bump();
            let right = self.choice_operand()?;
            Ok(Stmt::Demonic(Box::new(left), Box::new(right)))
        } else {
            let prob = self.expr()?;
            self.expect(&Tok::RBracket, "`]`")?;
            let right = self.choice_operand()?;
            Ok(Stmt::ProbChoice {
                prob,
                left: Box::new(left),
                right: Box::new(right),
            })
        }
    }

    fn choice_operand(&mut self) -> Result<Stmt, ParseError> {
        let block = self.block()?;
        self.choice_tail(block)
    }

    // ----- expressions (program context: full operator set) -----

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.implication_expr()
    }

    fn implication_expr(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.or_expr()?;
        if self.peek() == &Tok::FatArrow {
            self.bump();
            let rhs = self.implication_expr()?;
            Ok(Expr::binary(BinOp::Implies, lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.and_expr()?;
        while self.peek() == &Tok::OrOr {
            self.bump();
            let rhs = self.and_expr()?;
            lhs = Expr::binary(BinOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.cmp_expr()?;
        while self.peek() == &Tok::AndAnd {
            self.bump();
            let rhs = self.cmp_expr()?;
            lhs = Expr::binary(BinOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn cmp_op(&self) -> Option<BinOp> {
        match self.peek() {
            Tok::Lt => Some(BinOp::Lt),
            Tok::Le => Some(BinOp::Le),
            Tok::Gt => Some(BinOp::Gt),
            Tok::Ge => Some(BinOp::Ge),
            Tok::EqEq => Some(BinOp::Eq),
            Tok::Ne => Some(BinOp::Ne),
            _ => None,
        }
    }

    /// Comparisons do not chain: `a < b < c` is a parse error.
    fn cmp_expr(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.add_expr(false)?;
        if let Some(op) = self.cmp_op() {
            self.bump();
            let rhs = self.add_expr(false)?;
            Ok(Expr::binary(op, lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn add_expr(&mut self, formula_ctx: bool) -> Result<Expr, ParseError> {
        let mut lhs = self.mul_expr(formula_ctx)?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.mul_expr(formula_ctx)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn mul_expr(&mut self, formula_ctx: bool) -> Result<Expr, ParseError> {
        let mut lhs = self.unary_expr(formula_ctx)?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                Tok::Percent => BinOp::Mod,
                _ => break,
            };
            self.bump();
            let rhs = self.unary_expr(formula_ctx)?;
            lhs = fold_binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary_expr(&mut self, formula_ctx: bool) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                let inner = self.unary_expr(formula_ctx)?;
                Ok(fold_neg(inner))
            }
            Tok::Bang if !formula_ctx => {
                self.bump();
                let inner = self.unary_expr(formula_ctx)?;
                Ok(Expr::Unary(UnOp::Not, Box::new(inner)))
            }
            _ => self.primary_expr(formula_ctx),
        }
    }

    fn primary_expr(&mut self, formula_ctx: bool) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Const(Value::Int(n)))
            }
            Tok::KwTrue => {
                self.bump();
                Ok(Expr::Const(Value::Bool(true)))
            }
            Tok::KwFalse => {
                self.bump();
                Ok(Expr::Const(Value::Bool(false)))
            }
            Tok::Ident(name) => {
                let t = self.bump();
                if formula_ctx {
                    self.note_formula_name(&name, t.line, t.col);
                }
                Ok(Expr::Var(name))
            }
            Tok::LParen => {
                self.bump();
                let e = if formula_ctx {
                    // Inside formulas, parenthesized subexpressions stay
                    // arithmetic; boolean structure lives at the formula level.
                    self.add_expr(true)?
                } else {
                    self.expr()?
                };
                self.expect(&Tok::RParen, "`)`")?;
                Ok(e)
            }
            _ => Err(self.unexpected("an expression")),
        }
    }

    // ----- formulas -----

    fn formula(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::KwForall | Tok::KwExists => self.quantified(),
            _ => self.formula_implication(),
        }
    }

    fn quantified(&mut self) -> Result<Formula, ParseError> {
        let universal = self.peek() == &Tok::KwForall;
        self.bump();
        let (var, line, col) = self.expect_ident("a logical variable name")?;
        if self.scope.contains(&var) {
            return Err(ParseError::new(
                line,
                col,
                format!("binder `{var}` shadows an enclosing binder of the same name"),
            ));
        }
        self.expect(&Tok::KwIn, "`in`")?;
        let domain = self.domain()?;
        self.expect(&Tok::Dot, "`.`")?;
        self.binders.push(NameUse {
            name: var.clone(),
            line,
            col,
        });
        self.scope.push(var.clone());
        let body = self.formula()?;
        self.scope.pop();
        Ok(if universal {
            Formula::forall(var, domain, body)
        } else {
            Formula::exists(var, domain, body)
        })
    }

    fn domain(&mut self) -> Result<Vec<Value>, ParseError> {
        let (line, col) = self.here();
        self.expect(&Tok::LBrace, "`{`")?;
        if self.peek() == &Tok::RBrace {
            return Err(ParseError::new(
                line,
                col,
                "quantifier domain must not be empty".to_string(),
            ));
        }
        let mut out: Vec<Value> = Vec::new();
        loop {
            let (vline, vcol) = self.here();
            let v = self.value()?;
            if out.contains(&v) {
                return Err(ParseError::new(
                    vline,
                    vcol,
                    format!("duplicate domain value `{v}`"),
                ));
            }
            out.push(v);
            if self.peek() == &Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(&Tok::RBrace, "`}`")?;
        Ok(out)
    }

    /// A literal value: integer, boolean, or rational, with optional sign.
    fn value(&mut self) -> Result<Value, ParseError> {
        let negate = if self.peek() == &Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                let numer = if negate { -n } else { n };
                if self.peek() == &Tok::Slash {
                    self.bump();
                    let (line, col) = self.here();
                    match self.peek().clone() {
                        Tok::Int(d) => {
                            self.bump();
                            if d.is_zero() {
                                return Err(ParseError::new(
                                    line,
                                    col,
                                    "rational literal with zero denominator".to_string(),
                                ));
                            }
                            Ok(Value::rational(BigRational::new(numer, d)))
                        }
                        _ => Err(self.unexpected("a denominator")),
                    }
                } else {
                    Ok(Value::Int(numer))
                }
            }
            Tok::KwTrue if !negate => {
                self.bump();
                Ok(Value::Bool(true))
            }
            Tok::KwFalse if !negate => {
                self.bump();
                Ok(Value::Bool(false))
            }
            _ => Err(self.unexpected("a value (integer, `a/b`, `true`, or `false`)")),
        }
    }

    fn formula_implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.formula_or()?;
        if self.peek() == &Tok::ThinArrow {
            self.bump();
            let rhs = self.formula()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn formula_or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.formula_and()?;
        while self.peek() == &Tok::OrOr {
            self.bump();
            let rhs = self.formula_and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn formula_and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.formula_unit()?;
        while self.peek() == &Tok::AndAnd {
            self.bump();
            let rhs = self.formula_unit()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn formula_unit(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::not(self.formula_unit()?))
            }
            Tok::LBracket => self.pbox(),
            Tok::LParen => {
                // `(` opens either an arithmetic atom (`(x+1) > 0`) or a
                // grouped formula (`(x == 0 && switch)`); try the atom first
                // and fall back on failure.
                let snapshot = self.pos;
                match self.formula_atom() {
                    Ok(atom) => Ok(atom),
                    Err(_) => {
                        self.pos = snapshot;
                        self.bump();
                        let f = self.formula()?;
                        self.expect(&Tok::RParen, "`)`")?;
                        Ok(f)
                    }
                }
            }
            _ => self.formula_atom(),
        }
    }

    fn formula_atom(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::KwTrue => {
                self.bump();
                return Ok(Formula::Atom(Expr::Const(Value::Bool(true))));
            }
            Tok::KwFalse => {
                self.bump();
                return Ok(Formula::Atom(Expr::Const(Value::Bool(false))));
            }
            _ => {}
        }
        let lhs = self.add_expr(true)?;
        if let Some(op) = self.cmp_op() {
            self.bump();
            let rhs = self.add_expr(true)?;
            Ok(Formula::Atom(Expr::binary(op, lhs, rhs)))
        } else {
            Ok(Formula::Atom(lhs))
        }
    }

    fn pbox(&mut self) -> Result<Formula, ParseError> {
        self.expect(&Tok::LBracket, "`[`")?;
        let program = match self.peek().clone() {
            Tok::AtRef(path) => {
                let t = self.bump();
                let source = match self.loader.as_mut() {
                    Some(loader) => loader(&path)
                        .map_err(|msg| ParseError::new(t.line, t.col, msg))?,
                    None => {
                        return Err(ParseError::new(
                            t.line,
                            t.col,
                            format!("program reference `@{path}` needs a file loader"),
                        ))
                    }
                };
                parse_program(&source).map_err(|e| {
                    ParseError::new(
                        t.line,
                        t.col,
                        format!("in program `@{path}` at {}:{}: {}", e.line, e.col, e.message),
                    )
                })?
            }
            _ => self.stmt()?,
        };
        self.program_vars.extend(program.variables());
        self.expect(&Tok::RBracket, "`]`")?;
        self.expect(&Tok::Underscore, "`_`")?;
        self.expect(&Tok::LBrace, "`{`")?;
        let bound = self.bound_expr()?;
        self.expect(&Tok::RBrace, "`}`")?;
        let body = self.formula_unit()?;
        Ok(Formula::pbox(program, bound, body))
    }

    /// The bound of a box: a full expression whose variable uses take part in
    /// logical scope checking.
    fn bound_expr(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let e = self.expr()?;
        for (name, line, col) in idents_between(&self.toks, start, self.pos) {
            self.note_formula_name(&name, line, col);
        }
        Ok(e)
    }

    fn note_formula_name(&mut self, name: &str, line: u32, col: u32) {
        if self.scope.iter().any(|s| s == name) {
            return;
        }
        self.free_uses.push(NameUse {
            name: name.to_string(),
            line,
            col,
        });
    }

    /// Scope rules checked after a full formula parse: a name bound anywhere
    /// in the formula may not also be used outside a binder's scope, and
    /// binder names must be disjoint from the variables of embedded programs.
    fn check_formula_scopes(&self) -> Result<(), ParseError> {
        let binder_names: BTreeSet<&str> =
            self.binders.iter().map(|b| b.name.as_str()).collect();
        for used in &self.free_uses {
            if binder_names.contains(used.name.as_str()) {
                return Err(ParseError::new(
                    used.line,
                    used.col,
                    format!("unbound logical variable `{}`", used.name),
                ));
            }
        }
        for binder in &self.binders {
            if self.program_vars.contains(&binder.name) {
                return Err(ParseError::new(
                    binder.line,
                    binder.col,
                    format!(
                        "logical variable `{}` collides with a program variable",
                        binder.name
                    ),
                ));
            }
        }
        Ok(())
    }
}

fn idents_between(toks: &[Token], start: usize, end: usize) -> Vec<(String, u32, u32)> {
    toks[start..end]
        .iter()
        .filter_map(|t| match &t.tok {
            Tok::Ident(name) => Some((name.clone(), t.line, t.col)),
            _ => None,
        })
        .collect()
}

/// Fold a division of two integer literals into a rational constant; leave
/// division by a zero literal for evaluation to report.
fn fold_binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
    if op == BinOp::Div {
        if let (Expr::Const(Value::Int(a)), Expr::Const(Value::Int(b))) = (&lhs, &rhs) {
            if !b.is_zero() {
                return Expr::Const(Value::rational(BigRational::new(a.clone(), b.clone())));
            }
        }
    }
    Expr::binary(op, lhs, rhs)
}

fn fold_neg(inner: Expr) -> Expr {
    match inner {
        Expr::Const(Value::Int(n)) => Expr::Const(Value::Int(-n)),
        Expr::Const(Value::Rat(r)) => Expr::Const(Value::rational(-r)),
        other => Expr::Unary(UnOp::Neg, Box::new(other)),
    }
}
