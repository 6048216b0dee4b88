//! Tokenizer shared by the program, formula, and valuation parsers.

use num_bigint::BigInt;

use super::parser::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(BigInt),
    /// `@path`: a program reference inside a formula.
    AtRef(String),
    KwSkip,
    KwIf,
    KwElse,
    KwWhile,
    KwTrue,
    KwFalse,
    KwForall,
    KwExists,
    KwIn,
    Assign,
    Semi,
    Comma,
    Dot,
    Underscore,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Ne,
    /// Single `=`, used only in valuations.
    Eq,
    AndAnd,
    OrOr,
    Bang,
    /// `=>`: boolean implication inside expressions.
    FatArrow,
    /// `->`: implication between formulas.
    ThinArrow,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(name) => format!("identifier `{name}`"),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::AtRef(path) => format!("program reference `@{path}`"),
            Tok::KwSkip => "`skip`".into(),
            Tok::KwIf => "`if`".into(),
            Tok::KwElse => "`else`".into(),
            Tok::KwWhile => "`while`".into(),
            Tok::KwTrue => "`true`".into(),
            Tok::KwFalse => "`false`".into(),
            Tok::KwForall => "`forall`".into(),
            Tok::KwExists => "`exists`".into(),
            Tok::KwIn => "`in`".into(),
            Tok::Assign => "`:=`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Underscore => "`_`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Percent => "`%`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::EqEq => "`==`".into(),
            Tok::Ne => "`!=`".into(),
            Tok::Eq => "`=`".into(),
            Tok::AndAnd => "`&&`".into(),
            Tok::OrOr => "`||`".into(),
            Tok::Bang => "`!`".into(),
            Tok::FatArrow => "`=>`".into(),
            Tok::ThinArrow => "`->`".into(),
            Tok::Eof => "end of input".into(),
        }
    }

    pub(crate) fn keyword_name(&self) -> Option<&'static str> {
        match self {
            Tok::KwSkip => Some("skip"),
            Tok::KwIf => Some("if"),
            Tok::KwElse => Some("else"),
            Tok::KwWhile => Some("while"),
            Tok::KwTrue => Some("true"),
            Tok::KwFalse => Some("false"),
            Tok::KwForall => Some("forall"),
            Tok::KwExists => Some("exists"),
            Tok::KwIn => Some("in"),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

struct Scanner<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl<'a> Scanner<'a> {
    fn new(text: &'a str) -> Scanner<'a> {
        Scanner {
            chars: text.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn eat(&mut self, want: char) -> bool {
        if self.chars.peek() == Some(&want) {
            self.bump();
            true
        } else {
            false
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn is_path_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '/' | '-')
}

pub(crate) fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut s = Scanner::new(text);
    let mut out = Vec::new();
    loop {
        // Skip whitespace and `#` comments.
        loop {
            match s.chars.peek() {
                Some(c) if c.is_whitespace() => {
                    s.bump();
                }
                Some('#') => {
                    while let Some(&c) = s.chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        s.bump();
                    }
                }
                _ => break,
            }
        }
        let (line, col) = (s.line, s.col);
        let c = match s.bump() {
            None => {
                out.push(Token {
                    tok: Tok::Eof,
                    line,
                    col,
                });
                return Ok(out);
            }
            Some(c) => c,
        };
        let tok = match c {
            ';' => Tok::Semi,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '+' => Tok::Plus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '%' => Tok::Percent,
            '-' => {
                if s.eat('>') {
                    Tok::ThinArrow
                } else {
                    Tok::Minus
                }
            }
            '<' => {
                if s.eat('=') {
                    Tok::Le
                } else {
                    Tok::Lt
                }
            }
            '>' => {
                if s.eat('=') {
                    Tok::Ge
                } else {
                    Tok::Gt
                }
            }
            '=' => {
                if s.eat('=') {
                    Tok::EqEq
                } else if s.eat('>') {
                    Tok::FatArrow
                } else {
                    Tok::Eq
                }
            }
            '!' => {
                if s.eat('=') {
                    Tok::Ne
                } else {
                    Tok::Bang
                }
            }
            ':' => {
                if s.eat('=') {
                    Tok::Assign
                } else {
                    return Err(ParseError::new(line, col, "expected `:=`".to_string()));
                }
            }
            '&' => {
                if s.eat('&') {
                    Tok::AndAnd
                } else {
                    return Err(ParseError::new(line, col, "expected `&&`".to_string()));
                }
            }
            '|' => {
                if s.eat('|') {
                    Tok::OrOr
                } else {
                    return Err(ParseError::new(line, col, "expected `||`".to_string()));
                }
            }
            '@' => {
                let mut path = String::new();
                while let Some(&c) = s.chars.peek() {
                    if is_path_char(c) {
                        path.push(c);
                        s.bump();
                    } else {
                        break;
                    }
                }
                if path.is_empty() {
                    return Err(ParseError::new(
                        line,
                        col,
                        "`@` must be followed by a program path".to_string(),
                    ));
                }
                Tok::AtRef(path)
            }
            c if c.is_ascii_digit() => {
                let mut digits = String::from(c);
                while let Some(&c) = s.chars.peek() {
                    if c.is_ascii_digit() {
                        digits.push(c);
                        s.bump();
                    } else {
                        break;
                    }
                }
                Tok::Int(digits.parse().expect("digits form an integer"))
            }
            c if is_ident_start(c) => {
                let mut name = String::from(c);
                while let Some(&c) = s.chars.peek() {
                    if is_ident_continue(c) {
                        name.push(c);
                        s.bump();
                    } else {
                        break;
                    }
                }
                match name.as_str() {
                    "_" => Tok::Underscore,
                    "skip" => Tok::KwSkip,
                    "if" => Tok::KwIf,
                    "else" => Tok::KwElse,
                    "while" => Tok::KwWhile,
                    "true" => Tok::KwTrue,
                    "false" => Tok::KwFalse,
                    "forall" => Tok::KwForall,
                    "exists" => Tok::KwExists,
                    "in" => Tok::KwIn,
                    _ => Tok::Ident(name),
                }
            }
            other => {
                return Err(ParseError::new(
                    line,
                    col,
                    format!("unexpected character `{other}`"),
                ));
            }
        };
        out.push(Token { tok, line, col });
    }
}
