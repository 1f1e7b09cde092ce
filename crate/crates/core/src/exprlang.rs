//! Closed-form coordinate expressions: parser, pretty-printer and evaluators.
//!
//! Grammar (left associative, usual precedence):
//!
//! ```text
//! expr  := term (('+'|'-') term)*
//! term  := unary (('*'|'/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' int)?
//! atom  := number | ident | fn '(' expr ')' | '(' expr ')'
//! fn    := sin | cos | tan | sinh | cosh | tanh | exp | ln | sqrt
//! ```
//!
//! Identifiers are bound at parse time to one of the four chart coordinates
//! or to a named parameter; parameter values are supplied at evaluation time
//! through a [`ParamEnv`].

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jets::{Jet3, JetError, NVARS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 9] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Exp,
        Func::Ln,
        Func::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

/// Bound expression tree. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Coord { index: usize, name: String },
    Param(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("exponent at byte {offset} is not an integer literal")]
    NonIntegerExponent { offset: usize },
    #[error("invalid binding: {0}")]
    Binding(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("parameter `{0}` has no value")]
    UnboundParameter(String),
}

/// Parameter values by name (`r0`, `L0`, `Lambda`, ...).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamEnv(BTreeMap<String, f64>);

impl ParamEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.0.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(|s| s.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains_key(name)
    }

    /// Overlay `other` on top of `self`.
    pub fn merged(&self, other: &ParamEnv) -> ParamEnv {
        let mut out = self.clone();
        for (k, v) in other.iter() {
            out.set(k, v);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, bool),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (tok, at) = lx.next()?;
            let eof = tok == Tok::Eof;
            out.push((tok, at));
            if eof {
                return Ok(out);
            }
        }
    }

    fn peek_byte(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        while matches!(self.peek_byte(), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(b) = self.peek_byte() else {
            return Ok((Tok::Eof, start));
        };
        let single = match b {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = single {
            self.pos += 1;
            return Ok((t, start));
        }
        if b.is_ascii_digit() || b == b'.' {
            return self.number(start);
        }
        if b.is_ascii_alphabetic() || b == b'_' {
            while matches!(self.peek_byte(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                self.pos += 1;
            }
            return Ok((Tok::Ident(self.src[start..self.pos].to_string()), start));
        }
        let ch = self.src[start..].chars().next().unwrap_or('?');
        Err(ParseError::Syntax {
            offset: start,
            message: format!("unexpected character `{ch}`"),
        })
    }

    fn number(&mut self, start: usize) -> Result<(Tok, usize), ParseError> {
        let digits = |lx: &mut Self| {
            let s = lx.pos;
            while matches!(lx.peek_byte(), Some(c) if c.is_ascii_digit()) {
                lx.pos += 1;
            }
            lx.pos - s
        };
        let mut integral = true;
        let mut n = digits(self);
        if self.peek_byte() == Some(b'.') {
            integral = false;
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            return Err(ParseError::Syntax {
                offset: start,
                message: "malformed number".into(),
            });
        }
        if matches!(self.peek_byte(), Some(b'e') | Some(b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek_byte(), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
            } else {
                integral = false;
            }
        }
        let text = &self.src[start..self.pos];
        let v: f64 = text.parse().map_err(|_| ParseError::Syntax {
            offset: start,
            message: format!("malformed number `{text}`"),
        })?;
        Ok((Tok::Num(v, integral), start))
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    coords: &'a [String],
    params: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn offset(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn syntax<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let offset = self.offset();
        match self.bump().0 {
            Tok::Num(v, true) if v <= u32::MAX as f64 => Ok(Expr::Pow(Box::new(base), v as u32)),
            _ => Err(ParseError::NonIntegerExponent { offset }),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (tok, offset) = self.bump();
        match tok {
            Tok::Num(v, _) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    let f = Func::from_name(&name)
                        .ok_or(ParseError::UnknownFunction { name, offset })?;
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                if let Some(index) = self.coords.iter().position(|c| *c == name) {
                    Ok(Expr::Coord { index, name })
                } else if self.params.contains(&name) {
                    Ok(Expr::Param(name))
                } else {
                    Err(ParseError::UnknownIdentifier { name, offset })
                }
            }
            Tok::Eof => Err(ParseError::Syntax {
                offset,
                message: "unexpected end of input".into(),
            }),
            other => Err(ParseError::Syntax {
                offset,
                message: format!("unexpected token {other:?}"),
            }),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            self.syntax("expected `)`")
        }
    }
}

/// Validate a coordinate/parameter binding: four distinct coordinate
/// names, disjoint from the parameter names.
pub fn check_binding(coords: &[String], params: &[String]) -> Result<(), ParseError> {
    if coords.len() != NVARS {
        return Err(ParseError::Binding(format!(
            "expected {NVARS} coordinate names, got {}",
            coords.len()
        )));
    }
    for (i, c) in coords.iter().enumerate() {
        if coords[..i].contains(c) {
            return Err(ParseError::Binding(format!("duplicate coordinate `{c}`")));
        }
        if params.contains(c) {
            return Err(ParseError::Binding(format!(
                "`{c}` is both a coordinate and a parameter"
            )));
        }
    }
    Ok(())
}

pub fn parse_expr(source: &str, coords: &[String], params: &[String]) -> Result<Expr, ParseError> {
    check_binding(coords, params)?;
    if source.trim().is_empty() {
        return Err(ParseError::Syntax {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let toks = Lexer::tokens(source)?;
    let mut p = Parser {
        toks,
        at: 0,
        coords,
        params,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return p.syntax("unexpected trailing input");
    }
    Ok(e)
}

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, ..) => op.precedence(),
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(v) if *v < 0.0 || v.is_sign_negative() => 3,
            _ => 5,
        }
    }

    /// Scalar value at a point.
    pub fn eval(&self, point: &[f64; NVARS], env: &ParamEnv) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Coord { index, .. } => point[*index],
            Expr::Param(name) => env
                .get(name)
                .ok_or_else(|| EvalError::UnboundParameter(name.clone()))?,
            Expr::Neg(e) => -e.eval(point, env)?,
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.eval(point, env)?, b.eval(point, env)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(JetError::DivisionByZero(b).into());
                        }
                        a / b
                    }
                }
            }
            Expr::Pow(e, n) => e.eval(point, env)?.powi(*n as i32),
            Expr::Call(f, e) => {
                let x = e.eval(point, env)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tan => x.tan(),
                    Func::Sinh => x.sinh(),
                    Func::Cosh => x.cosh(),
                    Func::Tanh => x.tanh(),
                    Func::Exp => x.exp(),
                    Func::Ln | Func::Sqrt if x <= 0.0 => {
                        return Err(JetError::Domain {
                            function: f.name(),
                            value: x,
                        }
                        .into())
                    }
                    Func::Ln => x.ln(),
                    Func::Sqrt => x.sqrt(),
                }
            }
        })
    }

    /// Value and all partials through order three, by structural recursion.
    pub fn eval_jet(&self, point: &[f64; NVARS], env: &ParamEnv) -> Result<Jet3, EvalError> {
        Ok(match self {
            Expr::Num(v) => Jet3::constant(*v),
            Expr::Coord { index, .. } => Jet3::axis(*index, point),
            Expr::Param(name) => Jet3::constant(
                env.get(name)
                    .ok_or_else(|| EvalError::UnboundParameter(name.clone()))?,
            ),
            Expr::Neg(e) => -e.eval_jet(point, env)?,
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.eval_jet(point, env)?, b.eval_jet(point, env)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a.checked_div(&b)?,
                }
            }
            Expr::Pow(e, n) => e.eval_jet(point, env)?.powi(*n as i32)?,
            Expr::Call(f, e) => {
                let a = e.eval_jet(point, env)?;
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Tan => a.tan()?,
                    Func::Sinh => a.sinh(),
                    Func::Cosh => a.cosh(),
                    Func::Tanh => a.tanh(),
                    Func::Exp => a.exp(),
                    Func::Ln => a.ln()?,
                    Func::Sqrt => a.sqrt()?,
                }
            }
        })
    }

    /// Names of the parameters referenced by this expression.
    pub fn params(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Param(p) = e {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
        });
        out
    }

    fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => e.visit(f),
            Expr::Binary(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Coord { name, .. } => f.write_str(name),
            Expr::Param(name) => f.write_str(name),
            Expr::Neg(e) => {
                f.write_str("-")?;
                write_child(f, e, e.precedence() < 3)
            }
            Expr::Binary(op, a, b) => {
                let p = op.precedence();
                write_child(f, a, a.precedence() < p)?;
                write!(f, " {} ", op.symbol())?;
                write_child(f, b, b.precedence() <= p)
            }
            Expr::Pow(e, n) => {
                write_child(f, e, e.precedence() < 5)?;
                write!(f, "^{n}")
            }
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn chart() -> Vec<String> {
        ["t", "r", "theta", "phi"].iter().map(|s| s.to_string()).collect()
    }

    fn params() -> Vec<String> {
        ["r0", "L0"].iter().map(|s| s.to_string()).collect()
    }

    fn env() -> ParamEnv {
        ParamEnv::new().with("r0", 1.0).with("L0", 0.5)
    }

    #[test]
    fn metric_component_expression() {
        let e = parse_expr("-(r0^2/L0)*sin(r)^2", &chart(), &params()).unwrap();
        let v = e.eval(&[0.0, PI / 2.0, PI / 2.0, 0.0], &env()).unwrap();
        assert!((v + 2.0).abs() < 1e-15);
        let j = e.eval_jet(&[0.0, PI / 6.0, 1.0, 0.0], &env()).unwrap();
        assert!((j.value() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_literal() {
        let e = parse_expr("0", &chart(), &params()).unwrap();
        assert_eq!(e, Expr::Num(0.0));
        assert!(e.is_zero_literal());
    }

    #[test]
    fn unknown_identifier() {
        let err = parse_expr("sin(q)", &chart(), &params()).unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownIdentifier {
                name: "q".into(),
                offset: 4
            }
        );
    }

    #[test]
    fn unknown_function() {
        let err = parse_expr("1 + sec(r)", &chart(), &params()).unwrap_err();
        assert!(matches!(err, ParseError::UnknownFunction { ref name, offset: 4 } if name == "sec"));
    }

    #[test]
    fn exponents_must_be_integer_literals() {
        for src in ["r^2.5", "r^r0", "r^(2)", "r^-1", "r^1e2"] {
            let err = parse_expr(src, &chart(), &params()).unwrap_err();
            assert!(matches!(err, ParseError::NonIntegerExponent { offset: 2 }), "{src}: {err:?}");
        }
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        let err = parse_expr("r + * 2", &chart(), &params()).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { offset: 4, .. }));
        let err = parse_expr("(r + 2", &chart(), &params()).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { offset: 6, .. }));
        let err = parse_expr("r 2", &chart(), &params()).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { offset: 2, .. }));
        let err = parse_expr("r $ 2", &chart(), &params()).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { offset: 2, .. }));
        assert!(parse_expr("   ", &chart(), &params()).is_err());
    }

    #[test]
    fn precedence_and_associativity() {
        let c = chart();
        let p = params();
        let v = |s: &str| parse_expr(s, &c, &p).unwrap().eval(&[0.0; 4], &env()).unwrap();
        assert_eq!(v("2 - 3 - 4"), -5.0);
        assert_eq!(v("8 / 4 / 2"), 1.0);
        assert_eq!(v("-2^2"), -4.0);
        assert_eq!(v("2 + 3 * 4"), 14.0);
        assert_eq!(v("(2 + 3) * 4"), 20.0);
        assert_eq!(v("2 * -3"), -6.0);
        assert_eq!(v("1.5e1 + .5"), 15.5);
    }

    #[test]
    fn bad_bindings() {
        let dup: Vec<String> = ["t", "t", "x", "y"].iter().map(|s| s.to_string()).collect();
        assert!(matches!(parse_expr("t", &dup, &[]), Err(ParseError::Binding(_))));
        let clash = vec!["t".to_string()];
        assert!(matches!(parse_expr("t", &chart(), &clash), Err(ParseError::Binding(_))));
    }

    #[test]
    fn domain_errors_at_evaluation() {
        let e = parse_expr("ln(r - 1)", &chart(), &params()).unwrap();
        assert!(e.eval_jet(&[0.0, 0.5, 0.0, 0.0], &env()).is_err());
        assert!(e.eval(&[0.0, 0.5, 0.0, 0.0], &env()).is_err());
        let e = parse_expr("1 / (r - 1)", &chart(), &params()).unwrap();
        assert!(e.eval_jet(&[0.0, 1.0, 0.0, 0.0], &env()).is_err());
    }

    #[test]
    fn missing_parameter_value() {
        let e = parse_expr("r0 * r", &chart(), &params()).unwrap();
        let err = e.eval(&[0.0; 4], &ParamEnv::new()).unwrap_err();
        assert_eq!(err, EvalError::UnboundParameter("r0".into()));
    }

    #[test]
    fn sin_jet_values() {
        let e = parse_expr("sin(r)", &chart(), &params()).unwrap();
        let j = e.eval_jet(&[0.0, PI / 6.0, 0.0, 0.0], &env()).unwrap();
        let s3 = 3f64.sqrt();
        assert!((j.value() - 0.5).abs() < 1e-15);
        assert!((j.d1(1) - s3 / 2.0).abs() < 1e-15);
        assert!((j.d2(1, 1) + 0.5).abs() < 1e-15);
        assert!((j.d3(1, 1, 1) + s3 / 2.0).abs() < 1e-15);
    }

    #[test]
    fn constant_expression_jet() {
        let e = parse_expr("r0^2/L0", &chart(), &params()).unwrap();
        let j = e.eval_jet(&[0.1, 0.2, 0.3, 0.4], &ParamEnv::new().with("r0", 1.0).with("L0", 0.5)).unwrap();
        assert_eq!(j.value(), 2.0);
        assert!(j.coefficients()[1..].iter().all(|&c| c == 0.0));
    }

    #[test]
    fn display_reparses() {
        let c = chart();
        let p = params();
        for src in [
            "-(r0^2/L0)*sin(r)^2",
            "t - (r - phi)",
            "(2 + sin(r))*(2 + sin(theta))",
            "--r",
            "r - -theta",
            "(-r)^3",
            "r / (theta * phi)",
            "exp(ln(r)) ^ 2",
            "0.000001 * 1e300",
        ] {
            let e = parse_expr(src, &c, &p).unwrap();
            let printed = e.to_string();
            assert_eq!(parse_expr(&printed, &c, &p).unwrap(), e, "{src} -> {printed}");
        }
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let c = chart();
        let leaf = prop_oneof![
            (0u32..1000, 0i32..4).prop_map(|(m, e)| Expr::Num(m as f64 / 10f64.powi(e))),
            (0usize..4).prop_map(move |i| Expr::Coord { index: i, name: c[i].clone() }),
            prop::sample::select(vec!["r0", "L0"]).prop_map(|p| Expr::Param(p.to_string())),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                (prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div]), inner.clone(), inner.clone())
                    .prop_map(|(op, a, b)| Expr::Binary(op, Box::new(a), Box::new(b))),
                (inner.clone(), 0u32..5).prop_map(|(e, n)| Expr::Pow(Box::new(e), n)),
                (prop::sample::select(vec![Func::Sin, Func::Cos, Func::Exp, Func::Tanh]), inner)
                    .prop_map(|(f, e)| Expr::Call(f, Box::new(e))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_then_parse_is_identity(e in arb_expr()) {
            let printed = e.to_string();
            let back = parse_expr(&printed, &chart(), &params()).unwrap();
            prop_assert_eq!(back, e, "{}", printed);
        }

        #[test]
        fn jet_evaluation_is_linear(
            a in -3.0f64..3.0,
            e1 in arb_expr(),
            e2 in arb_expr(),
            x in prop::array::uniform4(0.1f64..1.4),
        ) {
            let env = env();
            let (Ok(j1), Ok(j2)) = (e1.eval_jet(&x, &env), e2.eval_jet(&x, &env)) else { return Ok(()) };
            let finite = |j: &Jet3| j.coefficients().iter().all(|c| c.is_finite());
            prop_assume!(finite(&j1) && finite(&j2));
            let combo = Expr::Binary(
                BinOp::Add,
                Box::new(Expr::Binary(BinOp::Mul, Box::new(Expr::Num(a)), Box::new(e1))),
                Box::new(e2),
            );
            let j = combo.eval_jet(&x, &env).unwrap();
            let want = j1 * a + j2;
            let scale = j1.max_abs() * a.abs() + j2.max_abs() + 1.0;
            prop_assume!(scale.is_finite() && scale < 1e12);
            for (u, v) in j.coefficients().iter().zip(want.coefficients()) {
                prop_assert!((u - v).abs() <= 1e-13 * scale, "{} vs {}", u, v);
            }
        }
    }
}
