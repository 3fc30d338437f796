//! Arithmetic expressions in `t` and `x`.

use std::fmt;

use bernfrac_core::special;
use thiserror::Error;

/// Byte range into the parsed source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    fn join(self, other: Span) -> Span {
        Span {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    T,
    X,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Pow,
    Gamma,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Sin,
        Func::Cos,
        Func::Exp,
        Func::Ln,
        Func::Sqrt,
        Func::Abs,
        Func::Pow,
        Func::Gamma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Pow => "pow",
            Func::Gamma => "gamma",
        }
    }

    pub fn arity(self) -> usize {
        if self == Func::Pow {
            2
        } else {
            1
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

/// Expression node. Equality ignores spans.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Expr {
    pub fn new(kind: ExprKind) -> Self {
        Expr {
            kind,
            span: Span::default(),
        }
    }

    pub fn num(v: f64) -> Self {
        Expr::new(ExprKind::Num(v))
    }

    pub fn var(v: Var) -> Self {
        Expr::new(ExprKind::Var(v))
    }

    pub fn negate(e: Expr) -> Self {
        Expr::new(ExprKind::Neg(Box::new(e)))
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Self {
        Expr::new(ExprKind::Bin(op, Box::new(a), Box::new(b)))
    }

    pub fn call(f: Func, args: Vec<Expr>) -> Self {
        Expr::new(ExprKind::Call(f, args))
    }

    /// Evaluates at `(t, x)`. Any non-finite intermediate is reported at the
    /// node that produced it.
    pub fn eval(&self, t: f64, x: f64) -> Result<f64, EvalError> {
        let v = match &self.kind {
            ExprKind::Num(v) => *v,
            ExprKind::Var(Var::T) => t,
            ExprKind::Var(Var::X) => x,
            ExprKind::Neg(e) => -e.eval(t, x)?,
            ExprKind::Bin(op, a, b) => {
                let (a, b) = (a.eval(t, x)?, b.eval(t, x)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div if b == 0.0 => return Err(self.fail("division by zero")),
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            ExprKind::Call(f, args) => {
                let a = args[0].eval(t, x)?;
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Ln if a <= 0.0 => return Err(self.fail("ln of a non-positive number")),
                    Func::Ln => a.ln(),
                    Func::Sqrt if a < 0.0 => return Err(self.fail("sqrt of a negative number")),
                    Func::Sqrt => a.sqrt(),
                    Func::Abs => a.abs(),
                    Func::Pow => a.powf(args[1].eval(t, x)?),
                    Func::Gamma => special::gamma(a).map_err(|e| self.fail(&e.to_string()))?,
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.fail("non-finite result"))
        }
    }

    fn fail(&self, msg: &str) -> EvalError {
        EvalError {
            span: self.span,
            message: msg.to_string(),
        }
    }

    // binding strength used by the printer: atoms 4, ^ 3, unary minus 2,
    // * / 1, + - 0
    fn level(&self) -> u8 {
        match &self.kind {
            ExprKind::Num(_) | ExprKind::Var(_) | ExprKind::Call(..) => 4,
            ExprKind::Bin(BinOp::Pow, ..) => 3,
            ExprKind::Neg(_) => 2,
            ExprKind::Bin(BinOp::Mul | BinOp::Div, ..) => 1,
            ExprKind::Bin(..) => 0,
        }
    }
}

fn wrap(f: &mut fmt::Formatter<'_>, e: &Expr, min_level: u8) -> fmt::Result {
    if e.level() >= min_level {
        write!(f, "{e}")
    } else {
        write!(f, "({e})")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Num(v) => write!(f, "{v}"),
            ExprKind::Var(Var::T) => f.write_str("t"),
            ExprKind::Var(Var::X) => f.write_str("x"),
            ExprKind::Neg(e) => {
                f.write_str("-")?;
                wrap(f, e, 2)
            }
            ExprKind::Bin(op, a, b) => {
                let (left, right, sep) = match op {
                    BinOp::Pow => (4, 2, ""),
                    BinOp::Mul | BinOp::Div => (1, 2, ""),
                    BinOp::Add | BinOp::Sub => (0, 1, " "),
                };
                wrap(f, a, left)?;
                write!(f, "{sep}{}{sep}", op.symbol())?;
                wrap(f, b, right)
            }
            ExprKind::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("cannot evaluate {message} at bytes {}..{}", span.start, span.end)]
pub struct EvalError {
    pub span: Span,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("syntax error at byte {offset}: expected {}, found {found}", expected.join(" or "))]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<&'static str>,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "number {v}"),
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v = text.parse::<f64>().map_err(|_| ParseError {
                offset: start,
                expected: vec!["number"],
                found: format!("`{text}`"),
            })?;
            out.push((Tok::Num(v), Span { start, end: i }));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((
                Tok::Ident(src[start..i].to_string()),
                Span { start, end: i },
            ));
        } else if b"+-*/^(),".contains(&c) {
            i += 1;
            out.push((Tok::Sym(c as char), Span { start, end: i }));
        } else {
            let ch = src[start..].chars().next().unwrap_or('?');
            return Err(ParseError {
                offset: start,
                expected: vec!["expression"],
                found: format!("`{ch}`"),
            });
        }
    }
    out.push((
        Tok::End,
        Span {
            start: src.len(),
            end: src.len(),
        },
    ));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

const OPERAND: [&str; 5] = ["number", "t", "x", "function", "`(`"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&'static str]) -> ParseError {
        ParseError {
            offset: self.span().start,
            expected: expected.to_vec(),
            found: self.peek().to_string(),
        }
    }

    fn expect(&mut self, c: char, name: &'static str) -> Result<Span, ParseError> {
        if *self.peek() == Tok::Sym(c) {
            Ok(self.bump().1)
        } else {
            Err(self.error(&[name]))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = joined(ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = joined(ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Sym('-') {
            let start = self.bump().1;
            let inner = self.unary()?;
            let span = start.join(inner.span);
            return Ok(Expr {
                kind: ExprKind::Neg(Box::new(inner)),
                span,
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Sym('^') {
            return Ok(base);
        }
        self.bump();
        // right-associative, and the exponent may carry its own sign
        let exp = self.unary()?;
        Ok(joined(ExprKind::Bin(
            BinOp::Pow,
            Box::new(base),
            Box::new(exp),
        )))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr {
                    kind: ExprKind::Num(v),
                    span,
                })
            }
            Tok::Sym('(') => {
                self.bump();
                let inner = self.expr()?;
                let close = self.expect(')', "`)`")?;
                Ok(Expr {
                    kind: inner.kind,
                    span: span.join(close),
                })
            }
            Tok::Ident(name) => match name.as_str() {
                "t" => {
                    self.bump();
                    Ok(Expr {
                        kind: ExprKind::Var(Var::T),
                        span,
                    })
                }
                "x" => {
                    self.bump();
                    Ok(Expr {
                        kind: ExprKind::Var(Var::X),
                        span,
                    })
                }
                _ => {
                    let func = Func::from_name(&name).ok_or_else(|| self.error(&OPERAND))?;
                    self.bump();
                    self.expect('(', "`(`")?;
                    let mut args = vec![self.expr()?];
                    while *self.peek() == Tok::Sym(',') {
                        self.bump();
                        args.push(self.expr()?);
                    }
                    if args.len() != func.arity() {
                        let expected: &'static str = if args.len() < func.arity() {
                            "`,`"
                        } else {
                            "`)`"
                        };
                        return Err(ParseError {
                            offset: span.start,
                            expected: vec![expected],
                            found: format!("{} arguments to {}", args.len(), func.name()),
                        });
                    }
                    let close = self.expect(')', "`)`")?;
                    Ok(Expr {
                        kind: ExprKind::Call(func, args),
                        span: span.join(close),
                    })
                }
            },
            _ => Err(self.error(&OPERAND)),
        }
    }
}

fn joined(kind: ExprKind) -> Expr {
    let span = match &kind {
        ExprKind::Bin(_, a, b) => a.span.join(b.span),
        _ => Span::default(),
    };
    Expr { kind, span }
}

/// Parses `src` with the usual precedence: `^` (right-associative) binds
/// tightest, then unary minus, then `*` `/`, then `+` `-`.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error(&["operator", "end of input"]));
    }
    Ok(e)
}
