//! A tiny arithmetic language for boundary weights `ρ`.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | 'pi' | 't' | 'theta' | 's' | func '(' expr ')' | '(' expr ')'
//! func   := 'cos' | 'sin'
//! ```
//!
//! `t` (or `theta`) is the azimuthal boundary angle; `s` is the first polar
//! angle of the hyperspherical parametrization and needs `n >= 3`.

use std::fmt;

use crate::error::{Error, Result};

const MAX_DEPTH: usize = 64;
const MAX_LEN: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Azimuth,
    Polar,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Cos(Box<Expr>),
    Sin(Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        if src.len() > MAX_LEN {
            return Err(Error::Parse { offset: MAX_LEN, message: "expression too long".into() });
        }
        let mut p = Parser { src: src.as_bytes(), pos: 0, depth: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }

    /// Evaluates at a boundary parameter point `(φ_1, …, φ_{n-2}, θ)`.
    pub fn eval(&self, params: &[f64]) -> f64 {
        use Expr::*;
        match self {
            Num(v) => *v,
            Azimuth => params.last().copied().unwrap_or(f64::NAN),
            Polar => {
                if params.len() >= 2 {
                    params[0]
                } else {
                    f64::NAN
                }
            }
            Neg(a) => -a.eval(params),
            Add(a, b) => a.eval(params) + b.eval(params),
            Sub(a, b) => a.eval(params) - b.eval(params),
            Mul(a, b) => a.eval(params) * b.eval(params),
            Div(a, b) => a.eval(params) / b.eval(params),
            Pow(a, b) => a.eval(params).powf(b.eval(params)),
            Cos(a) => a.eval(params).cos(),
            Sin(a) => a.eval(params).sin(),
        }
    }

    /// Whether the polar angle `s` occurs.
    pub fn uses_polar(&self) -> bool {
        use Expr::*;
        match self {
            Num(_) | Azimuth => false,
            Polar => true,
            Neg(a) | Cos(a) | Sin(a) => a.uses_polar(),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) | Pow(a, b) => a.uses_polar() || b.uses_polar(),
        }
    }

    /// The value if the expression has no free variables.
    pub fn as_constant(&self) -> Option<f64> {
        use Expr::*;
        match self {
            Num(v) => Some(*v),
            Azimuth | Polar => None,
            Neg(a) | Cos(a) | Sin(a) => a.as_constant().map(|_| self.eval(&[])),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) | Pow(a, b) => {
                a.as_constant().and(b.as_constant()).map(|_| self.eval(&[]))
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Expr::*;
        match self {
            Num(v) => write!(f, "{v:?}"),
            Azimuth => write!(f, "t"),
            Polar => write!(f, "s"),
            Neg(a) => write!(f, "(-{a})"),
            Add(a, b) => write!(f, "({a} + {b})"),
            Sub(a, b) => write!(f, "({a} - {b})"),
            Mul(a, b) => write!(f, "({a} * {b})"),
            Div(a, b) => write!(f, "({a} / {b})"),
            Pow(a, b) => write!(f, "({a} ^ {b})"),
            Cos(a) => write!(f, "cos({a})"),
            Sin(a) => write!(f, "sin({a})"),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    depth: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Parse { offset: self.pos, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn enter(&mut self) -> Result<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.error("expression nested too deeply"));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr> {
        self.enter()?;
        let mut lhs = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if c == b'+' { Expr::Add(lhs.into(), rhs.into()) } else { Expr::Sub(lhs.into(), rhs.into()) };
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if c == b'*' { Expr::Mul(lhs.into(), rhs.into()) } else { Expr::Div(lhs.into(), rhs.into()) };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            self.enter()?;
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::Neg(inner.into()));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.enter()?;
            let exp = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::Pow(base.into(), exp.into()));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let word = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                match word {
                    "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                    "t" | "theta" => Ok(Expr::Azimuth),
                    "s" => Ok(Expr::Polar),
                    "cos" | "sin" => {
                        self.expect(b'(')?;
                        let arg = self.expr()?;
                        self.expect(b')')?;
                        Ok(if word == "cos" { Expr::Cos(arg.into()) } else { Expr::Sin(arg.into()) })
                    }
                    _ => Err(Error::Parse { offset: start, message: format!("unknown identifier `{word}`") }),
                }
            }
            Some(_) => Err(self.error("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            let exp_start = self.pos;
            digits(self);
            if self.pos == exp_start {
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| Error::Parse { offset: start, message: format!("malformed number `{text}`") })
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected `{}`", c as char)))
        }
    }
}
