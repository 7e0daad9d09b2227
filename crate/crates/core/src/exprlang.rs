//! A small expression language over the phase-space coordinates `q` and `p`.
//!
//! Grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := ['-'] atom ['^' int]
//! atom   := number | 'q' | 'p' | func '(' expr ')' | '(' expr ')'
//! func   := 'sin' | 'cos' | 'exp' | 'tanh'
//! ```
//!
//! `-a^n` parses as `-(a^n)`. Exponents are (optionally signed) integers.
//! Printing is fully parenthesised so `parse(print(e))` rebuilds `e` exactly.

use std::fmt;

use crate::error::{Error, Result};
use crate::numgrid::{PhaseGrid, RealField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    Q,
    P,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Tanh,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Tanh => "tanh",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "tanh" => Func::Tanh,
            _ => return None,
        })
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Exp => x.exp(),
            Func::Tanh => x.tanh(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn num(x: f64) -> Self {
        Expr::Num(x)
    }

    pub fn q() -> Self {
        Expr::Var(Var::Q)
    }

    pub fn p() -> Self {
        Expr::Var(Var::P)
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Expr::Num(x) => Some(*x),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_num() == Some(0.0)
    }

    pub fn eval(&self, q: f64, p: f64) -> f64 {
        match self {
            Expr::Num(x) => *x,
            Expr::Var(Var::Q) => q,
            Expr::Var(Var::P) => p,
            Expr::Neg(a) => -a.eval(q, p),
            Expr::Add(a, b) => a.eval(q, p) + b.eval(q, p),
            Expr::Sub(a, b) => a.eval(q, p) - b.eval(q, p),
            Expr::Mul(a, b) => a.eval(q, p) * b.eval(q, p),
            Expr::Div(a, b) => a.eval(q, p) / b.eval(q, p),
            Expr::Pow(a, n) => a.eval(q, p).powi(*n),
            Expr::Call(f, a) => f.apply(a.eval(q, p)),
        }
    }

    /// Evaluates and reports a domain error if the result is not finite.
    pub fn try_eval(&self, q: f64, p: f64) -> Result<f64> {
        let v = self.eval(q, p);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain { expr: self.to_string(), q, p })
        }
    }

    pub fn depends_on(&self, var: Var) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(v) => *v == var,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.depends_on(var),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.depends_on(var) || b.depends_on(var)
            }
        }
    }

    // Folding constructors. Only exact identities are applied.

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Num(x) => Expr::Num(-x),
            Expr::Neg(inner) => *inner,
            a => Expr::Neg(Box::new(a)),
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) if (x + y).is_finite() => Expr::Num(x + y),
            (Some(x), _) if x == 0.0 => b,
            (_, Some(y)) if y == 0.0 => a,
            _ => Expr::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) if (x - y).is_finite() => Expr::Num(x - y),
            (Some(x), _) if x == 0.0 => Expr::neg(b),
            (_, Some(y)) if y == 0.0 => a,
            _ => Expr::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) if (x * y).is_finite() => Expr::Num(x * y),
            (Some(x), _) | (_, Some(x)) if x == 0.0 => Expr::Num(0.0),
            (Some(x), _) if x == 1.0 => b,
            (_, Some(y)) if y == 1.0 => a,
            (Some(x), _) if x == -1.0 => Expr::neg(b),
            (_, Some(y)) if y == -1.0 => Expr::neg(a),
            _ => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) if y != 0.0 && (x / y).is_finite() => Expr::Num(x / y),
            (Some(x), Some(y)) if x == 0.0 && y != 0.0 => Expr::Num(0.0),
            (Some(x), None) if x == 0.0 => Expr::Num(0.0),
            (_, Some(y)) if y == 1.0 => a,
            _ => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn pow(a: Expr, n: i32) -> Expr {
        match (a.as_num(), n) {
            (_, 0) => Expr::Num(1.0),
            (_, 1) => a,
            (Some(x), n) if x.powi(n).is_finite() => Expr::Num(x.powi(n)),
            _ => Expr::Pow(Box::new(a), n),
        }
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        match a.as_num() {
            Some(x) if f.apply(x).is_finite() => Expr::Num(f.apply(x)),
            _ => Expr::Call(f, Box::new(a)),
        }
    }
}

/// Exact symbolic partial derivative with constant folding.
pub fn diff(e: &Expr, var: Var) -> Expr {
    match e {
        Expr::Num(_) => Expr::Num(0.0),
        Expr::Var(v) => Expr::Num(if *v == var { 1.0 } else { 0.0 }),
        Expr::Neg(a) => Expr::neg(diff(a, var)),
        Expr::Add(a, b) => Expr::add(diff(a, var), diff(b, var)),
        Expr::Sub(a, b) => Expr::sub(diff(a, var), diff(b, var)),
        Expr::Mul(a, b) => Expr::add(
            Expr::mul(diff(a, var), (**b).clone()),
            Expr::mul((**a).clone(), diff(b, var)),
        ),
        Expr::Div(a, b) => {
            if !b.depends_on(var) {
                Expr::div(diff(a, var), (**b).clone())
            } else {
                // (a'b - ab') / b^2
                Expr::div(
                    Expr::sub(
                        Expr::mul(diff(a, var), (**b).clone()),
                        Expr::mul((**a).clone(), diff(b, var)),
                    ),
                    Expr::pow((**b).clone(), 2),
                )
            }
        }
        Expr::Pow(a, n) => Expr::mul(
            Expr::mul(Expr::Num(*n as f64), Expr::pow((**a).clone(), n - 1)),
            diff(a, var),
        ),
        Expr::Call(f, a) => {
            let inner = (**a).clone();
            let outer = match f {
                Func::Sin => Expr::call(Func::Cos, inner),
                Func::Cos => Expr::neg(Expr::call(Func::Sin, inner)),
                Func::Exp => Expr::call(Func::Exp, inner),
                Func::Tanh => Expr::sub(Expr::Num(1.0), Expr::pow(Expr::call(Func::Tanh, inner), 2)),
            };
            Expr::mul(outer, diff(a, var))
        }
    }
}

/// Pointwise evaluation on the full grid; the first non-finite sample is
/// reported as a domain error.
pub fn eval_on_grid(e: &Expr, grid: &PhaseGrid) -> Result<RealField> {
    let qs = grid.q.points();
    let ps = grid.p.points();
    for &q in &qs {
        for &p in &ps {
            e.try_eval(q, p)?;
        }
    }
    Ok(RealField::from_fn(*grid, |q, p| e.eval(q, p)))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) if *x < 0.0 || (*x == 0.0 && x.is_sign_negative()) => {
                write!(f, "(-{:?})", -x)
            }
            Expr::Num(x) => write!(f, "{x:?}"),
            Expr::Var(Var::Q) => f.write_str("q"),
            Expr::Var(Var::P) => f.write_str("p"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a}+{b})"),
            Expr::Sub(a, b) => write!(f, "({a}-{b})"),
            Expr::Mul(a, b) => write!(f, "({a}*{b})"),
            Expr::Div(a, b) => write!(f, "({a}/{b})"),
            Expr::Pow(a, n) => write!(f, "({a}^{n})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

pub fn parse(text: &str) -> Result<Expr> {
    let mut parser = Parser { src: text.as_bytes(), pos: 0 };
    let e = parser.expr()?;
    parser.skip_ws();
    if parser.pos < parser.src.len() {
        return Err(parser.syntax("unexpected trailing input"));
    }
    Ok(e)
}

impl std::str::FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn syntax(&self, message: &str) -> Error {
        Error::Syntax { offset: self.pos, message: message.to_string() }
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

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(&format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if c == b'+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            if c == b'*' && self.src.get(self.pos) == Some(&b'*') {
                return Err(self.syntax("'**' is not an operator; use '^'"));
            }
            let rhs = self.factor()?;
            lhs = if c == b'*' {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        let negate = if self.peek() == Some(b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let mut base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let n = self.integer()?;
            base = Expr::Pow(Box::new(base), n);
        }
        Ok(if negate { Expr::Neg(Box::new(base)) } else { base })
    }

    fn integer(&mut self) -> Result<i32> {
        self.skip_ws();
        let start = self.pos;
        if self.src.get(self.pos) == Some(&b'-') {
            self.pos += 1;
        }
        let digits = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == digits {
            self.pos = start;
            return Err(self.syntax("expected an integer exponent"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse().map_err(|_| Error::Syntax {
            offset: start,
            message: format!("exponent `{text}` out of range"),
        })
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                match name {
                    "q" => Ok(Expr::q()),
                    "p" => Ok(Expr::p()),
                    _ => match Func::from_name(name) {
                        Some(func) => {
                            self.expect(b'(')?;
                            let arg = self.expr()?;
                            self.expect(b')')?;
                            Ok(Expr::Call(func, Box::new(arg)))
                        }
                        None => Err(Error::UnknownIdentifier { name: name.to_string(), offset: start }),
                    },
                }
            }
            Some(_) => Err(self.syntax("unexpected character")),
            None => Err(self.syntax("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let s = self.src;
        let digits = |pos: &mut usize| {
            let from = *pos;
            while *pos < s.len() && s[*pos].is_ascii_digit() {
                *pos += 1;
            }
            *pos - from
        };
        let mut n = digits(&mut self.pos);
        if self.pos < s.len() && s[self.pos] == b'.' {
            self.pos += 1;
            n += digits(&mut self.pos);
        }
        if n == 0 {
            return Err(self.syntax("malformed number"));
        }
        if self.pos < s.len() && (s[self.pos] == b'e' || s[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < s.len() && (s[self.pos] == b'+' || s[self.pos] == b'-') {
                self.pos += 1;
            }
            if digits(&mut self.pos) == 0 {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&s[start..self.pos]).expect("ascii");
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| Error::Syntax { offset: start, message: format!("malformed number `{text}`") })
    }
}
