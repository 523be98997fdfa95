//! Arithmetic expressions in the two weight arguments `x` and `y`.
//!
//! Grammar (whitespace is ignored):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?            right associative
//! atom   := number | 'x' | 'y' | 'pi' | 'e'
//!         | name '(' expr (',' expr)* ')'
//!         | '(' expr ')'
//! name   := pow | min | max | sqrt | abs | exp | ln | log
//! ```
//!
//! `pow`, `min` and `max` take two arguments, the rest one. `log` is the
//! natural logarithm. Numbers accept the usual decimal and exponent forms
//! (`2`, `0.5`, `1e-3`).

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    X,
    Y,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
    Sqrt(Box<Expr>),
    Abs(Box<Expr>),
    Exp(Box<Expr>),
    Ln(Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self> {
        let mut p = Parser {
            src: src.as_bytes(),
            pos: 0,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        use Expr::*;
        match self {
            Const(c) => *c,
            X => x,
            Y => y,
            Neg(a) => -a.eval(x, y),
            Add(a, b) => a.eval(x, y) + b.eval(x, y),
            Sub(a, b) => a.eval(x, y) - b.eval(x, y),
            Mul(a, b) => a.eval(x, y) * b.eval(x, y),
            Div(a, b) => a.eval(x, y) / b.eval(x, y),
            Pow(a, b) => a.eval(x, y).powf(b.eval(x, y)),
            Min(a, b) => a.eval(x, y).min(b.eval(x, y)),
            Max(a, b) => a.eval(x, y).max(b.eval(x, y)),
            Sqrt(a) => a.eval(x, y).sqrt(),
            Abs(a) => a.eval(x, y).abs(),
            Exp(a) => a.eval(x, y).exp(),
            Ln(a) => a.eval(x, y).ln(),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Expression {
            offset: self.pos,
            message: message.to_string(),
        }
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

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.error("unexpected end of expression")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.name(),
            Some(_) => Err(self.error("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let s = self.src;
        let mut i = self.pos;
        while i < s.len() && (s[i].is_ascii_digit() || s[i] == b'.') {
            i += 1;
        }
        if i < s.len() && (s[i] == b'e' || s[i] == b'E') {
            let mut j = i + 1;
            if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
                j += 1;
            }
            if j < s.len() && s[j].is_ascii_digit() {
                while j < s.len() && s[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        let text = std::str::from_utf8(&s[start..i]).expect("ascii slice");
        self.pos = i;
        text.parse::<f64>()
            .map(Expr::Const)
            .map_err(|_| Error::Expression {
                offset: start,
                message: format!("malformed number '{text}'"),
            })
    }

    fn name(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        match name {
            "x" => return Ok(Expr::X),
            "y" => return Ok(Expr::Y),
            "pi" => return Ok(Expr::Const(std::f64::consts::PI)),
            "e" => return Ok(Expr::Const(std::f64::consts::E)),
            _ => {}
        }
        let arity = match name {
            "pow" | "min" | "max" => 2,
            "sqrt" | "abs" | "exp" | "ln" | "log" => 1,
            _ => {
                return Err(Error::Expression {
                    offset: start,
                    message: format!("unknown identifier '{name}'"),
                })
            }
        };
        self.expect(b'(')?;
        let mut args = vec![self.expr()?];
        while self.eat(b',') {
            args.push(self.expr()?);
        }
        self.expect(b')')?;
        if args.len() != arity {
            return Err(Error::Expression {
                offset: start,
                message: format!("'{name}' takes {arity} argument(s), got {}", args.len()),
            });
        }
        let mut args = args.into_iter().map(Box::new);
        let a = args.next().expect("arity checked");
        Ok(match name {
            "pow" => Expr::Pow(a, args.next().expect("arity checked")),
            "min" => Expr::Min(a, args.next().expect("arity checked")),
            "max" => Expr::Max(a, args.next().expect("arity checked")),
            "sqrt" => Expr::Sqrt(a),
            "abs" => Expr::Abs(a),
            "exp" => Expr::Exp(a),
            _ => Expr::Ln(a),
        })
    }
}
