//! Closed-form scalar expressions on the chart.
//!
//! Field inputs (tetrads, gauge parameters, tractor components, dilatons)
//! are expression trees over a small grammar: `+ - * / ^<int> exp log`,
//! numeric constants and the coordinates `x0..x3`. Expressions evaluate to
//! jets, so every derivative the engine consumes is exact. The textual form
//! is what scenario files store.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jet::{Jet, JetF, MAX_ORDER};

/// Scalar expression over the chart coordinates.
#[derive(Clone, Debug)]
pub enum Expr {
    Const(f64),
    /// Coordinate x0..x3.
    Var(usize),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    Neg(Arc<Expr>),
    Pow(Arc<Expr>, i32),
    Exp(Arc<Expr>),
    Log(Arc<Expr>),
}

impl Expr {
    pub fn constant(v: f64) -> Self {
        Expr::Const(v)
    }

    pub fn var(mu: usize) -> Self {
        assert!(mu < 4);
        Expr::Var(mu)
    }

    pub fn add(self, rhs: Expr) -> Self {
        Expr::Add(Arc::new(self), Arc::new(rhs))
    }

    pub fn sub(self, rhs: Expr) -> Self {
        Expr::Sub(Arc::new(self), Arc::new(rhs))
    }

    pub fn mul(self, rhs: Expr) -> Self {
        Expr::Mul(Arc::new(self), Arc::new(rhs))
    }

    pub fn div(self, rhs: Expr) -> Self {
        Expr::Div(Arc::new(self), Arc::new(rhs))
    }

    pub fn neg(self) -> Self {
        Expr::Neg(Arc::new(self))
    }

    pub fn powi(self, n: i32) -> Self {
        Expr::Pow(Arc::new(self), n)
    }

    pub fn exp(self) -> Self {
        Expr::Exp(Arc::new(self))
    }

    pub fn log(self) -> Self {
        Expr::Log(Arc::new(self))
    }

    /// Evaluate to a jet at `x`, carrying derivatives to `order`.
    pub fn eval_jet(&self, x: &[f64; 4], order: usize) -> Result<JetF> {
        if order > MAX_ORDER {
            return Err(Error::OrderExceeded { needed: order, available: MAX_ORDER });
        }
        match self {
            Expr::Const(v) => Ok(Jet::constant(*v, order)),
            Expr::Var(mu) => Ok(Jet::variable(*mu, x[*mu], order)),
            Expr::Add(a, b) => Ok(a.eval_jet(x, order)? + b.eval_jet(x, order)?),
            Expr::Sub(a, b) => Ok(a.eval_jet(x, order)? - b.eval_jet(x, order)?),
            Expr::Mul(a, b) => Ok(a.eval_jet(x, order)? * b.eval_jet(x, order)?),
            Expr::Div(a, b) => {
                let d = b.eval_jet(x, order)?;
                let r = d.recip().map_err(|e| e.at_point("division", x))?;
                Ok(a.eval_jet(x, order)? * r)
            }
            Expr::Neg(a) => Ok(-a.eval_jet(x, order)?),
            Expr::Pow(a, n) => {
                a.eval_jet(x, order)?.powi(*n).map_err(|e| e.at_point("power", x))
            }
            Expr::Exp(a) => Ok(a.eval_jet(x, order)?.exp()),
            Expr::Log(a) => a.eval_jet(x, order)?.ln().map_err(|e| e.at_point("log", x)),
        }
    }

    /// Plain value at `x`.
    pub fn eval(&self, x: &[f64; 4]) -> Result<f64> {
        Ok(self.eval_jet(x, 0)?.value())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => write!(f, "{v}"),
            Expr::Var(mu) => write!(f, "x{mu}"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Pow(a, n) => write!(f, "({a}^{n})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Log(a) => write!(f, "log({a})"),
        }
    }
}

impl FromStr for Expr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser { src: s.as_bytes(), pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(Error::Parse(format!(
                "unexpected trailing input at byte {} in {s:?}",
                p.pos
            )));
        }
        Ok(e)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        Some(c)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.pos += 1;
                    acc = acc.add(self.term()?);
                }
                b'-' => {
                    self.pos += 1;
                    acc = acc.sub(self.term()?);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        while let Some(c) = self.peek() {
            match c {
                b'*' => {
                    self.pos += 1;
                    acc = acc.mul(self.unary()?);
                }
                b'/' => {
                    self.pos += 1;
                    acc = acc.div(self.unary()?);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let neg = if self.peek() == Some(b'-') {
                self.pos += 1;
                true
            } else {
                false
            };
            let n = self.integer()?;
            return Ok(base.powi(if neg { -n } else { n }));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<i32> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Parse("expected integer exponent".into()));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|e| Error::Parse(format!("bad exponent: {e}")))
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.bump() != Some(b')') {
                    return Err(Error::Parse("expected ')'".into()));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            other => Err(Error::Parse(format!("unexpected input: {other:?}"))),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_digit() || c == b'.' {
                self.pos += 1;
            } else if (c == b'e' || c == b'E')
                && self.pos + 1 < self.src.len()
                && (self.src[self.pos + 1].is_ascii_digit()
                    || self.src[self.pos + 1] == b'-'
                    || self.src[self.pos + 1] == b'+')
            {
                self.pos += 2;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Expr::Const)
            .map_err(|e| Error::Parse(format!("bad number {text:?}: {e}")))
    }

    fn ident(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_owned();
        match name.as_str() {
            "x0" | "x1" | "x2" | "x3" => Ok(Expr::Var((name.as_bytes()[1] - b'0') as usize)),
            "exp" | "log" => {
                if self.bump() != Some(b'(') {
                    return Err(Error::Parse(format!("expected '(' after {name}")));
                }
                let arg = self.expr()?;
                if self.bump() != Some(b')') {
                    return Err(Error::Parse("expected ')'".into()));
                }
                Ok(if name == "exp" { arg.exp() } else { arg.log() })
            }
            other => Err(Error::Parse(format!("unknown identifier {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parse_polynomial() {
        let e: Expr = "1 + 0.1*x0 - x1^2".parse().unwrap();
        let x = [2.0, 3.0, 0.0, 0.0];
        assert_relative_eq!(e.eval(&x).unwrap(), 1.0 + 0.2 - 9.0);
    }

    #[test]
    fn parse_exp_log_roundtrip() {
        let e: Expr = "log(exp(x2))".parse().unwrap();
        let x = [0.0, 0.0, 0.7, 0.0];
        assert_relative_eq!(e.eval(&x).unwrap(), 0.7, epsilon = 1e-14);
    }

    #[test]
    fn display_reparses_to_same_values() {
        let e: Expr = "exp(0.3*x0) * (1 - x3/2) + x1^-2".parse().unwrap();
        let text = e.to_string();
        let e2: Expr = text.parse().unwrap();
        let x = [0.4, 2.0, 0.1, 0.3];
        assert_relative_eq!(e.eval(&x).unwrap(), e2.eval(&x).unwrap());
    }

    #[test]
    fn jet_derivatives_match_calculus() {
        let e: Expr = "exp(2*x0)".parse().unwrap();
        let j = e.eval_jet(&[0.3, 0.0, 0.0, 0.0], 3).unwrap();
        let v = (0.6f64).exp();
        assert_relative_eq!(j.value(), v, epsilon = 1e-13);
        assert_relative_eq!(j.d1(0), 2.0 * v, epsilon = 1e-13);
    }

    #[test]
    fn division_by_zero_is_degenerate() {
        let e: Expr = "1/x0".parse().unwrap();
        assert!(e.eval(&[0.0, 0.0, 0.0, 0.0]).is_err());
        assert!(e.eval(&[2.0, 0.0, 0.0, 0.0]).is_ok());
    }

    #[test]
    fn rejects_garbage() {
        assert!("1 +".parse::<Expr>().is_err());
        assert!("sin(x0)".parse::<Expr>().is_err());
        assert!("x5".parse::<Expr>().is_err());
    }
}
