//! Small expression language for scalar nets, used by the `valuation`
//! command.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | 'eps' | func '(' expr ')' | '(' expr ')' | 'corpus:' name
//! func   := exp | sin | cos | ln | sqrt | abs
//! ```
//!
//! `corpus:name` is the sup over `[-1, 1]` of the named corpus entry.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::asymptotics::{EpsGrid, EpsNet};
use crate::functionals::{negligible_corpus, regular_corpus};
use crate::genfun::{cube, seminorm_at, GenFunConfig, GenFunction};
use crate::mollifier::Mollifier;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetSpecError {
    #[error("unexpected {found} at offset {at}")]
    Unexpected { found: String, at: usize },
    #[error("unknown function {0:?}")]
    UnknownFunction(String),
    #[error("unknown corpus entry {0:?}")]
    UnknownEntry(String),
    #[error("corpus entries need a mollifier")]
    NoMollifier,
    #[error("evaluation failed at eps = {eps:e}: {msg}")]
    Eval { eps: f64, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Func {
    Exp,
    Sin,
    Cos,
    Ln,
    Sqrt,
    Abs,
}

#[derive(Clone)]
enum Ast {
    Num(f64),
    Eps,
    Neg(Box<Ast>),
    Bin(char, Box<Ast>, Box<Ast>),
    Call(Func, Box<Ast>),
    Entry(Arc<GenFunction>),
}

/// A parsed net `eps -> x_eps`.
#[derive(Clone)]
pub struct NetSpec {
    source: String,
    ast: Ast,
}

impl fmt::Debug for NetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NetSpec({:?})", self.source)
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    phi: Option<&'a Arc<Mollifier>>,
}

impl<'a> Parser<'a> {
    fn skip(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip();
        self.s.get(self.pos).copied()
    }

    fn unexpected(&self) -> NetSpecError {
        let found = match self.s.get(self.pos) {
            Some(c) => format!("{:?}", *c as char),
            None => "end of input".into(),
        };
        NetSpecError::Unexpected { found, at: self.pos }
    }

    fn expect(&mut self, c: u8) -> Result<(), NetSpecError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    fn expr(&mut self) -> Result<Ast, NetSpecError> {
        let mut a = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            a = Ast::Bin(c as char, Box::new(a), Box::new(self.term()?));
        }
        Ok(a)
    }

    fn term(&mut self) -> Result<Ast, NetSpecError> {
        let mut a = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            a = Ast::Bin(c as char, Box::new(a), Box::new(self.unary()?));
        }
        Ok(a)
    }

    fn unary(&mut self) -> Result<Ast, NetSpecError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Ast::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            return Ok(Ast::Bin('^', Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn word(&mut self) -> &'a str {
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos]).unwrap_or("")
    }

    fn atom(&mut self) -> Result<Ast, NetSpecError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.s.len() && (self.s[self.pos].is_ascii_digit() || self.s[self.pos] == b'.') {
                    self.pos += 1;
                }
                // exponent part, e.g. 1e-3
                if self.pos < self.s.len() && matches!(self.s[self.pos], b'e' | b'E') {
                    let save = self.pos;
                    self.pos += 1;
                    if self.pos < self.s.len() && matches!(self.s[self.pos], b'+' | b'-') {
                        self.pos += 1;
                    }
                    let digits = self.pos;
                    while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                    if self.pos == digits {
                        self.pos = save;
                    }
                }
                let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap_or("");
                text.parse().map(Ast::Num).map_err(|_| NetSpecError::Unexpected { found: text.into(), at: start })
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                let w = self.word();
                if w == "eps" {
                    return Ok(Ast::Eps);
                }
                if w == "corpus" {
                    self.expect(b':')?;
                    self.skip();
                    let name = self.word().to_string();
                    let phi = self.phi.ok_or(NetSpecError::NoMollifier)?;
                    let entry = regular_corpus()
                        .into_iter()
                        .chain(negligible_corpus(phi))
                        .find(|p| p.name == name)
                        .ok_or_else(|| NetSpecError::UnknownEntry(name.clone()))?;
                    return Ok(Ast::Entry(Arc::new(entry.u)));
                }
                let f = match w {
                    "exp" => Func::Exp,
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "ln" | "log" => Func::Ln,
                    "sqrt" => Func::Sqrt,
                    "abs" => Func::Abs,
                    _ => {
                        self.pos = start;
                        return Err(NetSpecError::UnknownFunction(w.into()));
                    }
                };
                self.expect(b'(')?;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(Ast::Call(f, Box::new(e)))
            }
            _ => Err(self.unexpected()),
        }
    }
}

fn eval(a: &Ast, eps: f64, cfg: &GenFunConfig) -> Result<f64, NetSpecError> {
    Ok(match a {
        Ast::Num(v) => *v,
        Ast::Eps => eps,
        Ast::Neg(a) => -eval(a, eps, cfg)?,
        Ast::Bin(op, a, b) => {
            let (x, y) = (eval(a, eps, cfg)?, eval(b, eps, cfg)?);
            match op {
                '+' => x + y,
                '-' => x - y,
                '*' => x * y,
                '/' => x / y,
                _ => x.powf(y),
            }
        }
        Ast::Call(f, a) => {
            let x = eval(a, eps, cfg)?;
            match f {
                Func::Exp => x.exp(),
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Ln => x.ln(),
                Func::Sqrt => x.sqrt(),
                Func::Abs => x.abs(),
            }
        }
        Ast::Entry(u) => {
            seminorm_at(u, &cube(1, -1.0, 1.0), 0, eps, cfg).map_err(|e| NetSpecError::Eval { eps, msg: e.to_string() })?
        }
    })
}

impl NetSpec {
    /// `phi` is only needed for corpus entries built from the mollifier.
    pub fn parse(src: &str, phi: Option<&Arc<Mollifier>>) -> Result<NetSpec, NetSpecError> {
        let mut p = Parser { s: src.as_bytes(), pos: 0, phi };
        let ast = p.expr()?;
        if p.peek().is_some() {
            return Err(p.unexpected());
        }
        Ok(NetSpec { source: src.to_string(), ast })
    }

    /// Whether the spec names a corpus entry.
    pub fn needs_corpus(src: &str) -> bool {
        src.contains("corpus:")
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn value(&self, eps: f64, cfg: &GenFunConfig) -> Result<f64, NetSpecError> {
        eval(&self.ast, eps, cfg)
    }

    pub fn sample(&self, grid: &EpsGrid, cfg: &GenFunConfig) -> Result<EpsNet, NetSpecError> {
        EpsNet::try_sample_real(grid, |e| self.value(e, cfg))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::{AsymptoticsConfig, DecayClass};

    fn at(s: &str, e: f64) -> f64 {
        NetSpec::parse(s, None).unwrap().value(e, &GenFunConfig::default()).unwrap()
    }

    #[test]
    fn grammar() {
        assert_eq!(at("eps^2", 0.5), 0.25);
        assert_eq!(at("3*eps^-1 + 1", 0.5), 7.0);
        assert_eq!(at("-eps^2", 0.5), -0.25);
        assert_eq!(at("2^-2", 0.5), 0.25);
        assert!((at("exp(-1/eps)", 0.5) - (-2.0f64).exp()).abs() < 1e-15);
        assert!((at("eps^2*sin(1/eps)", 0.25) - 0.0625 * 4f64.sin()).abs() < 1e-15);
        assert_eq!(at("1e-3 * (eps + 1)", 1.0), 2e-3);
        assert!(matches!(NetSpec::parse("foo(eps)", None), Err(NetSpecError::UnknownFunction(_))));
        assert!(matches!(NetSpec::parse("eps +", None), Err(NetSpecError::Unexpected { .. })));
        assert!(matches!(NetSpec::parse("eps)", None), Err(NetSpecError::Unexpected { .. })));
        assert!(matches!(NetSpec::parse("corpus:cos", None), Err(NetSpecError::NoMollifier)));
    }

    #[test]
    fn valuations() {
        let g = EpsGrid::default();
        let c = AsymptoticsConfig::default();
        let cfg = GenFunConfig::default();
        let est = NetSpec::parse("eps^2", None).unwrap().sample(&g, &cfg).unwrap().estimate(&c).unwrap();
        assert!(matches!(est.class, DecayClass::Order(a) if (a - 2.0).abs() < 0.05));
        let est = NetSpec::parse("exp(-1/eps)", None).unwrap().sample(&g, &cfg).unwrap().estimate(&c).unwrap();
        assert!(matches!(est.class, DecayClass::BeyondOrder(_)));
    }
}
