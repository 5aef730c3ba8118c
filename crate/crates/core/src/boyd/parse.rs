//! Textual weight grammar.
//!
//! ```text
//! expr   := factor ('*' factor)*
//! factor := atom ('^' number)?
//! atom   := 't' | 'L' digits | '(' expr ')'
//! ```
//!
//! `t^u` is a power, `Lk^a` an iterated log of depth `k`, and a
//! parenthesized group raised to `q` is a power of a weight.

use super::BoydExpr;
use crate::error::{Error, Result};

pub fn parse(input: &str) -> Result<BoydExpr> {
    let mut p = Parser {
        src: input.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error(format!("unexpected '{}'", p.src[p.pos] as char)));
    }
    e.validate().map_err(|e| Error::Parse {
        position: 0,
        message: e.to_string(),
    })?;
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            position: self.pos,
            message: message.into(),
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

    fn expr(&mut self) -> Result<BoydExpr> {
        let mut factors = vec![self.factor()?];
        while self.peek() == Some(b'*') {
            self.pos += 1;
            factors.push(self.factor()?);
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            BoydExpr::Product(factors)
        })
    }

    fn factor(&mut self) -> Result<BoydExpr> {
        let start = self.peek().map(|_| self.pos);
        let atom = match self.peek() {
            Some(b't') => {
                self.pos += 1;
                Atom::T
            }
            Some(b'L') => {
                self.pos += 1;
                let begin = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                if begin == self.pos {
                    return Err(self.error("expected iteration depth after 'L'"));
                }
                let depth: u32 = std::str::from_utf8(&self.src[begin..self.pos])
                    .unwrap()
                    .parse()
                    .map_err(|_| Error::Parse {
                        position: begin,
                        message: "iteration depth out of range".into(),
                    })?;
                if depth == 0 {
                    return Err(Error::Parse {
                        position: begin,
                        message: "iteration depth must be >= 1".into(),
                    });
                }
                Atom::Log(depth)
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Atom::Group(inner)
            }
            Some(c) => return Err(self.error(format!("unexpected '{}'", c as char))),
            None => return Err(self.error("unexpected end of input")),
        };
        let exponent = if self.peek() == Some(b'^') {
            self.pos += 1;
            Some(self.number()?)
        } else {
            None
        };
        debug_assert!(start.is_some());
        Ok(match atom {
            Atom::T => BoydExpr::Power(exponent.unwrap_or(1.0)),
            Atom::Log(depth) => BoydExpr::LogFactor {
                depth,
                exponent: exponent.unwrap_or(1.0),
            },
            Atom::Group(e) => match exponent {
                Some(q) => BoydExpr::Pow(Box::new(e), q),
                None => e,
            },
        })
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let begin = self.pos;
        let mut end = self.pos;
        let bytes = self.src;
        if end < bytes.len() && (bytes[end] == b'-' || bytes[end] == b'+') {
            end += 1;
        }
        if end < bytes.len() && bytes[end] == b'(' {
            return Err(self.error("parenthesized exponents are not supported"));
        }
        while end < bytes.len()
            && (bytes[end].is_ascii_digit()
                || bytes[end] == b'.'
                || bytes[end] == b'e'
                || bytes[end] == b'E'
                || ((bytes[end] == b'-' || bytes[end] == b'+')
                    && (bytes[end - 1] == b'e' || bytes[end - 1] == b'E')))
        {
            end += 1;
        }
        let text = std::str::from_utf8(&bytes[begin..end]).unwrap();
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => {
                self.pos = end;
                Ok(v)
            }
            _ => Err(self.error(if text.is_empty() {
                "expected a number".to_string()
            } else {
                format!("invalid number '{text}'")
            })),
        }
    }
}

enum Atom {
    T,
    Log(u32),
    Group(BoydExpr),
}
