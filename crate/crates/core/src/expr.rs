//! The shared expression grammar:
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor ("*" factor)*
//! factor := rational | gen | factor "^" nat | "(" expr ")" | "-" factor
//! gen    := ("v"|"vh"|"th"|"u"|"uh"|"xi"|"e"|"eb"|"c") nat
//! ```
//!
//! Generator indices are 1-based. Whitespace is ignored. A leading minus on
//! a factor is accepted as a convenience.

use num_bigint::BigInt;
use thiserror::Error;

use crate::algebra::{SuperAlgebra, Terms};
use crate::rational::Q;

pub const GENERATOR_NAMES: [&str; 9] = ["v", "vh", "th", "u", "uh", "xi", "e", "eb", "c"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at position {pos}: {msg}")]
    SyntaxError { pos: usize, msg: String },
    #[error("unknown generator `{name}` at position {pos}")]
    UnknownGenerator { name: String, pos: usize },
    #[error("generator index {name}{index} out of range at position {pos}")]
    IndexOutOfRange { name: String, index: usize, pos: usize },
    #[error("odd generator raised to power {power} at position {pos}")]
    OddPower { pos: usize, power: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(Q),
    Gen { name: String, index: usize, pos: usize },
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32, usize),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(char),
    End,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() {
            let st = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[st..i].iter().collect();
            out.push((Tok::Int(s.parse().expect("digits")), st));
        } else if ch.is_ascii_alphabetic() {
            let st = i;
            while i < chars.len() && chars[i].is_ascii_alphabetic() {
                i += 1;
            }
            out.push((Tok::Ident(chars[st..i].iter().collect()), st));
        } else if "+-*/^()".contains(ch) {
            out.push((Tok::Sym(ch), i));
            i += 1;
        } else {
            return Err(ExprError::SyntaxError { pos: i, msg: format!("unexpected character `{ch}`") });
        }
    }
    out.push((Tok::End, chars.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, msg: &str) -> Result<T, ExprError> {
        Err(ExprError::SyntaxError { pos: self.pos(), msg: msg.into() })
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Sym('+') => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Sym('-') => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.power()?;
        while *self.peek() == Tok::Sym('*') {
            self.bump();
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.power()?));
        }
        Ok(lhs)
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let mut base = self.atom()?;
        while *self.peek() == Tok::Sym('^') {
            let pos = self.pos();
            self.bump();
            match self.bump() {
                (Tok::Int(k), _) => {
                    let k: u32 = k.try_into().map_err(|_| ExprError::SyntaxError { pos, msg: "exponent too large".into() })?;
                    base = Expr::Pow(Box::new(base), k, pos);
                }
                (_, p) => return Err(ExprError::SyntaxError { pos: p, msg: "expected a natural exponent".into() }),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let pos = self.pos();
        match self.bump() {
            (Tok::Int(n), _) => {
                if *self.peek() == Tok::Sym('/') {
                    self.bump();
                    match self.bump() {
                        (Tok::Int(d), p) => {
                            if d == BigInt::from(0) {
                                return Err(ExprError::SyntaxError { pos: p, msg: "zero denominator".into() });
                            }
                            Ok(Expr::Num(Q::new(n, d)))
                        }
                        (_, p) => Err(ExprError::SyntaxError { pos: p, msg: "expected a denominator".into() }),
                    }
                } else {
                    Ok(Expr::Num(Q::from_integer(n)))
                }
            }
            (Tok::Ident(name), _) => {
                if !GENERATOR_NAMES.contains(&name.as_str()) {
                    return Err(ExprError::UnknownGenerator { name, pos });
                }
                match self.peek().clone() {
                    Tok::Int(k) => {
                        self.bump();
                        let index: usize = k.try_into().unwrap_or(usize::MAX);
                        Ok(Expr::Gen { name, index, pos })
                    }
                    // the central generator may be written without an index
                    _ if name == "c" => Ok(Expr::Gen { name, index: 1, pos }),
                    _ => self.err("expected a generator index"),
                }
            }
            (Tok::Sym('('), _) => {
                let e = self.expr()?;
                if *self.peek() != Tok::Sym(')') {
                    return self.err("expected `)`");
                }
                self.bump();
                Ok(e)
            }
            (Tok::Sym('-'), _) => Ok(Expr::Neg(Box::new(self.power()?))),
            (Tok::End, p) => Err(ExprError::SyntaxError { pos: p, msg: "unexpected end of input".into() }),
            (_, p) => Err(ExprError::SyntaxError { pos: p, msg: "expected a factor".into() }),
        }
    }
}

pub fn parse_expr(src: &str) -> Result<Expr, ExprError> {
    let mut p = Parser { toks: tokenize(src)?, at: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.err("trailing input");
    }
    Ok(e)
}

/// Resolves `(name, 1-based index)` to an element and whether it is a single
/// odd generator.
pub type Resolve<'a> = dyn Fn(&str, usize, usize) -> Result<(Terms, bool), ExprError> + 'a;

pub fn eval_expr<A: SuperAlgebra + ?Sized>(e: &Expr, alg: &A, resolve: &Resolve) -> Result<Terms, ExprError> {
    Ok(match e {
        Expr::Num(c) => Terms::scalar(c.clone()),
        Expr::Gen { name, index, pos } => resolve(name, *index, *pos)?.0,
        Expr::Add(a, b) => &eval_expr(a, alg, resolve)? + &eval_expr(b, alg, resolve)?,
        Expr::Sub(a, b) => &eval_expr(a, alg, resolve)? - &eval_expr(b, alg, resolve)?,
        Expr::Mul(a, b) => alg.mul(&eval_expr(a, alg, resolve)?, &eval_expr(b, alg, resolve)?),
        Expr::Neg(a) => -&eval_expr(a, alg, resolve)?,
        Expr::Pow(a, k, pos) => {
            if *k > 1 {
                if let Expr::Gen { name, index, pos: gp } = a.as_ref() {
                    if resolve(name, *index, *gp)?.1 {
                        return Err(ExprError::OddPower { pos: *pos, power: *k });
                    }
                }
            }
            alg.pow(&eval_expr(a, alg, resolve)?, *k as usize)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn syntax_error_position_at_end() {
        assert_eq!(parse_expr("v1*").unwrap_err(), ExprError::SyntaxError { pos: 3, msg: "unexpected end of input".into() });
    }

    #[test]
    fn unknown_generator() {
        assert!(matches!(parse_expr("w1+1"), Err(ExprError::UnknownGenerator { pos: 0, .. })));
    }

    #[test]
    fn precedence_and_rationals() {
        let e = parse_expr("1/2*v1^2 - th1*th2 + (e3)").unwrap();
        match e {
            Expr::Add(lhs, _) => assert!(matches!(*lhs, Expr::Sub(..))),
            _ => panic!("bad tree"),
        }
    }

    #[test]
    fn whitespace_is_ignored() {
        match parse_expr(" v 1 * th 2 ").unwrap() {
            Expr::Mul(a, b) => {
                assert!(matches!(*a, Expr::Gen { ref name, index: 1, .. } if name == "v"));
                assert!(matches!(*b, Expr::Gen { ref name, index: 2, .. } if name == "th"));
            }
            other => panic!("{other:?}"),
        }
    }
}
