//! Pratt parser for the expression grammar and the derivative atoms of the
//! PDE grammar.

use num_traits::{CheckedAdd, CheckedMul, Zero};
use thiserror::Error;

use super::tree::{fold_div, fold_neg, Expr, Func, Node, Rational, VarPair};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("derivative `{0}` has order greater than 2")]
    DerivativeOrder(String),
    #[error("exponent must be a rational constant")]
    NonConstantExponent,
    #[error("numeric literal `{0}` out of range")]
    Literal(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("at byte {offset}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Op(char),
    Eof,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let int_part = &text[start..i];
            let mut frac_part = "";
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                let fs = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                frac_part = &text[fs..i];
            }
            let lit = &text[start..i];
            let value = decimal(int_part, frac_part).ok_or(ParseError {
                offset: start,
                kind: ParseErrorKind::Literal(lit.to_string()),
            })?;
            out.push((Tok::Num(value), start));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
        } else if b"+-*/^()=".contains(&c) {
            out.push((Tok::Op(c as char), i));
            i += 1;
        } else {
            let ch = text[i..].chars().next().unwrap_or('?');
            return Err(ParseError {
                offset: i,
                kind: ParseErrorKind::Syntax(format!("unexpected character `{ch}`")),
            });
        }
    }
    out.push((Tok::Eof, text.len()));
    Ok(out)
}

fn decimal(int_part: &str, frac_part: &str) -> Option<Rational> {
    let ten = Rational::from_integer(10);
    let mut acc = Rational::zero();
    for d in int_part.bytes() {
        acc = acc.checked_mul(&ten)?.checked_add(&Rational::from_integer((d - b'0') as i64))?;
    }
    let mut scale = Rational::from_integer(1);
    for d in frac_part.bytes() {
        scale = scale.checked_mul(&Rational::new(1, 10))?;
        acc = acc.checked_add(&scale.checked_mul(&Rational::from_integer((d - b'0') as i64))?)?;
    }
    Some(acc)
}

/// Which derivative atom a placeholder variable stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    U,
    Ux,
    Uy,
    Uxx,
    Uxy,
    Uyy,
}

impl Slot {
    pub const ALL: [Slot; 6] = [Slot::U, Slot::Ux, Slot::Uy, Slot::Uxx, Slot::Uxy, Slot::Uyy];

    pub fn placeholder(self) -> &'static str {
        match self {
            Slot::U => "@u",
            Slot::Ux => "@u_1",
            Slot::Uy => "@u_2",
            Slot::Uxx => "@u_11",
            Slot::Uxy => "@u_12",
            Slot::Uyy => "@u_22",
        }
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    vars: &'a [&'a str],
    unknown: Option<&'a str>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax<T>(&self, msg: &str) -> Result<T, ParseError> {
        Err(ParseError {
            offset: self.offset(),
            kind: ParseErrorKind::Syntax(msg.to_string()),
        })
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if *self.peek() == Tok::Op(c) {
            self.bump();
            Ok(())
        } else {
            self.syntax(&format!("expected `{c}`"))
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.prefix()?;
        loop {
            let (op, lbp, rbp) = match self.peek() {
                Tok::Op('+') => ('+', 10, 11),
                Tok::Op('-') => ('-', 10, 11),
                Tok::Op('*') => ('*', 20, 21),
                Tok::Op('/') => ('/', 20, 21),
                Tok::Op('^') => ('^', 40, 39),
                Tok::Op(')') | Tok::Op('=') | Tok::Eof => break,
                _ => return self.syntax("expected an operator"),
            };
            if lbp < min_bp {
                break;
            }
            self.bump();
            let at = self.offset();
            let rhs = self.expr(rbp)?;
            lhs = match op {
                '+' => Expr::node(Node::Add(lhs, rhs)),
                '-' => Expr::node(Node::Sub(lhs, rhs)),
                '*' => Expr::node(Node::Mul(lhs, rhs)),
                '/' => fold_div(lhs, rhs),
                _ => match rhs.as_const() {
                    Some(r) => Expr::node(Node::Pow(lhs, r)),
                    None => {
                        return Err(ParseError {
                            offset: at,
                            kind: ParseErrorKind::NonConstantExponent,
                        })
                    }
                },
            };
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Expr, ParseError> {
        let (tok, at) = self.bump();
        match tok {
            Tok::Num(r) => Ok(Expr::rational(r)),
            Tok::Op('-') => Ok(fold_neg(self.expr(30)?)),
            Tok::Op('(') => {
                let inner = self.expr(0)?;
                self.expect(')')?;
                Ok(inner)
            }
            Tok::Ident(name) => self.ident(name, at),
            Tok::Eof => Err(ParseError {
                offset: at,
                kind: ParseErrorKind::Syntax("unexpected end of input".into()),
            }),
            Tok::Op(c) => Err(ParseError {
                offset: at,
                kind: ParseErrorKind::Syntax(format!("unexpected `{c}`")),
            }),
        }
    }

    fn ident(&mut self, name: String, at: usize) -> Result<Expr, ParseError> {
        if self.vars.contains(&name.as_str()) {
            return Ok(Expr::var(&name));
        }
        if *self.peek() == Tok::Op('(') {
            let f = Func::from_name(&name).ok_or(ParseError {
                offset: at,
                kind: ParseErrorKind::UnknownFunction(name.clone()),
            })?;
            self.bump();
            let arg = self.expr(0)?;
            self.expect(')')?;
            return Ok(Expr::apply(f, arg));
        }
        if name == "e" {
            if *self.peek() == Tok::Op('^') {
                self.bump();
                let arg = self.expr(39)?;
                return Ok(Expr::exp(arg));
            }
            return Ok(Expr::exp(Expr::one()));
        }
        if let Some(u) = self.unknown {
            if let Some(slot) = self.derivative_atom(u, &name, at)? {
                return Ok(Expr::var(slot.placeholder()));
            }
        }
        if name.contains('_') || Func::from_name(&name).is_some() {
            return Err(ParseError {
                offset: at,
                kind: ParseErrorKind::UnknownFunction(name),
            });
        }
        Err(ParseError {
            offset: at,
            kind: ParseErrorKind::UnknownVariable(name),
        })
    }

    fn derivative_atom(&self, u: &str, name: &str, at: usize) -> Result<Option<Slot>, ParseError> {
        if name == u {
            return Ok(Some(Slot::U));
        }
        let Some(sub) = name.strip_prefix(u).and_then(|s| s.strip_prefix('_')) else {
            return Ok(None);
        };
        let mut rest = sub;
        let mut idx = Vec::new();
        while !rest.is_empty() {
            // longest declared name that prefixes the remaining subscript
            let hit = self
                .vars
                .iter()
                .enumerate()
                .filter(|(_, v)| rest.starts_with(**v))
                .max_by_key(|(_, v)| v.len());
            match hit {
                Some((i, v)) => {
                    idx.push(i);
                    rest = &rest[v.len()..];
                }
                None => {
                    return Err(ParseError {
                        offset: at,
                        kind: ParseErrorKind::UnknownVariable(rest.to_string()),
                    })
                }
            }
        }
        if idx.len() > 2 {
            return Err(ParseError {
                offset: at,
                kind: ParseErrorKind::DerivativeOrder(name.to_string()),
            });
        }
        idx.sort_unstable();
        let slot = match idx.as_slice() {
            [0] => Slot::Ux,
            [1] => Slot::Uy,
            [0, 0] => Slot::Uxx,
            [0, 1] => Slot::Uxy,
            [1, 1] => Slot::Uyy,
            _ => return Ok(None),
        };
        Ok(Some(slot))
    }
}

/// Parses an expression over the declared variable pair.
pub fn parse_expr(text: &str, vars: &VarPair) -> Result<Expr, ParseError> {
    let names = vars.names();
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        vars: &names,
        unknown: None,
    };
    let e = p.expr(0)?;
    match p.peek() {
        Tok::Eof => Ok(e),
        _ => p.syntax("trailing input"),
    }
}

/// Parses `lhs = rhs` with derivative atoms of the unknown `u` mapped to
/// placeholder variables (see [`Slot::placeholder`]).
pub fn parse_equation(text: &str, vars: &VarPair) -> Result<(Expr, Expr), ParseError> {
    parse_equation_in(text, vars, "u")
}

/// [`parse_equation`] with a different name for the unknown.
pub fn parse_equation_in(text: &str, vars: &VarPair, unknown: &str) -> Result<(Expr, Expr), ParseError> {
    let names = vars.names();
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        vars: &names,
        unknown: Some(unknown),
    };
    let lhs = p.expr(0)?;
    p.expect('=')?;
    let rhs = p.expr(0)?;
    match p.peek() {
        Tok::Eof => Ok((lhs, rhs)),
        _ => p.syntax("trailing input"),
    }
}
