use num_traits::Signed;

use super::tree::{Expr, Node, Rational};

const ADD: u8 = 1;
const MUL: u8 = 2;
const UNARY: u8 = 3;
const POW: u8 = 4;
const ATOM: u8 = 5;

fn rational_text(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn exponent_text(r: &Rational) -> String {
    if r.is_integer() && !r.is_negative() {
        r.numer().to_string()
    } else {
        format!("({})", rational_text(r))
    }
}

fn wrap(s: String, prec: u8, min: u8) -> String {
    if prec < min {
        format!("({s})")
    } else {
        s
    }
}

fn wrap_right(s: String, prec: u8, min: u8) -> String {
    if prec < min || s.starts_with('-') {
        format!("({s})")
    } else {
        s
    }
}

fn pretty(e: &Expr) -> (String, u8) {
    match e.kind() {
        Node::Const(c) => {
            let prec = match (c.is_integer(), c.is_negative()) {
                (true, false) => ATOM,
                (true, true) => UNARY,
                (false, _) => MUL,
            };
            (rational_text(c), prec)
        }
        Node::Var(v) => (v.to_string(), ATOM),
        Node::Add(a, b) | Node::Sub(a, b) => {
            let op = if matches!(e.kind(), Node::Add(..)) { "+" } else { "-" };
            let (sa, pa) = pretty(a);
            let (sb, pb) = pretty(b);
            (format!("{} {op} {}", wrap(sa, pa, ADD), wrap_right(sb, pb, MUL)), ADD)
        }
        Node::Mul(a, b) | Node::Div(a, b) => {
            let op = if matches!(e.kind(), Node::Mul(..)) { "*" } else { "/" };
            let (sa, pa) = pretty(a);
            let (sb, pb) = pretty(b);
            (format!("{}{op}{}", wrap(sa, pa, MUL), wrap_right(sb, pb, UNARY)), MUL)
        }
        Node::Neg(a) => {
            let (sa, pa) = pretty(a);
            (format!("-{}", wrap_right(sa, pa, UNARY)), UNARY)
        }
        Node::Pow(a, r) => {
            let (sa, pa) = pretty(a);
            let base = if pa < ATOM || sa.starts_with('-') {
                format!("({sa})")
            } else {
                sa
            };
            (format!("{base}^{}", exponent_text(r)), POW)
        }
        Node::Apply(f, a) => (format!("{}({})", f.name(), pretty(a).0), ATOM),
    }
}

fn full(e: &Expr, out: &mut String) {
    match e.kind() {
        Node::Const(c) => {
            if c.is_integer() && !c.is_negative() {
                out.push_str(&rational_text(c));
            } else {
                out.push('(');
                out.push_str(&rational_text(c));
                out.push(')');
            }
        }
        Node::Var(v) => out.push_str(v),
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
            let op = match e.kind() {
                Node::Add(..) => " + ",
                Node::Sub(..) => " - ",
                Node::Mul(..) => " * ",
                _ => " / ",
            };
            out.push('(');
            full(a, out);
            out.push_str(op);
            full(b, out);
            out.push(')');
        }
        Node::Neg(a) => {
            out.push_str("(-");
            full(a, out);
            out.push(')');
        }
        Node::Pow(a, r) => {
            out.push('(');
            full(a, out);
            out.push('^');
            out.push_str(&exponent_text(r));
            out.push(')');
        }
        Node::Apply(f, a) => {
            out.push_str(f.name());
            out.push('(');
            full(a, out);
            out.push(')');
        }
    }
}

impl Expr {
    /// Minimal-parenthesis rendering that parses back to the same tree.
    pub fn pretty(&self) -> String {
        pretty(self).0
    }

    /// Every compound node wrapped in parentheses.
    pub fn full(&self) -> String {
        let mut s = String::new();
        full(self, &mut s);
        s
    }
}
