use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Zero};

/// Exact rational constant stored at the leaves.
pub type Rational = num_rational::Rational64;

/// Elementary functions accepted by the grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Exp,
    Ln,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
    Sin,
    Cos,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Exp,
        Func::Ln,
        Func::Sqrt,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Sin,
        Func::Cos,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Const(Rational),
    Var(Arc<str>),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, Rational),
    Neg(Expr),
    Apply(Func, Expr),
}

/// Immutable, cheaply clonable expression tree.
///
/// The arithmetic operators (`+ - * /` and unary `-`) build nodes through
/// light constant folding and 0/1 identities. Use [`Expr::node`] for a raw
/// node without any folding.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr(Arc<Node>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", self.pretty())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty())
    }
}

pub(crate) fn checked_pow(base: Rational, exp: i64) -> Option<Rational> {
    if exp.unsigned_abs() > 64 {
        return None;
    }
    if exp < 0 {
        if base.is_zero() {
            return None;
        }
        return checked_pow(base.recip(), -exp);
    }
    let mut acc = Rational::one();
    for _ in 0..exp {
        acc = acc.checked_mul(&base)?;
    }
    Some(acc)
}

impl Expr {
    pub fn node(n: Node) -> Expr {
        Expr(Arc::new(n))
    }

    pub fn kind(&self) -> &Node {
        &self.0
    }

    pub fn rational(r: Rational) -> Expr {
        Expr::node(Node::Const(r))
    }

    pub fn int(n: i64) -> Expr {
        Expr::rational(Rational::from_integer(n))
    }

    pub fn frac(n: i64, d: i64) -> Expr {
        Expr::rational(Rational::new(n, d))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn var(name: &str) -> Expr {
        Expr::node(Node::Var(Arc::from(name)))
    }

    pub fn as_const(&self) -> Option<Rational> {
        match self.kind() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(|c| c.is_one())
    }

    pub fn apply(f: Func, arg: Expr) -> Expr {
        Expr::node(Node::Apply(f, arg))
    }

    pub fn exp(arg: Expr) -> Expr {
        Expr::apply(Func::Exp, arg)
    }

    pub fn ln(arg: Expr) -> Expr {
        Expr::apply(Func::Ln, arg)
    }

    pub fn sqrt(arg: Expr) -> Expr {
        Expr::apply(Func::Sqrt, arg)
    }

    pub fn sin(arg: Expr) -> Expr {
        Expr::apply(Func::Sin, arg)
    }

    pub fn cos(arg: Expr) -> Expr {
        Expr::apply(Func::Cos, arg)
    }

    pub fn sinh(arg: Expr) -> Expr {
        Expr::apply(Func::Sinh, arg)
    }

    pub fn cosh(arg: Expr) -> Expr {
        Expr::apply(Func::Cosh, arg)
    }

    pub fn tanh(arg: Expr) -> Expr {
        Expr::apply(Func::Tanh, arg)
    }

    pub fn powr(&self, r: Rational) -> Expr {
        if r.is_zero() {
            return Expr::one();
        }
        if r.is_one() {
            return self.clone();
        }
        if let Some(c) = self.as_const() {
            if r.is_integer() {
                if let Some(v) = checked_pow(c, *r.numer()) {
                    return Expr::rational(v);
                }
            }
        }
        Expr::node(Node::Pow(self.clone(), r))
    }

    pub fn powi(&self, n: i64) -> Expr {
        self.powr(Rational::from_integer(n))
    }

    pub fn sum(&self, other: &Expr) -> Expr {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if let (Some(a), Some(b)) = (self.as_const(), other.as_const()) {
            if let Some(s) = a.checked_add(&b) {
                return Expr::rational(s);
            }
        }
        Expr::node(Node::Add(self.clone(), other.clone()))
    }

    pub fn diff_of(&self, other: &Expr) -> Expr {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.negate();
        }
        if let (Some(a), Some(b)) = (self.as_const(), other.as_const()) {
            if let Some(s) = a.checked_sub(&b) {
                return Expr::rational(s);
            }
        }
        Expr::node(Node::Sub(self.clone(), other.clone()))
    }

    pub fn product(&self, other: &Expr) -> Expr {
        if self.is_zero() || other.is_zero() {
            return Expr::zero();
        }
        if self.is_one() {
            return other.clone();
        }
        if other.is_one() {
            return self.clone();
        }
        if let (Some(a), Some(b)) = (self.as_const(), other.as_const()) {
            if let Some(s) = a.checked_mul(&b) {
                return Expr::rational(s);
            }
        }
        if self.as_const() == Some(-Rational::one()) {
            return other.negate();
        }
        if other.as_const() == Some(-Rational::one()) {
            return self.negate();
        }
        Expr::node(Node::Mul(self.clone(), other.clone()))
    }

    pub fn quotient(&self, other: &Expr) -> Expr {
        if other.is_one() {
            return self.clone();
        }
        if self.is_zero() && !other.is_zero() {
            return Expr::zero();
        }
        if let (Some(a), Some(b)) = (self.as_const(), other.as_const()) {
            if let Some(s) = a.checked_div(&b) {
                return Expr::rational(s);
            }
        }
        Expr::node(Node::Div(self.clone(), other.clone()))
    }

    pub fn negate(&self) -> Expr {
        match self.kind() {
            Node::Const(c) => Expr::rational(-c),
            Node::Neg(inner) => inner.clone(),
            _ => Expr::node(Node::Neg(self.clone())),
        }
    }

    pub fn scale(&self, r: Rational) -> Expr {
        Expr::rational(r).product(self)
    }

    /// Free variable names, sorted.
    pub fn vars(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Arc<str>>) {
        match self.kind() {
            Node::Const(_) => {}
            Node::Var(v) => {
                out.insert(v.clone());
            }
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Node::Pow(a, _) | Node::Neg(a) | Node::Apply(_, a) => a.collect_vars(out),
        }
    }

    pub fn contains_var(&self, name: &str) -> bool {
        match self.kind() {
            Node::Const(_) => false,
            Node::Var(v) => &**v == name,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.contains_var(name) || b.contains_var(name)
            }
            Node::Pow(a, _) | Node::Neg(a) | Node::Apply(_, a) => a.contains_var(name),
        }
    }

    /// Simultaneous substitution of variables by expressions.
    pub fn substitute(&self, bindings: &[(&str, &Expr)]) -> Expr {
        match self.kind() {
            Node::Const(_) => self.clone(),
            Node::Var(v) => bindings
                .iter()
                .find(|(n, _)| *n == &**v)
                .map(|(_, e)| (*e).clone())
                .unwrap_or_else(|| self.clone()),
            Node::Add(a, b) => a.substitute(bindings).sum(&b.substitute(bindings)),
            Node::Sub(a, b) => a.substitute(bindings).diff_of(&b.substitute(bindings)),
            Node::Mul(a, b) => a.substitute(bindings).product(&b.substitute(bindings)),
            Node::Div(a, b) => a.substitute(bindings).quotient(&b.substitute(bindings)),
            Node::Pow(a, r) => a.substitute(bindings).powr(*r),
            Node::Neg(a) => a.substitute(bindings).negate(),
            Node::Apply(f, a) => Expr::apply(*f, a.substitute(bindings)),
        }
    }

    /// Node count.
    pub fn size(&self) -> usize {
        match self.kind() {
            Node::Const(_) | Node::Var(_) => 1,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                1 + a.size() + b.size()
            }
            Node::Pow(a, _) | Node::Neg(a) | Node::Apply(_, a) => 1 + a.size(),
        }
    }

    /// The literal folding the parser performs: negated constants and
    /// quotients of constants collapse to a single constant.
    pub fn canonical(&self) -> Expr {
        match self.kind() {
            Node::Const(_) | Node::Var(_) => self.clone(),
            Node::Add(a, b) => Expr::node(Node::Add(a.canonical(), b.canonical())),
            Node::Sub(a, b) => Expr::node(Node::Sub(a.canonical(), b.canonical())),
            Node::Mul(a, b) => Expr::node(Node::Mul(a.canonical(), b.canonical())),
            Node::Div(a, b) => fold_div(a.canonical(), b.canonical()),
            Node::Pow(a, r) => Expr::node(Node::Pow(a.canonical(), *r)),
            Node::Neg(a) => fold_neg(a.canonical()),
            Node::Apply(f, a) => Expr::apply(*f, a.canonical()),
        }
    }
}

pub(crate) fn fold_neg(a: Expr) -> Expr {
    match a.as_const() {
        Some(c) => Expr::rational(-c),
        None => Expr::node(Node::Neg(a)),
    }
}

pub(crate) fn fold_div(a: Expr, b: Expr) -> Expr {
    if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
        if let Some(q) = x.checked_div(&y) {
            return Expr::rational(q);
        }
    }
    Expr::node(Node::Div(a, b))
}


macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl std::ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$f(&self, &rhs)
            }
        }
        impl std::ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                Expr::$f(&self, rhs)
            }
        }
        impl std::ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                Expr::$f(self, &rhs)
            }
        }
        impl std::ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                Expr::$f(self, rhs)
            }
        }
    };
}

binop!(Add, add, sum);
binop!(Sub, sub, diff_of);
binop!(Mul, mul, product);
binop!(Div, div, quotient);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.negate()
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.negate()
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

/// Ordered pair of independent-variable names.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VarPair {
    pub x: Arc<str>,
    pub y: Arc<str>,
}

impl VarPair {
    pub fn new(x: &str, y: &str) -> VarPair {
        VarPair {
            x: Arc::from(x),
            y: Arc::from(y),
        }
    }

    /// The canonical target pair rendered as `xi`, `eta`.
    pub fn target() -> VarPair {
        VarPair::new("xi", "eta")
    }

    pub fn xe(&self) -> Expr {
        Expr::var(&self.x)
    }

    pub fn ye(&self) -> Expr {
        Expr::var(&self.y)
    }

    pub fn names(&self) -> [&str; 2] {
        [&self.x, &self.y]
    }

    pub fn swapped(&self) -> VarPair {
        VarPair {
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }
}

impl Default for VarPair {
    fn default() -> Self {
        VarPair::new("x", "y")
    }
}

impl fmt::Display for VarPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.x, self.y)
    }
}
