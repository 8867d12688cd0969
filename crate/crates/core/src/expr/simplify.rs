//! Light normalization: sums of terms `coef * prod(base^exp)`.
//!
//! Nested sums and products are flattened, constants folded, like terms
//! collected and identical factors cancelled. Products of sums are only
//! distributed by [`Expr::expand`]; [`Expr::simplify`] distributes constant
//! multipliers only.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{CheckedAdd, CheckedMul, One, Signed, Zero};

use super::tree::{checked_pow, Expr, Func, Node, Rational};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Term {
    pub coef: Rational,
    pub factors: BTreeMap<Expr, Rational>,
}

impl Term {
    fn constant(c: Rational) -> Term {
        Term {
            coef: c,
            factors: BTreeMap::new(),
        }
    }

    fn factor(base: Expr, exp: Rational) -> Term {
        let mut factors = BTreeMap::new();
        factors.insert(base, exp);
        Term {
            coef: Rational::one(),
            factors,
        }
    }
}

const EXPAND_LIMIT: usize = 512;

struct Norm {
    expand: bool,
}

fn neg_terms(ts: Vec<Term>) -> Vec<Term> {
    ts.into_iter()
        .map(|mut t| {
            t.coef = -t.coef;
            t
        })
        .collect()
}

fn rational_root(c: Rational, r: Rational) -> Option<Rational> {
    // c^r for rational r when the result is rational
    if c.is_zero() {
        return if r.is_positive() { Some(Rational::zero()) } else { None };
    }
    if r.is_integer() {
        return checked_pow(c, *r.numer());
    }
    let q = *r.denom();
    let root = |n: i64| -> Option<i64> {
        if n < 0 {
            if q % 2 == 0 {
                return None;
            }
            return root_pos(-n, q).map(|v| -v);
        }
        root_pos(n, q)
    };
    let num = root(*c.numer())?;
    let den = root(*c.denom())?;
    checked_pow(Rational::new(num, den), *r.numer())
}

fn root_pos(n: i64, q: i64) -> Option<i64> {
    if q > 64 {
        return None;
    }
    let guess = (n as f64).powf(1.0 / q as f64).round() as i64;
    for cand in [guess - 1, guess, guess + 1] {
        if cand >= 0 {
            if let Some(p) = checked_pow(Rational::from_integer(cand), q) {
                if p == Rational::from_integer(n) {
                    return Some(cand);
                }
            }
        }
    }
    None
}

fn content(ts: &[Term]) -> Option<Rational> {
    let mut num = 0i64;
    let mut den = 1i64;
    for t in ts {
        num = num.gcd(t.coef.numer());
        den = den.checked_mul(t.coef.denom() / den.gcd(t.coef.denom()))?;
    }
    if num == 0 {
        return None;
    }
    Some(Rational::new(num, den))
}

impl Norm {
    fn terms(&self, e: &Expr) -> Vec<Term> {
        self.try_terms(e).unwrap_or_else(|| vec![Term::factor(self.opaque(e), Rational::one())])
    }

    /// The node itself with simplified children, used when normalization
    /// cannot proceed (e.g. rational overflow).
    fn opaque(&self, e: &Expr) -> Expr {
        let s = |x: &Expr| self.rebuild_sum(self.collect(self.terms(x)));
        match e.kind() {
            Node::Const(_) | Node::Var(_) => e.clone(),
            Node::Add(a, b) => Expr::node(Node::Add(s(a), s(b))),
            Node::Sub(a, b) => Expr::node(Node::Sub(s(a), s(b))),
            Node::Mul(a, b) => Expr::node(Node::Mul(s(a), s(b))),
            Node::Div(a, b) => Expr::node(Node::Div(s(a), s(b))),
            Node::Pow(a, r) => Expr::node(Node::Pow(s(a), *r)),
            Node::Neg(a) => Expr::node(Node::Neg(s(a))),
            Node::Apply(f, a) => Expr::apply(*f, s(a)),
        }
    }

    fn try_terms(&self, e: &Expr) -> Option<Vec<Term>> {
        Some(match e.kind() {
            Node::Const(c) => {
                if c.is_zero() {
                    vec![]
                } else {
                    vec![Term::constant(*c)]
                }
            }
            Node::Var(_) => vec![Term::factor(e.clone(), Rational::one())],
            Node::Add(a, b) => {
                let mut ts = self.terms(a);
                ts.extend(self.terms(b));
                self.collect(ts)
            }
            Node::Sub(a, b) => {
                let mut ts = self.terms(a);
                ts.extend(neg_terms(self.terms(b)));
                self.collect(ts)
            }
            Node::Neg(a) => neg_terms(self.terms(a)),
            Node::Mul(a, b) => self.mul_sums(self.terms(a), self.terms(b))?,
            Node::Div(a, b) => {
                let tb = self.terms(b);
                if tb.is_empty() {
                    return None;
                }
                let inv = self.pow_sum(tb, -Rational::one())?;
                self.mul_sums(self.terms(a), inv)?
            }
            Node::Pow(a, r) => self.pow_sum(self.terms(a), *r)?,
            Node::Apply(f, a) => self.apply(*f, a)?,
        })
    }

    fn collect(&self, ts: Vec<Term>) -> Vec<Term> {
        let mut acc: BTreeMap<BTreeMap<Expr, Rational>, Rational> = BTreeMap::new();
        let mut overflow = Vec::new();
        for t in ts {
            match acc.get_mut(&t.factors) {
                Some(c) => match c.checked_add(&t.coef) {
                    Some(s) => *c = s,
                    None => overflow.push(t),
                },
                None => {
                    acc.insert(t.factors, t.coef);
                }
            }
        }
        let mut out: Vec<Term> = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(factors, coef)| Term { coef, factors })
            .collect();
        out.extend(overflow);
        out.sort_by(|a, b| (a.factors.is_empty(), &a.factors).cmp(&(b.factors.is_empty(), &b.factors)));
        out
    }

    fn mul_term(&self, a: &Term, b: &Term) -> Option<Vec<Term>> {
        let coef = a.coef.checked_mul(&b.coef)?;
        let mut factors = a.factors.clone();
        for (base, e) in &b.factors {
            let slot = factors.entry(base.clone()).or_insert_with(Rational::zero);
            *slot = slot.checked_add(e)?;
        }
        self.finish(Term { coef, factors })
    }

    /// Post-processing of a freshly multiplied term: integer powers of
    /// constants fold into the coefficient, exponentials merge, and a lone
    /// sum factor is spread back into terms.
    fn finish(&self, mut t: Term) -> Option<Vec<Term>> {
        if t.coef.is_zero() {
            return Some(vec![]);
        }
        t.factors.retain(|_, e| !e.is_zero());
        let consts: Vec<(Expr, Rational)> = t
            .factors
            .iter()
            .filter(|(b, e)| b.as_const().is_some() && e.is_integer())
            .map(|(b, e)| (b.clone(), *e))
            .collect();
        for (b, e) in consts {
            t.factors.remove(&b);
            t.coef = t.coef.checked_mul(&checked_pow(b.as_const()?, *e.numer())?)?;
        }
        let exps: Vec<(Expr, Rational)> = t
            .factors
            .iter()
            .filter(|(b, _)| matches!(b.kind(), Node::Apply(Func::Exp, _)))
            .map(|(b, e)| (b.clone(), *e))
            .collect();
        if exps.len() > 1 || exps.iter().any(|(_, e)| !e.is_one()) {
            let mut arg = Vec::new();
            for (b, e) in &exps {
                t.factors.remove(b);
                if let Node::Apply(_, u) = b.kind() {
                    for mut ut in self.terms(u) {
                        ut.coef = ut.coef.checked_mul(e)?;
                        arg.push(ut);
                    }
                }
            }
            let arg = self.collect(arg);
            if !arg.is_empty() {
                let merged = self.exp_of(arg)?;
                let mut out = vec![t.clone()];
                for m in merged {
                    out = self.mul_one(&out, &m)?;
                }
                return Some(out);
            }
        }
        if t.factors.len() == 1 {
            let (b, e) = t.factors.iter().next().unwrap();
            if e.is_one() && matches!(b.kind(), Node::Add(..) | Node::Sub(..)) {
                let inner = self.terms(b);
                if inner.len() > 1 {
                    let mut out = Vec::new();
                    for mut it in inner {
                        it.coef = it.coef.checked_mul(&t.coef)?;
                        out.push(it);
                    }
                    return Some(out);
                }
            }
        }
        Some(vec![t])
    }

    fn mul_one(&self, ts: &[Term], m: &Term) -> Option<Vec<Term>> {
        let mut out = Vec::new();
        for t in ts {
            out.extend(self.mul_term(t, m)?);
        }
        Some(out)
    }

    fn mul_sums(&self, a: Vec<Term>, b: Vec<Term>) -> Option<Vec<Term>> {
        if a.is_empty() || b.is_empty() {
            return Some(vec![]);
        }
        let a_const = a.len() == 1 && a[0].factors.is_empty();
        let b_const = b.len() == 1 && b[0].factors.is_empty();
        let distribute = a.len() == 1 && b.len() == 1
            || a_const
            || b_const
            || (self.expand && a.len() * b.len() <= EXPAND_LIMIT);
        if distribute {
            let mut out = Vec::new();
            for x in &a {
                for y in &b {
                    out.extend(self.mul_term(x, y)?);
                }
            }
            return Some(self.collect(out));
        }
        let ta = self.sum_as_term(a, true)?;
        let tb = self.sum_as_term(b, true)?;
        let out = self.mul_term(&ta, &tb)?;
        Some(self.collect(out))
    }

    /// Wraps a multi-term sum as a single factor, pulling out its rational
    /// content and (if `signed`) the sign of its leading term.
    fn sum_as_term(&self, s: Vec<Term>, signed: bool) -> Option<Term> {
        if s.len() == 1 {
            return Some(s.into_iter().next().unwrap());
        }
        if s.is_empty() {
            return Some(Term::constant(Rational::zero()));
        }
        let mut c = content(&s).unwrap_or_else(Rational::one);
        if signed && s[0].coef.is_negative() {
            c = -c;
        }
        if !signed {
            c = c.abs();
        }
        let scaled: Vec<Term> = s
            .into_iter()
            .map(|mut t| {
                t.coef /= c;
                t
            })
            .collect();
        let mut t = Term::factor(self.rebuild_sum(scaled), Rational::one());
        t.coef = c;
        Some(t)
    }

    fn pow_sum(&self, s: Vec<Term>, r: Rational) -> Option<Vec<Term>> {
        if r.is_zero() {
            return Some(vec![Term::constant(Rational::one())]);
        }
        if s.is_empty() {
            return if r.is_positive() { Some(vec![]) } else { None };
        }
        if s.len() > 1 {
            if self.expand && r.is_integer() && r.is_positive() && *r.numer() <= 8 {
                let mut acc = vec![Term::constant(Rational::one())];
                for _ in 0..*r.numer() {
                    acc = self.mul_sums(acc, s.clone())?;
                }
                return Some(acc);
            }
            if r.is_integer() {
                let t = self.sum_as_term(s, true)?;
                return self.pow_term(&t, r);
            }
            let base = self.rebuild_sum(s);
            return Some(vec![Term::factor(base, r)]);
        }
        let t = &s[0];
        self.pow_term(t, r)
    }

    fn pow_term(&self, t: &Term, r: Rational) -> Option<Vec<Term>> {
        if r.is_integer() {
            let coef = checked_pow(t.coef, *r.numer())?;
            let mut factors = BTreeMap::new();
            for (b, e) in &t.factors {
                factors.insert(b.clone(), e.checked_mul(&r)?);
            }
            return self.finish(Term { coef, factors });
        }
        // non-integer exponent: split only what is sign-safe
        let single = t.factors.len() <= 1 && t.coef.is_positive();
        if !single {
            return Some(vec![Term::factor(self.rebuild_term(t), r)]);
        }
        let mut out = match rational_root(t.coef, r) {
            Some(c) => Term::constant(c),
            None => Term::factor(Expr::rational(t.coef), r),
        };
        if let Some((b, e)) = t.factors.iter().next() {
            let f = if e.numer().is_odd() {
                Term::factor(b.clone(), e.checked_mul(&r)?)
            } else {
                Term::factor(b.powr(*e), r)
            };
            return self.mul_term(&out, &f);
        }
        out.factors.retain(|_, e| !e.is_zero());
        Some(vec![out])
    }

    /// exp of a normalized argument: `c*ln(v)` parts become powers of `v`.
    fn exp_of(&self, arg: Vec<Term>) -> Option<Vec<Term>> {
        let mut rest = Vec::new();
        let mut out = vec![Term::constant(Rational::one())];
        for t in arg {
            let ln_arg = if t.factors.len() == 1 {
                let (b, e) = t.factors.iter().next().unwrap();
                match b.kind() {
                    Node::Apply(Func::Ln, v) if e.is_one() => Some(v.clone()),
                    _ => None,
                }
            } else {
                None
            };
            match ln_arg {
                Some(v) => {
                    let p = self.pow_sum(self.terms(&v), t.coef)?;
                    out = self.mul_sums(out, p)?;
                }
                None => rest.push(t),
            }
        }
        if !rest.is_empty() {
            let e = Expr::exp(self.rebuild_sum(self.collect(rest)));
            out = self.mul_sums(out, vec![Term::factor(e, Rational::one())])?;
        }
        Some(out)
    }

    fn apply(&self, f: Func, a: &Expr) -> Option<Vec<Term>> {
        let ta = self.collect(self.terms(a));
        let arg = || self.rebuild_sum(ta.clone());
        let is_zero = ta.is_empty();
        let leading_negative = ta.first().is_some_and(|t| t.coef.is_negative());
        let one = || vec![Term::constant(Rational::one())];
        let mk = |g: Func, x: Expr| vec![Term::factor(Expr::apply(g, x), Rational::one())];
        Some(match f {
            Func::Sqrt => return self.pow_sum(ta, Rational::new(1, 2)),
            Func::Exp => {
                if is_zero {
                    one()
                } else {
                    return self.exp_of(ta);
                }
            }
            Func::Ln => {
                if ta.len() == 1 && ta[0].factors.is_empty() && ta[0].coef.is_one() {
                    vec![]
                } else if let Node::Apply(Func::Exp, u) = arg().kind() {
                    self.terms(u)
                } else {
                    mk(Func::Ln, arg())
                }
            }
            Func::Sin | Func::Sinh | Func::Tanh => {
                if is_zero {
                    vec![]
                } else if leading_negative {
                    neg_terms(mk(f, self.rebuild_sum(neg_terms(ta.clone()))))
                } else {
                    mk(f, arg())
                }
            }
            Func::Cos | Func::Cosh => {
                if is_zero {
                    one()
                } else if leading_negative {
                    mk(f, self.rebuild_sum(neg_terms(ta.clone())))
                } else {
                    mk(f, arg())
                }
            }
        })
    }

    fn rebuild_factor(base: &Expr, e: Rational) -> Expr {
        if e.is_one() {
            base.clone()
        } else {
            Expr::node(Node::Pow(base.clone(), e))
        }
    }

    fn rebuild_term(&self, t: &Term) -> Expr {
        let mut num: Option<Expr> = None;
        let mut den: Option<Expr> = None;
        let push = |acc: &mut Option<Expr>, f: Expr| {
            *acc = Some(match acc.take() {
                None => f,
                Some(a) => Expr::node(Node::Mul(a, f)),
            });
        };
        let p = t.coef.numer().abs();
        let q = *t.coef.denom();
        if p != 1 {
            push(&mut num, Expr::int(p));
        }
        if q != 1 {
            push(&mut den, Expr::int(q));
        }
        for (b, e) in &t.factors {
            if e.is_negative() {
                push(&mut den, Self::rebuild_factor(b, -e));
            } else {
                push(&mut num, Self::rebuild_factor(b, *e));
            }
        }
        let num = num.unwrap_or_else(Expr::one);
        let body = match den {
            None => num,
            Some(d) => match (num.as_const(), d.as_const()) {
                (Some(a), Some(b)) => Expr::rational(a / b),
                _ => Expr::node(Node::Div(num, d)),
            },
        };
        if t.coef.is_negative() {
            match body.as_const() {
                Some(c) => Expr::rational(-c),
                None => Expr::node(Node::Neg(body)),
            }
        } else {
            body
        }
    }

    fn rebuild_sum(&self, mut ts: Vec<Term>) -> Expr {
        // lead with a positive term when there is one
        if let Some(i) = ts.iter().position(|t| !t.coef.is_negative()) {
            let t = ts.remove(i);
            ts.insert(0, t);
        }
        let mut acc: Option<Expr> = None;
        for t in ts {
            acc = Some(match acc {
                None => self.rebuild_term(&t),
                Some(a) => {
                    if t.coef.is_negative() {
                        let mut pos = t.clone();
                        pos.coef = -pos.coef;
                        Expr::node(Node::Sub(a, self.rebuild_term(&pos)))
                    } else {
                        Expr::node(Node::Add(a, self.rebuild_term(&t)))
                    }
                }
            });
        }
        acc.unwrap_or_else(Expr::zero)
    }
}

impl Expr {
    /// Semantics-preserving light simplification.
    pub fn simplify(&self) -> Expr {
        let n = Norm { expand: false };
        n.rebuild_sum(n.collect(n.terms(self)))
    }

    /// Like [`Expr::simplify`], additionally distributing products over
    /// sums and small positive integer powers of sums.
    pub fn expand(&self) -> Expr {
        let n = Norm { expand: true };
        n.rebuild_sum(n.collect(n.terms(self)))
    }

    pub(crate) fn normal_terms(&self, expand: bool) -> Vec<Term> {
        let n = Norm { expand };
        n.collect(n.terms(self))
    }

    pub(crate) fn from_terms(ts: Vec<Term>) -> Expr {
        Norm { expand: false }.rebuild_sum(ts)
    }

    pub(crate) fn from_term(t: &Term) -> Expr {
        Norm { expand: false }.rebuild_term(t)
    }
}
