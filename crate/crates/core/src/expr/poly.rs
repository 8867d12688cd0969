//! Exact square roots of discriminants: monomial products and Laurent
//! polynomials in the two declared variables.

use std::collections::BTreeMap;

use num_traits::{CheckedAdd, CheckedMul, CheckedSub, Signed, Zero};

use super::oracle::{equiv_zero, sign_on, OracleConfig, SampleRegion};
use super::tree::{Expr, Func, Node, Rational};
use crate::scalar::Scalar;

type Mono = (i64, i64);
type Poly = BTreeMap<Mono, Rational>;

fn rational_sqrt(c: Rational) -> Option<Rational> {
    if c.is_negative() {
        return None;
    }
    let isqrt = |n: i64| {
        let r = (n as f64).sqrt().round() as i64;
        (r - 1..=r + 1).find(|&k| k >= 0 && k.checked_mul(k) == Some(n))
    };
    Some(Rational::new(isqrt(*c.numer())?, isqrt(*c.denom())?))
}

fn to_poly(e: &Expr, x: &str, y: &str) -> Option<Poly> {
    let mut p = Poly::new();
    for t in e.normal_terms(true) {
        let mut m = (0i64, 0i64);
        for (b, k) in &t.factors {
            if !k.is_integer() {
                return None;
            }
            match b.kind() {
                Node::Var(v) if &**v == x => m.0 += k.numer(),
                Node::Var(v) if &**v == y => m.1 += k.numer(),
                _ => return None,
            }
        }
        let slot = p.entry(m).or_insert_with(Rational::zero);
        *slot = slot.checked_add(&t.coef)?;
    }
    p.retain(|_, c| !c.is_zero());
    Some(p)
}

fn mul(a: &Poly, b: &Poly) -> Option<Poly> {
    let mut out = Poly::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let m = (ma.0 + mb.0, ma.1 + mb.1);
            let slot = out.entry(m).or_insert_with(Rational::zero);
            *slot = slot.checked_add(&ca.checked_mul(cb)?)?;
        }
    }
    out.retain(|_, c| !c.is_zero());
    Some(out)
}

fn sub(a: &Poly, b: &Poly) -> Option<Poly> {
    let mut out = a.clone();
    for (m, c) in b {
        let slot = out.entry(*m).or_insert_with(Rational::zero);
        *slot = slot.checked_sub(c)?;
    }
    out.retain(|_, c| !c.is_zero());
    Some(out)
}

fn poly_sqrt(p: &Poly) -> Option<Poly> {
    let (&lead_m, &lead_c) = p.iter().next_back()?;
    if lead_m.0 % 2 != 0 || lead_m.1 % 2 != 0 {
        return None;
    }
    let s0 = rational_sqrt(lead_c)?;
    let s0_m = (lead_m.0 / 2, lead_m.1 / 2);
    let mut s = Poly::new();
    s.insert(s0_m, s0);
    for _ in 0..=p.len() + 2 {
        let r = sub(p, &mul(&s, &s)?)?;
        let Some((&rm, &rc)) = r.iter().next_back() else {
            return Some(s);
        };
        let m = (rm.0 - s0_m.0, rm.1 - s0_m.1);
        if m >= *s.keys().next()? {
            return None;
        }
        s.insert(m, rc / (Rational::from_integer(2) * s0));
    }
    None
}

fn poly_expr(p: &Poly, x: &str, y: &str) -> Expr {
    let mut acc = Expr::zero();
    for (m, c) in p.iter().rev() {
        acc = acc + Expr::rational(*c) * Expr::var(x).powi(m.0) * Expr::var(y).powi(m.1);
    }
    acc.simplify()
}

/// Monomial candidate: halve every exponent, `exp(u)` becomes `exp(u/2)`.
fn monomial_root(d: &Expr) -> Option<Expr> {
    let ts = d.normal_terms(false);
    if ts.len() != 1 {
        return None;
    }
    let t = &ts[0];
    let mut s = Expr::rational(rational_sqrt(t.coef)?);
    let half = Rational::new(1, 2);
    for (b, k) in &t.factors {
        let f = match b.kind() {
            Node::Apply(Func::Exp, u) => Expr::exp(u.scale(k * half)),
            _ => b.powr(k * half),
        };
        s = s * f;
    }
    Some(s.simplify())
}

/// `S` with `S >= 0` on the region and `S^2` oracle-equal to `d`, when `d`
/// is a recognizable perfect square; the sign of the candidate root is
/// fixed by the region.
pub fn sqrt_exact<T: Scalar>(d: &Expr, region: &SampleRegion<T>, cfg: &OracleConfig<T>) -> Option<Expr> {
    let d = d.simplify();
    if d.is_zero() {
        return Some(Expr::zero());
    }
    let [x, y] = region.vars.names();
    let candidate = monomial_root(&d).or_else(|| {
        let p = to_poly(&d, x, y)?;
        poly_sqrt(&p).map(|s| poly_expr(&s, x, y))
    })?;
    if !equiv_zero(&(candidate.powi(2) - &d), region, cfg).ok()? {
        return None;
    }
    match sign_on(&candidate, region, cfg).ok()? {
        Some(1) => Some(candidate),
        Some(-1) => Some((-candidate).simplify()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expr, VarPair};

    fn region(x: (f64, f64), y: (f64, f64), vars: VarPair) -> SampleRegion<f64> {
        SampleRegion::new(vars, x, y).unwrap()
    }

    #[test]
    fn square_of_binomial() {
        let v = VarPair::default();
        let d = parse_expr("((x-y)/2)^2 + x*y", &v).unwrap();
        let s = sqrt_exact(&d, &region((1.0, 2.0), (1.0, 2.0), v.clone()), &OracleConfig::default()).unwrap();
        let want = parse_expr("(x+y)/2", &v).unwrap();
        assert_eq!(s.simplify(), want.simplify());
    }

    #[test]
    fn sign_follows_region() {
        let v = VarPair::new("t", "x");
        let d = parse_expr("(2*t)^2 - 3*t^2", &v).unwrap();
        let cfg = OracleConfig::default();
        let pos = sqrt_exact(&d, &region((0.5, 1.5), (-1.0, 1.0), v.clone()), &cfg).unwrap();
        assert_eq!(pos, Expr::var("t"));
        let neg = sqrt_exact(&d, &region((-1.5, -0.5), (-1.0, 1.0), v.clone()), &cfg).unwrap();
        assert_eq!(neg, -Expr::var("t"));
        assert!(sqrt_exact(&d, &region((-1.0, 1.0), (-1.0, 1.0), v), &cfg).is_none());
    }

    #[test]
    fn non_square_is_absent() {
        let v = VarPair::default();
        let d = parse_expr("x^2 + y^2", &v).unwrap();
        assert!(sqrt_exact(&d, &region((1.0, 2.0), (1.0, 2.0), v), &OracleConfig::default()).is_none());
    }
}
