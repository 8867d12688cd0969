//! Table-driven antiderivatives. A miss is `None`; a hit is re-checked by
//! differentiation at a handful of fixed points before it is returned.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::simplify::Term;
use super::tree::{Expr, Func, Node, Rational};

const MAX_DEPTH: usize = 3;

fn free_of(e: &Expr, v: &str) -> bool {
    !e.contains_var(v)
}

/// `d(b)/dv` when it is nonzero and free of `v`.
fn linear_slope(b: &Expr, v: &str) -> Option<Expr> {
    let a = b.diff(v).simplify();
    (free_of(&a, v) && !a.is_zero()).then_some(a)
}

fn power_rule(b: &Expr, k: Rational) -> Expr {
    if k == -Rational::one() {
        Expr::ln(b.clone())
    } else {
        let k1 = k + Rational::one();
        b.powr(k1) / Expr::rational(k1)
    }
}

fn term_expr(factors: &BTreeMap<Expr, Rational>) -> Expr {
    Expr::from_term(&Term {
        coef: Rational::one(),
        factors: factors.clone(),
    })
}

fn integrate(e: &Expr, v: &str, depth: usize) -> Option<Expr> {
    let ts = e.normal_terms(false);
    let mut acc = Expr::zero();
    for t in ts {
        let (free, dep): (BTreeMap<_, _>, BTreeMap<_, _>) =
            t.factors.into_iter().partition(|(b, _)| free_of(b, v));
        let k = Expr::rational(t.coef) * term_expr(&free);
        let part = if dep.is_empty() {
            Expr::var(v)
        } else {
            integrate_dep(&dep, v, depth)?
        };
        acc = acc + k * part;
    }
    Some(acc.simplify())
}

fn integrate_dep(dep: &BTreeMap<Expr, Rational>, v: &str, depth: usize) -> Option<Expr> {
    if dep.len() == 1 {
        let (b, k) = dep.iter().next().unwrap();
        if let Some(r) = single_factor(b, *k, v) {
            return Some(r);
        }
    }
    if let Some(r) = chain_pattern(dep, v) {
        return Some(r);
    }
    if let Some(r) = polynomial_times_linear_power(dep, v) {
        return Some(r);
    }
    if depth < MAX_DEPTH {
        let whole = term_expr(dep);
        let expanded = whole.expand();
        if expanded.normal_terms(false).len() > 1 {
            return integrate(&expanded, v, depth + 1);
        }
    }
    None
}

fn single_factor(b: &Expr, k: Rational, v: &str) -> Option<Expr> {
    if let Some(a) = linear_slope(b, v) {
        return Some(power_rule(b, k) / a);
    }
    if let Node::Apply(f, u) = b.kind() {
        if k.is_one() {
            if let Some(a) = linear_slope(u, v) {
                let u = u.clone();
                let prim = match f {
                    Func::Exp => Some(b.clone()),
                    Func::Sin => Some(-Expr::cos(u)),
                    Func::Cos => Some(Expr::sin(u)),
                    Func::Sinh => Some(Expr::cosh(u)),
                    Func::Cosh => Some(Expr::sinh(u)),
                    _ => None,
                };
                if let Some(p) = prim {
                    return Some(p / a);
                }
            }
        }
    }
    if k == -Rational::one() {
        return exp_shift_reciprocal(b, v);
    }
    None
}

/// `1/(A*exp(u) + B)` with `u` linear in `v`.
fn exp_shift_reciprocal(b: &Expr, v: &str) -> Option<Expr> {
    let ts = b.normal_terms(false);
    if ts.len() != 2 {
        return None;
    }
    let (konst, other): (Vec<_>, Vec<_>) = ts.into_iter().partition(|t| t.factors.keys().all(|f| free_of(f, v)));
    if konst.len() != 1 || other.len() != 1 {
        return None;
    }
    let big_b = Expr::from_term(&konst[0]);
    let mut u = None;
    for (f, k) in &other[0].factors {
        if free_of(f, v) {
            continue;
        }
        match f.kind() {
            Node::Apply(Func::Exp, arg) if k.is_one() && u.is_none() => u = Some(arg.clone()),
            _ => return None,
        }
    }
    let u = u?;
    let alpha = linear_slope(&u, v)?;
    Some((u - Expr::ln(b.clone())) / (alpha * big_b))
}

/// `g' * g^k` up to a factor free of `v`.
fn chain_pattern(dep: &BTreeMap<Expr, Rational>, v: &str) -> Option<Expr> {
    for (g, k) in dep {
        let dg = g.diff(v).simplify();
        if dg.is_zero() {
            continue;
        }
        let mut rest = dep.clone();
        rest.remove(g);
        let ratio = (term_expr(&rest) / dg).simplify();
        if free_of(&ratio, v) {
            return Some(ratio * power_rule(g, *k));
        }
    }
    None
}

/// `v^n * (alpha v + beta)^k` via the substitution `w = alpha v + beta`.
fn polynomial_times_linear_power(dep: &BTreeMap<Expr, Rational>, v: &str) -> Option<Expr> {
    if dep.len() != 2 {
        return None;
    }
    let var = Expr::var(v);
    let n = *dep.get(&var)?;
    if !n.is_integer() || n <= Rational::zero() || *n.numer() > 8 {
        return None;
    }
    let (b, k) = dep.iter().find(|(b, _)| **b != var)?;
    let alpha = linear_slope(b, v)?;
    let beta = (b - &alpha * &var).simplify();
    if !free_of(&beta, v) {
        return None;
    }
    let w = Expr::var("@w");
    let sub = ((&w - &beta) / &alpha).powr(n).expand();
    let mut acc = Expr::zero();
    for t in sub.normal_terms(false) {
        let mut factors = t.factors.clone();
        let j = factors.remove(&w).unwrap_or_else(Rational::zero);
        if factors.keys().any(|f| f.contains_var("@w")) {
            return None;
        }
        let c = Expr::rational(t.coef) * term_expr(&factors);
        acc = acc + c * power_rule(&w, j + k);
    }
    Some((acc / alpha).substitute(&[("@w", b)]))
}

/// Fixed probe points for the self-check, chosen inside typical positive
/// domains.
const PROBES: [f64; 7] = [0.37, 0.61, 0.83, 1.13, 1.41, 1.77, 2.09];

fn self_check(prim: &Expr, e: &Expr, v: &str) -> bool {
    let mut names: Vec<String> = e.vars().iter().chain(prim.vars().iter()).map(|s| s.to_string()).collect();
    names.sort();
    names.dedup();
    let d = prim.diff(v);
    let mut checked = 0;
    for i in 0..PROBES.len() {
        let env: Vec<(&str, f64)> = names
            .iter()
            .enumerate()
            .map(|(j, n)| (n.as_str(), PROBES[(i + 3 * j) % PROBES.len()]))
            .collect();
        if let (Ok((a, sa)), Ok((b, sb))) = (d.eval_scaled(&env), e.eval_scaled(&env)) {
            if (a - b).abs() > 1e-9 * (1.0 + sa + sb) {
                return false;
            }
            checked += 1;
        }
    }
    checked > 0
}

/// Antiderivative of `e` with respect to `v` from the closed catalog.
pub fn antiderivative(e: &Expr, v: &str) -> Option<Expr> {
    let prim = integrate(e, v, 0)?;
    self_check(&prim, e, v).then_some(prim)
}

/// Integrating factor `mu = exp(-int p dv)` of `y' = p y + q`.
pub fn integrating_factor(p: &Expr, v: &str) -> Option<Expr> {
    let ip = antiderivative(p, v)?;
    Some(Expr::exp(-ip).simplify())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expr, VarPair};

    fn p(s: &str) -> Expr {
        parse_expr(s, &VarPair::default()).unwrap()
    }

    fn pt(s: &str) -> Expr {
        parse_expr(s, &VarPair::new("t", "x")).unwrap()
    }

    #[test]
    fn linear_term() {
        assert_eq!(antiderivative(&p("-x"), "x").unwrap(), p("-x^2/2").simplify());
        assert_eq!(antiderivative(&pt("t"), "t").unwrap(), pt("t^2/2").simplify());
    }

    #[test]
    fn log_derivative_pattern() {
        let got = antiderivative(&p("exp(x)/(exp(x) - 1)"), "x").unwrap();
        assert_eq!(got, p("ln(exp(x) - 1)").simplify());
    }

    #[test]
    fn exponential_linear_argument() {
        let got = antiderivative(&p("exp(-y/2)"), "y").unwrap();
        assert_eq!(got, p("-2*exp(-y/2)").simplify());
    }

    #[test]
    fn reciprocal_shifted_exponential() {
        let got = antiderivative(&p("1/(exp(x) - 1)"), "x").unwrap();
        let d = (got.diff("x") - p("1/(exp(x) - 1)")).simplify();
        assert!(d.eval_at(["x", "y"], 0.7f64, 0.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn misses_are_absent() {
        assert!(antiderivative(&p("exp(x^2)"), "x").is_none());
        assert!(antiderivative(&p("sin(x)/x"), "x").is_none());
    }

    #[test]
    fn integrating_factor_of_unit_rate() {
        assert_eq!(integrating_factor(&Expr::one(), "x").unwrap(), p("exp(-x)"));
    }
}
