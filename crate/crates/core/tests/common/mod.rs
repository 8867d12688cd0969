//! Identity checks shared by the property suite and the acceptance run.
//! Each returns `Err` with a short description of the first violation.

#![allow(dead_code)]

use characteristica::canonical::{reduce_chain_rule, TransitionMap};
use characteristica::corpus::{load_corpus, Fixture};
use characteristica::expr::{equiv_zero, parse_expr, Rational};
use characteristica::factor::{factor_principal, FactorPair};
use characteristica::pde::{lambdas, Axis, Kind, Pde2};
use characteristica::{Expr, Oracle, Region, VarPair};

pub type Check = Result<(), String>;

pub fn zero(e: &Expr, r: &Region, cfg: &Oracle) -> bool {
    let s = e.simplify();
    s.is_zero() || equiv_zero(&s, r, cfg).unwrap_or(false)
}

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

pub fn box_region(lo: f64, hi: f64) -> Region {
    Region::new(VarPair::default(), (lo, hi), (lo, hi)).unwrap()
}

/// `{1, x, y, x^2, xy, y^2, x^3, e^x, sin y}` in the given variables.
pub fn probes(v: &VarPair) -> Vec<Expr> {
    ["1", "x", "y", "x^2", "x*y", "y^2", "x^3", "exp(x)", "sin(y)"]
        .iter()
        .map(|s| {
            let e = parse_expr(s, &VarPair::default()).unwrap();
            e.substitute(&[("x", &v.xe()), ("y", &v.ye())])
        })
        .collect()
}

/// `a (L - l1)(L - l2)` as a principal part with no lower-order terms.
pub fn constant_pde(a: &Rational, l1: &Rational, l2: &Rational) -> Pde2 {
    let b = -a * (l1 + l2) / Rational::from_integer(2.into());
    let c = a * l1 * l2;
    let k = |r: Rational| Expr::rational(r);
    Pde2::new(
        VarPair::default(),
        [k(*a), k(b), k(c), Expr::zero(), Expr::zero(), Expr::zero()],
        Expr::zero(),
    )
    .unwrap()
}

/// Both slopes solve `a L^2 + 2b L + c = 0`, and their sum and product
/// are `-2b/a` and `c/a`.
pub fn roots_and_vieta(p: &Pde2, r: &Region, cfg: &Oracle) -> Check {
    let lp = lambdas(p, r, cfg).map_err(|e| e.to_string())?;
    let (Some(lpl), Some(lmi)) = (lp.plus, lp.minus) else {
        return Err("missing slope".into());
    };
    let two = Expr::int(2);
    for l in [&lpl, &lmi] {
        ensure(zero(&(&p.a * l.powi(2) + &two * &p.b * l + &p.c), r, cfg), || format!("root {}", l.pretty()))?;
    }
    ensure(zero(&(&p.a * (&lpl + &lmi) + &two * &p.b), r, cfg), || "sum of roots".into())?;
    ensure(zero(&(&p.a * &lpl * &lmi - &p.c), r, cfg), || "product of roots".into())
}

/// `L[phi] = a L-[Lambda+] phi_y` for `phi` annihilated by `L+`.
pub fn principal_on_invariant(p: &Pde2, pair: &FactorPair, phi: &Expr, r: &Region, cfg: &Oracle) -> Check {
    let lam = pair.plus.lambda().ok_or("plus factor is not monic")?;
    let y = p.vars.names()[1];
    let want = &p.a * pair.minus.apply(lam) * phi.diff(y);
    ensure(zero(&(p.principal(phi) - want), r, cfg), || format!("L[{}]", phi.pretty()))
}

/// `[L-, L+] u = (L+[Lambda-] - L-[Lambda+]) u_y` on every probe.
pub fn commutator_identity(p: &Pde2, pair: &FactorPair, r: &Region, cfg: &Oracle) -> Check {
    let (Some(lp), Some(lm)) = (pair.plus.lambda(), pair.minus.lambda()) else {
        return Err("factors are not monic".into());
    };
    let k = pair.plus.apply(lm) - pair.minus.apply(lp);
    let y = p.vars.names()[1];
    for u in probes(&p.vars) {
        let comm = pair.minus.apply(&pair.plus.apply(&u)) - pair.plus.apply(&pair.minus.apply(&u));
        ensure(zero(&(comm - &k * u.diff(y)), r, cfg), || format!("commutator on {}", u.pretty()))?;
    }
    Ok(())
}

/// `lead * (L- L+ - rho . grad)` equals the principal part on every probe.
pub fn factor_identity(p: &Pde2, pair: &FactorPair, r: &Region, cfg: &Oracle) -> Check {
    for u in probes(&p.vars) {
        ensure(zero(&(pair.principal(&u) - p.principal(&u)), r, cfg), || format!("factors on {}", u.pretty()))?;
    }
    Ok(())
}

/// Chain-rule `U_xieta` coefficient before normalization is
/// `-(4 Delta / a) phi_y psi_y`.
pub fn chain_rule_lead(p: &Pde2, phi: &Expr, psi: &Expr, r: &Region, cfg: &Oracle) -> Check {
    let map = TransitionMap::new(p.vars.clone(), phi.clone(), psi.clone(), None);
    let form = reduce_chain_rule(p, &map, Kind::Hyperbolic, r, cfg).map_err(|e| e.to_string())?;
    let y = p.vars.names()[1];
    let want = -(Expr::int(4) * p.discriminant() / &p.a) * phi.diff(y) * psi.diff(y);
    let got = form.normalized_by.ok_or("unnormalized form")?;
    ensure(zero(&(got - want), r, cfg), || "chain-rule lead".into())
}

/// `J^-1 J = I` and `det J^-1 det J = 1`, inverse pieces pulled back to
/// source coordinates.
pub fn jacobian_reciprocity(map: &TransitionMap, r: &Region, cfg: &Oracle) -> Check {
    let fwd = map.forward_jacobian();
    let back = map.inverse_jacobian().ok_or("no inverse")?.map(|row| row.map(|e| map.to_source(&e)));
    for i in 0..2 {
        for j in 0..2 {
            let prod = &back[i][0] * &fwd[0][j] + &back[i][1] * &fwd[1][j];
            let id = if i == j { Expr::one() } else { Expr::zero() };
            ensure(zero(&(prod - id), r, cfg), || format!("J^-1 J entry {i}{j}"))?;
        }
    }
    let det = map.to_source(&map.inverse_determinant().ok_or("no inverse")?);
    ensure(zero(&(det * map.jacobian() - Expr::one()), r, cfg), || "determinant reciprocity".into())
}

pub fn fixture_map(fx: &Fixture) -> Option<TransitionMap> {
    let inv = fx.inverse_exprs().unwrap()?;
    Some(TransitionMap::new(
        fx.var_pair(),
        fx.phi_expr().unwrap()?,
        fx.psi_expr().unwrap()?,
        Some(inv),
    ))
}

/// Non-degenerate hyperbolic fixtures with `X`-monic factors.
pub fn hyperbolic_x_fixtures() -> Vec<(Fixture, Pde2, Region, FactorPair)> {
    let cfg = Oracle::default();
    load_corpus()
        .unwrap()
        .into_iter()
        .filter(|f| f.classification == "hyperbolic" && !f.degenerate)
        .filter_map(|f| {
            let p = f.parse_pde().unwrap();
            let r = f.sample_region().unwrap();
            let lp = lambdas(&p, &r, &cfg).unwrap();
            let pair = factor_principal(&p, &r, &cfg).unwrap();
            (lp.axis == Axis::X).then_some((f, p, r, pair))
        })
        .collect()
}

/// Every structural identity over the corpus plus a fixed grid of
/// constant-coefficient equations. Returns the number of identities
/// checked.
pub fn all_identities() -> Result<usize, String> {
    let cfg = Oracle::default();
    let mut n = 0;
    for (fx, p, r, pair) in hyperbolic_x_fixtures() {
        roots_and_vieta(&p, &r, &cfg).map_err(|e| format!("{}: {e}", fx.id))?;
        principal_on_invariant(&p, &pair, &fx.phi_expr().unwrap().unwrap(), &r, &cfg).map_err(|e| format!("{}: {e}", fx.id))?;
        commutator_identity(&p, &pair, &r, &cfg).map_err(|e| format!("{}: {e}", fx.id))?;
        n += 3;
    }
    for fx in load_corpus().unwrap() {
        let p = fx.parse_pde().unwrap();
        let r = fx.sample_region().unwrap();
        let pair = factor_principal(&p, &r, &cfg).map_err(|e| e.to_string())?;
        factor_identity(&p, &pair, &r, &cfg).map_err(|e| format!("{}: {e}", fx.id))?;
        n += 1;
        if let Some(map) = fixture_map(&fx) {
            jacobian_reciprocity(&map, &r, &cfg).map_err(|e| format!("{}: {e}", fx.id))?;
            n += 1;
        }
    }
    let r = box_region(0.5, 1.5);
    let roots = [(-2, 1), (-1, 2), (0, 1), (1, 1), (3, 2)];
    for a in [1, -3] {
        for (i, &(n1, d1)) in roots.iter().enumerate() {
            for &(n2, d2) in &roots[i + 1..] {
                let q = |n: i64, d: i64| Rational::new(n, d);
                let (a, l1, l2) = (Rational::from_integer(a.into()), q(n1, d1), q(n2, d2));
                let p = constant_pde(&a, &l1, &l2);
                let v = &p.vars;
                let phi = (v.ye() + Expr::rational(l1) * v.xe()).simplify();
                let psi = (v.ye() + Expr::rational(l2) * v.xe()).simplify();
                let pair = factor_principal(&p, &r, &cfg).map_err(|e| e.to_string())?;
                roots_and_vieta(&p, &r, &cfg)?;
                chain_rule_lead(&p, &phi, &psi, &r, &cfg)?;
                commutator_identity(&p, &pair, &r, &cfg)?;
                n += 3;
            }
        }
    }
    Ok(n)
}
