//! Closed-form invariants of `dy/dx = R` from a small catalog.

use super::{verify_invariant, CharacteristicOde, Invariant, Provenance};
use crate::expr::{
    antiderivative, integrating_factor, Expr, Func, Node, OracleConfig, OracleError, Rational, SampleRegion,
};
use crate::pde::vanishes;
use crate::scalar::Scalar;

/// A rational close to `v` with denominator 16, used as an exact slice
/// coordinate.
fn slice_at<T: Scalar>(v: T) -> Expr {
    Expr::rational(Rational::new((v.as_f64() * 16.0).round() as i64, 16))
}

fn slices<T: Scalar>(region: &SampleRegion<T>) -> (Expr, Expr) {
    let (cx, cy) = region.center();
    (slice_at(cx), slice_at(cy))
}

/// Cross-ratio test `R(x,y) R(x0,y0) = R(x,y0) R(x0,y)` at the oracle samples.
pub fn is_separable<T: Scalar>(r: &Expr, region: &SampleRegion<T>, cfg: &OracleConfig<T>) -> Result<bool, OracleError> {
    let [x, y] = region.vars.names();
    let (x0, y0) = slices(region);
    let at = |bx: Option<&Expr>, by: Option<&Expr>| {
        let mut b = Vec::new();
        if let Some(e) = bx {
            b.push((x, e));
        }
        if let Some(e) = by {
            b.push((y, e));
        }
        r.substitute(&b)
    };
    let lhs = r * at(Some(&x0), Some(&y0));
    let rhs = at(None, Some(&y0)) * at(Some(&x0), None);
    vanishes(&(lhs - rhs), region, cfg)
}

/// `R = f(x) g(y)` read off a single product term; `exp` of a sum is split
/// into its `x` and `y` parts.
fn split_symbolic(r: &Expr, x: &str, y: &str) -> Option<(Expr, Expr)> {
    let ts = r.normal_terms(false);
    if ts.len() != 1 {
        return None;
    }
    let t = &ts[0];
    let mut f = Expr::rational(t.coef);
    let mut g = Expr::one();
    for (b, k) in &t.factors {
        match (b.contains_var(x), b.contains_var(y)) {
            (_, false) => f = f * b.powr(*k),
            (false, true) => g = g * b.powr(*k),
            (true, true) => {
                let Node::Apply(Func::Exp, u) = b.kind() else {
                    return None;
                };
                let (mut ux, mut uy) = (Expr::zero(), Expr::zero());
                for ut in u.normal_terms(false) {
                    let e = Expr::from_term(&ut);
                    match (e.contains_var(x), e.contains_var(y)) {
                        (true, true) => return None,
                        (false, true) => uy = uy + e,
                        _ => ux = ux + e,
                    }
                }
                f = f * Expr::exp(ux.scale(*k));
                g = g * Expr::exp(uy.scale(*k));
            }
        }
    }
    Some((f.simplify(), g.simplify()))
}

/// `f(x) = R(x, y0)`, `g(y) = R(x0, y) / R(x0, y0)`, certified by the oracle.
fn split_numeric<T: Scalar>(r: &Expr, region: &SampleRegion<T>, cfg: &OracleConfig<T>) -> Option<(Expr, Expr)> {
    let [x, y] = region.vars.names();
    let (x0, y0) = slices(region);
    let r0 = r.substitute(&[(x, &x0), (y, &y0)]).simplify();
    let v0: f64 = r0.eval(&[]).ok()?;
    if v0.abs() < 1e-9 {
        return None;
    }
    let f = r.substitute(&[(y, &y0)]).simplify();
    let g = (r.substitute(&[(x, &x0)]) / r0).simplify();
    vanishes(&(r - &f * &g), region, cfg).ok()?.then_some((f, g))
}

fn separable_phi(f: &Expr, g: &Expr, x: &str, y: &str) -> Option<Expr> {
    let gy = antiderivative(&(Expr::one() / g).simplify(), y)?;
    let fx = antiderivative(f, x)?;
    Some(gy - fx)
}

/// `R = p(x) y + q(x)`: `phi = mu y - int mu q dx` with `mu = exp(-int p dx)`.
fn linear_phi(r: &Expr, x: &str, y: &str) -> Option<Expr> {
    let p = r.diff(y).simplify();
    if p.contains_var(y) || p.is_zero() {
        return None;
    }
    let q = (r - &p * Expr::var(y)).simplify();
    if q.contains_var(y) {
        return None;
    }
    let mu = integrating_factor(&p, x)?;
    let iq = antiderivative(&(&mu * &q).simplify(), x)?;
    Some(mu * Expr::var(y) - iq)
}

/// Catalog in order: `R` free of `y`, `R` free of `x`, linear in `y`,
/// separable (symbolic split, then numeric slicing). Coordinate-line
/// families come first. The result is verified and oriented so that it
/// increases with `y` at the region center when `phi_y` is nonzero there.
pub fn solve_invariant<T: Scalar>(
    ode: &CharacteristicOde,
    region: &SampleRegion<T>,
    cfg: &OracleConfig<T>,
) -> Option<Invariant> {
    let [x, y] = ode.vars.names();
    let op = ode.op();
    let accept = |phi: Expr| -> Option<Invariant> {
        let phi = phi.simplify();
        if !verify_invariant(&op, &phi, region, cfg).ok()? {
            return None;
        }
        let (cx, cy) = region.center();
        let phi = match phi.diff(y).eval_at(ode.vars.names(), cx, cy) {
            Ok(v) if v < T::zero() => (-phi).simplify(),
            _ => phi,
        };
        Some(Invariant {
            phi,
            family: ode.family,
            provenance: Provenance::SolvedSymbolically,
        })
    };
    if vanishes(&ode.alpha, region, cfg).ok()? {
        return accept(Expr::var(x));
    }
    if vanishes(&ode.beta, region, cfg).ok()? {
        return accept(Expr::var(y));
    }
    let r = ode.rhs.clone().unwrap_or_else(|| (&ode.beta / &ode.alpha).simplify());
    let ye = Expr::var(y);
    let xe = Expr::var(x);
    if !r.contains_var(y) {
        if let Some(phi) = antiderivative(&r, x).and_then(|i| accept(&ye - i)) {
            return Some(phi);
        }
    }
    if !r.contains_var(x) {
        let inv = (Expr::one() / &r).simplify();
        if let Some(phi) = antiderivative(&inv, y).and_then(|i| accept(&xe - i)) {
            return Some(phi);
        }
    }
    if let Some(phi) = linear_phi(&r, x, y).and_then(accept) {
        return Some(phi);
    }
    let split = split_symbolic(&r, x, y).or_else(|| split_numeric(&r, region, cfg))?;
    separable_phi(&split.0, &split.1, x, y).and_then(accept)
}

#[cfg(test)]
mod tests {
    use super::super::{invariant_equivalent, Family};
    use super::*;
    use crate::expr::{parse_expr, VarPair};

    fn run(vars: VarPair, rhs: &str, x: (f64, f64), y: (f64, f64)) -> (Invariant, SampleRegion<f64>) {
        let r = SampleRegion::new(vars.clone(), x, y).unwrap();
        let ode = CharacteristicOde::slope(vars.clone(), parse_expr(rhs, &vars).unwrap(), Family::Plus);
        (solve_invariant(&ode, &r, &OracleConfig::default()).expect(rhs), r)
    }

    #[test]
    fn free_of_y() {
        let v = VarPair::new("t", "x");
        let (inv, _) = run(v.clone(), "t", (0.5, 1.5), (-1.0, 1.0));
        assert_eq!(inv.phi, parse_expr("x - t^2/2", &v).unwrap().simplify());
    }

    #[test]
    fn hyperbola_family() {
        let v = VarPair::default();
        let (inv, r) = run(v.clone(), "-y/x", (1.0, 2.0), (1.0, 2.0));
        let want = parse_expr("x*y", &v).unwrap();
        assert!(invariant_equivalent(&inv.phi, &want, &r, &OracleConfig::default()).unwrap());
    }

    #[test]
    fn circles() {
        let v = VarPair::default();
        let (inv, r) = run(v.clone(), "-x/y", (0.5, 1.5), (0.5, 1.5));
        let want = parse_expr("x^2 + y^2", &v).unwrap();
        assert!(invariant_equivalent(&inv.phi, &want, &r, &OracleConfig::default()).unwrap());
    }

    #[test]
    fn separable_exponential_families() {
        let v = VarPair::default();
        let cfg = OracleConfig::default();
        let (inv, r) = run(v.clone(), "-exp(x + y/2)/(exp(x) - 1)", (0.5, 2.0), (-1.0, 1.0));
        let want = parse_expr("ln(exp(x) - 1) - 2*exp(-y/2)", &v).unwrap();
        assert!(invariant_equivalent(&inv.phi, &want, &r, &cfg).unwrap());
        let (inv, r) = run(v.clone(), "-exp(y/2)/(exp(x) - 1)", (0.5, 2.0), (-1.0, 1.0));
        let want = parse_expr("ln(exp(x) - 1) - 2*exp(-y/2) - x", &v).unwrap();
        assert!(invariant_equivalent(&inv.phi, &want, &r, &cfg).unwrap());
    }

    #[test]
    fn linear_in_y() {
        let v = VarPair::default();
        let (inv, r) = run(v.clone(), "y + exp(x)", (0.0, 1.0), (0.0, 1.0));
        let want = parse_expr("exp(-x)*y - x", &v).unwrap();
        assert!(invariant_equivalent(&inv.phi, &want, &r, &OracleConfig::default()).unwrap());
    }

    #[test]
    fn separability_detector() {
        let v = VarPair::default();
        let r = SampleRegion::new(v.clone(), (0.5, 1.5), (0.5, 1.5)).unwrap();
        let cfg = OracleConfig::default();
        assert!(is_separable(&parse_expr("x^2*exp(y)/(1 + y^2)", &v).unwrap(), &r, &cfg).unwrap());
        assert!(!is_separable(&parse_expr("x + y", &v).unwrap(), &r, &cfg).unwrap());
    }

    #[test]
    fn miss_is_absent() {
        let v = VarPair::default();
        let r = SampleRegion::new(v.clone(), (0.5, 1.5), (0.5, 1.5)).unwrap();
        let ode = CharacteristicOde::slope(v.clone(), parse_expr("x^2 + y^2", &v).unwrap(), Family::Plus);
        assert!(solve_invariant(&ode, &r, &OracleConfig::default()).is_none());
    }
}
