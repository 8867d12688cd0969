//! Linear second-order PDEs `a u_xx + 2b u_xy + c u_yy + d u_x + e u_y + g u = f`.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::expr::{
    equiv_zero, parse_equation_in, sqrt_exact, Expr, OracleConfig, OracleError, ParseError, SampleRegion, Slot, VarPair,
};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum PdeError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("equation is not linear in u: coefficient of {0} depends on u")]
    Nonlinear(String),
    #[error("no second-order term: a, b and c all vanish")]
    NoPrincipalPart,
    #[error("coefficient uses undeclared variable `{0}`")]
    ForeignVariable(String),
    #[error("{0}")]
    Oracle(#[from] OracleError),
    #[error("elliptic equation: characteristics are complex")]
    Elliptic,
    #[error("type changes over the region")]
    Mixed,
}

/// Which coordinate a monic factor is normalized against: `X` means
/// `d_x - L d_y`, `Y` means `d_y - L d_x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Pde2 {
    pub vars: VarPair,
    pub a: Expr,
    /// Half the coefficient of `u_xy`.
    pub b: Expr,
    pub c: Expr,
    pub d: Expr,
    pub e: Expr,
    pub g: Expr,
    pub f: Expr,
}

fn slot_coef(lhs: &Expr, slot: Slot) -> Result<Expr, PdeError> {
    let k = lhs.diff(slot.placeholder()).simplify();
    if k.vars().iter().any(|v| v.starts_with('@')) {
        return Err(PdeError::Nonlinear(slot_name(slot).to_string()));
    }
    Ok(k)
}

fn slot_name(slot: Slot) -> &'static str {
    match slot {
        Slot::U => "u",
        Slot::Ux => "u_x",
        Slot::Uy => "u_y",
        Slot::Uxx => "u_xx",
        Slot::Uxy => "u_xy",
        Slot::Uyy => "u_yy",
    }
}

impl Pde2 {
    /// Builds from coefficients `[a, b, c, d, e, g]` (b already halved) and `f`.
    pub fn new(vars: VarPair, coefs: [Expr; 6], f: Expr) -> Result<Pde2, PdeError> {
        let [a, b, c, d, e, g] = coefs.map(|k| k.simplify());
        let p = Pde2 {
            vars,
            a,
            b,
            c,
            d,
            e,
            g,
            f: f.simplify(),
        };
        if p.a.is_zero() && p.b.is_zero() && p.c.is_zero() {
            return Err(PdeError::NoPrincipalPart);
        }
        let names = p.vars.names();
        for k in p.coefficients().into_iter().chain([&p.f]) {
            if let Some(v) = k.vars().iter().find(|v| !names.contains(&&***v)) {
                return Err(PdeError::ForeignVariable(v.to_string()));
            }
        }
        Ok(p)
    }

    pub fn parse(text: &str, vars: &VarPair) -> Result<Pde2, PdeError> {
        Pde2::parse_with(text, vars, "u")
    }

    /// Like [`Pde2::parse`] for an unknown not called `u`.
    pub fn parse_with(text: &str, vars: &VarPair, unknown: &str) -> Result<Pde2, PdeError> {
        let (lhs, rhs) = parse_equation_in(text, vars, unknown)?;
        let diff = &lhs - &rhs;
        let k = |s| slot_coef(&diff, s);
        let a = k(Slot::Uxx)?;
        let b = (k(Slot::Uxy)? / Expr::int(2)).simplify();
        let c = k(Slot::Uyy)?;
        let d = k(Slot::Ux)?;
        let e = k(Slot::Uy)?;
        let g = k(Slot::U)?;
        let zero = Expr::zero();
        let binds: Vec<(&str, &Expr)> = Slot::ALL.iter().map(|s| (s.placeholder(), &zero)).collect();
        let f = (-diff.substitute(&binds)).simplify();
        Pde2::new(vars.clone(), [a, b, c, d, e, g], f)
    }

    pub fn coefficients(&self) -> [&Expr; 6] {
        [&self.a, &self.b, &self.c, &self.d, &self.e, &self.g]
    }

    pub fn discriminant(&self) -> Expr {
        (self.b.powi(2) - &self.a * &self.c).simplify()
    }

    /// `a u_xx + 2b u_xy + c u_yy` for a concrete `u`.
    pub fn principal(&self, u: &Expr) -> Expr {
        let [x, y] = self.vars.names();
        let ux = u.diff(x);
        let uy = u.diff(y);
        &self.a * ux.diff(x) + Expr::int(2) * &self.b * ux.diff(y) + &self.c * uy.diff(y)
    }

    /// Left-hand operator applied to `u` (without `f`).
    pub fn operator(&self, u: &Expr) -> Expr {
        let [x, y] = self.vars.names();
        self.principal(u) + &self.d * u.diff(x) + &self.e * u.diff(y) + &self.g * u
    }

    pub fn is_homogeneous(&self) -> bool {
        self.f.is_zero()
    }

    pub fn has_constant_coefficients(&self) -> bool {
        self.coefficients().iter().chain([&&self.f]).all(|k| k.as_const().is_some() || k.vars().is_empty())
    }

    /// The same equation as an equation string accepted by [`Pde2::parse`].
    pub fn text(&self) -> String {
        let [x, y] = self.vars.names();
        let two_b = (Expr::int(2) * &self.b).simplify();
        let atoms = [
            (&self.a, format!("u_{x}{x}")),
            (&two_b, format!("u_{x}{y}")),
            (&self.c, format!("u_{y}{y}")),
            (&self.d, format!("u_{x}")),
            (&self.e, format!("u_{y}")),
            (&self.g, "u".to_string()),
        ];
        let mut parts = Vec::new();
        for (k, atom) in atoms {
            if k.is_zero() {
                continue;
            }
            parts.push(if k.is_one() { atom } else { format!("({})*{atom}", k.pretty()) });
        }
        format!("{} = {}", parts.join(" + "), self.f.pretty())
    }
}

impl fmt::Display for Pde2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Hyperbolic,
    Parabolic,
    Elliptic,
    Mixed,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Hyperbolic => "hyperbolic",
            Kind::Parabolic => "parabolic",
            Kind::Elliptic => "elliptic",
            Kind::Mixed => "mixed",
        }
    }

    pub fn from_name(s: &str) -> Option<Kind> {
        [Kind::Hyperbolic, Kind::Parabolic, Kind::Elliptic, Kind::Mixed]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

/// Sign observations of the discriminant over the samples.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Evidence<T> {
    pub samples: usize,
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
    pub min: T,
    pub max: T,
    pub witness_positive: Option<(T, T)>,
    pub witness_negative: Option<(T, T)>,
    pub witness_zero: Option<(T, T)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification<T> {
    pub kind: Kind,
    pub discriminant: Expr,
    pub evidence: Evidence<T>,
}

pub fn classify<T: Scalar>(
    p: &Pde2,
    region: &SampleRegion<T>,
    cfg: &OracleConfig<T>,
) -> Result<Classification<T>, PdeError> {
    let delta = p.discriminant();
    let mut ev = Evidence {
        samples: 0,
        positive: 0,
        negative: 0,
        zero: 0,
        min: T::infinity(),
        max: T::neg_infinity(),
        witness_positive: None,
        witness_negative: None,
        witness_zero: None,
    };
    let names = region.vars.names();
    for pt in region.sample(cfg, &[&delta])? {
        let Ok((v, s)) = delta.eval_scaled(&[(names[0], pt.0), (names[1], pt.1)]) else {
            continue;
        };
        ev.samples += 1;
        ev.min = ev.min.min(v);
        ev.max = ev.max.max(v);
        let tol = cfg.tol(s);
        if v > tol {
            ev.positive += 1;
            ev.witness_positive.get_or_insert(pt);
        } else if v < -tol {
            ev.negative += 1;
            ev.witness_negative.get_or_insert(pt);
        } else {
            ev.zero += 1;
            ev.witness_zero.get_or_insert(pt);
        }
    }
    let kind = if ev.zero == ev.samples {
        Kind::Parabolic
    } else if ev.positive == ev.samples {
        Kind::Hyperbolic
    } else if ev.negative == ev.samples {
        Kind::Elliptic
    } else {
        Kind::Mixed
    };
    Ok(Classification {
        kind,
        discriminant: delta,
        evidence: ev,
    })
}

/// Roots of `a L^2 + 2b L + c = 0` (or the reversed quadratic for a
/// `Y`-normalized parabolic factor).
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaPair {
    pub kind: Kind,
    pub plus: Option<Expr>,
    pub minus: Option<Expr>,
    pub axis: Axis,
    /// `a` vanishes identically; only `plus` is a monic slope.
    pub degenerate: bool,
}

pub(crate) fn vanishes<T: Scalar>(e: &Expr, region: &SampleRegion<T>, cfg: &OracleConfig<T>) -> Result<bool, OracleError> {
    let s = e.simplify();
    if s.is_zero() {
        return Ok(true);
    }
    equiv_zero(&s, region, cfg)
}

fn is_constant(e: &Expr) -> bool {
    e.vars().is_empty()
}

/// Axis used for the single parabolic factor: `X` unless `a` vanishes, or
/// `c` is a nonzero constant while `a` is not constant.
pub(crate) fn parabolic_axis<T: Scalar>(
    p: &Pde2,
    region: &SampleRegion<T>,
    cfg: &OracleConfig<T>,
) -> Result<Axis, OracleError> {
    if vanishes(&p.a, region, cfg)? {
        return Ok(Axis::Y);
    }
    let c_const = is_constant(&p.c) && !p.c.is_zero();
    Ok(if c_const && !is_constant(&p.a) { Axis::Y } else { Axis::X })
}

pub fn lambdas<T: Scalar>(p: &Pde2, region: &SampleRegion<T>, cfg: &OracleConfig<T>) -> Result<LambdaPair, PdeError> {
    let cls = classify(p, region, cfg)?;
    match cls.kind {
        Kind::Elliptic => return Err(PdeError::Elliptic),
        Kind::Mixed => return Err(PdeError::Mixed),
        _ => {}
    }
    if cls.kind == Kind::Parabolic {
        let axis = parabolic_axis(p, region, cfg)?;
        let lam = match axis {
            Axis::X => -&p.b / &p.a,
            Axis::Y => -&p.b / &p.c,
        }
        .simplify();
        return Ok(LambdaPair {
            kind: Kind::Parabolic,
            plus: Some(lam.clone()),
            minus: Some(lam),
            axis,
            degenerate: false,
        });
    }
    if vanishes(&p.a, region, cfg)? {
        let lam = (-&p.c / (Expr::int(2) * &p.b)).simplify();
        return Ok(LambdaPair {
            kind: Kind::Hyperbolic,
            plus: Some(lam),
            minus: None,
            axis: Axis::X,
            degenerate: true,
        });
    }
    let root = sqrt_exact(&cls.discriminant, region, cfg).unwrap_or_else(|| cls.discriminant.powr((1, 2).into()));
    let plus = ((-&p.b + &root) / &p.a).simplify();
    let minus = ((-&p.b - &root) / &p.a).simplify();
    Ok(LambdaPair {
        kind: Kind::Hyperbolic,
        plus: Some(plus),
        minus: Some(minus),
        axis: Axis::X,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn region(vars: &VarPair, x: (f64, f64), y: (f64, f64)) -> SampleRegion<f64> {
        SampleRegion::new(vars.clone(), x, y).unwrap()
    }

    #[test]
    fn final_example_coefficients() {
        let v = VarPair::default();
        let p = Pde2::parse("x*u_xx + (x-y)*u_xy - y*u_yy = 0", &v).unwrap();
        assert_eq!(p.a, Expr::var("x"));
        assert_eq!((Expr::int(2) * &p.b).simplify(), parse_expr("x - y", &v).unwrap().simplify());
        assert_eq!(p.c, parse_expr("-y", &v).unwrap().simplify());
        assert!(p.f.is_zero());
    }

    #[test]
    fn moves_first_order_terms_left() {
        let v = VarPair::default();
        let p = Pde2::parse("u_xy + 2*x*u_yy = u_y", &v).unwrap();
        assert!(p.a.is_zero());
        assert_eq!(p.b, Expr::frac(1, 2));
        assert_eq!(p.e, Expr::int(-1));
        assert!(p.f.is_zero());
    }

    #[test]
    fn mixed_partial_orders_merge() {
        let v = VarPair::default();
        let p = Pde2::parse("u_xy + u_yx = 0", &v).unwrap();
        assert_eq!(p.b, Expr::one());
    }

    #[test]
    fn rejects_nonlinear_and_high_order() {
        let v = VarPair::default();
        assert!(matches!(Pde2::parse("u*u_xx = 0", &v), Err(PdeError::Nonlinear(_))));
        assert!(Pde2::parse("u_xxx = 0", &v).is_err());
        assert!(matches!(Pde2::parse("u_x = 0", &v), Err(PdeError::NoPrincipalPart)));
    }

    #[test]
    fn heat_equation_is_parabolic() {
        let v = VarPair::new("t", "x");
        let p = Pde2::parse("u_t = u_xx", &v).unwrap();
        let cls = classify(&p, &region(&v, (0.1, 1.0), (-1.0, 1.0)), &OracleConfig::default()).unwrap();
        assert_eq!(cls.kind, Kind::Parabolic);
    }

    #[test]
    fn laplace_is_elliptic_and_refused() {
        let v = VarPair::default();
        let p = Pde2::parse("u_xx + u_yy = 0", &v).unwrap();
        let r = region(&v, (-1.0, 1.0), (-1.0, 1.0));
        let cfg = OracleConfig::default();
        assert_eq!(classify(&p, &r, &cfg).unwrap().kind, Kind::Elliptic);
        assert_eq!(lambdas(&p, &r, &cfg), Err(PdeError::Elliptic));
    }

    #[test]
    fn sign_change_is_mixed() {
        let v = VarPair::default();
        let p = Pde2::parse("u_xx + x*u_yy = 0", &v).unwrap();
        let cls = classify(&p, &region(&v, (-1.0, 1.0), (-1.0, 1.0)), &OracleConfig::default()).unwrap();
        assert_eq!(cls.kind, Kind::Mixed);
        assert!(cls.evidence.witness_positive.is_some() && cls.evidence.witness_negative.is_some());
    }

    #[test]
    fn discriminant_examples() {
        let v = VarPair::new("t", "x");
        let p = Pde2::parse("u_tt + 4*t*u_tx + 3*t^2*u_xx = 0", &v).unwrap();
        assert_eq!(p.discriminant(), parse_expr("t^2", &v).unwrap());
        let w = VarPair::default();
        let q = Pde2::parse("y^2*u_xx - 2*y*u_xy + u_yy = 0", &w).unwrap();
        assert!(q.discriminant().is_zero());
    }

    #[test]
    fn text_round_trips() {
        let v = VarPair::default();
        let p = Pde2::parse("x*u_xx + (x-y)*u_xy - y*u_yy + 3*u = x", &v).unwrap();
        let q = Pde2::parse(&p.text(), &v).unwrap();
        assert_eq!(p, q);
    }
}
