//! General solutions of recognized canonical forms, pull-back, and
//! residual certification against the original equation.

use std::fmt;

use num_traits::One;
use serde::Serialize;
use thiserror::Error;

use crate::canonical::{CanonicalForm, TransitionMap};
use crate::expr::{antiderivative, Expr, Func, Node, OracleConfig, OracleError, SampleRegion, VarPair};
use crate::pde::{lambdas, vanishes, Kind, Pde2, PdeError};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SolveError {
    #[error("{0}")]
    Pde(#[from] PdeError),
    #[error("{0}")]
    Oracle(#[from] OracleError),
    #[error("precondition failed: {0}")]
    Precondition(&'static str),
}

/// One arbitrary-function term `multiplier * F(argument)`. Without an
/// argument the function is a constant `K` and only `multiplier` remains.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FunctionSlot {
    pub name: &'static str,
    #[serde(serialize_with = "crate::ser::expr")]
    pub multiplier: Expr,
    #[serde(serialize_with = "crate::ser::opt_expr")]
    pub argument: Option<Expr>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneralSolution {
    #[serde(skip)]
    pub vars: VarPair,
    #[serde(serialize_with = "crate::ser::expr")]
    pub particular: Expr,
    pub slots: Vec<FunctionSlot>,
    pub rule: &'static str,
}

/// Concrete choices for `(F, G)`; `K` stands in for a constant slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Probe {
    SinCos,
    ExpSquare,
    CubeId,
}

impl Probe {
    pub const ALL: [Probe; 3] = [Probe::SinCos, Probe::ExpSquare, Probe::CubeId];

    pub fn name(self) -> &'static str {
        match self {
            Probe::SinCos => "(sin, cos)",
            Probe::ExpSquare => "(exp, square)",
            Probe::CubeId => "(cube, id)",
        }
    }

    fn apply(self, slot: usize, arg: &Expr) -> Expr {
        let a = arg.clone();
        match (self, slot) {
            (Probe::SinCos, 0) => Expr::sin(a),
            (Probe::SinCos, _) => Expr::cos(a),
            (Probe::ExpSquare, 0) => Expr::exp(a),
            (Probe::ExpSquare, _) => a.powi(2),
            (Probe::CubeId, 0) => a.powi(3),
            (Probe::CubeId, _) => a,
        }
    }

    fn constant(self) -> Expr {
        match self {
            Probe::SinCos => Expr::one(),
            Probe::ExpSquare => Expr::int(2),
            Probe::CubeId => Expr::frac(-1, 2),
        }
    }
}

impl GeneralSolution {
    pub fn new(vars: VarPair, particular: Expr, slots: Vec<FunctionSlot>, rule: &'static str) -> GeneralSolution {
        GeneralSolution {
            vars,
            particular,
            slots,
            rule,
        }
    }

    pub fn instantiate(&self, probe: Probe) -> Expr {
        let mut u = self.particular.clone();
        for (i, s) in self.slots.iter().enumerate() {
            let f = match &s.argument {
                Some(a) => probe.apply(i, a),
                None => probe.constant(),
            };
            u = u + &s.multiplier * f;
        }
        u
    }

    pub fn text(&self) -> String {
        let mut parts = Vec::new();
        if !self.particular.is_zero() {
            parts.push(self.particular.pretty());
        }
        for s in &self.slots {
            let call = match &s.argument {
                Some(a) => format!("{}({})", s.name, a.pretty()),
                None => s.name.to_string(),
            };
            let m = s.multiplier.pretty();
            parts.push(if s.multiplier.is_one() {
                call
            } else if m.contains(' ') || m.contains('/') || m.starts_with('-') {
                format!("({m})*{call}")
            } else {
                format!("{m}*{call}")
            });
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

impl fmt::Display for GeneralSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text())
    }
}

/// `exp(e)` with `c*ln(w)` terms of the exponent turned into `w^c`.
fn exp_of(e: &Expr) -> Expr {
    let mut rest = Vec::new();
    let mut out = Expr::one();
    for t in e.simplify().normal_terms(false) {
        let log = (t.factors.len() == 1)
            .then(|| t.factors.iter().next().unwrap())
            .filter(|(_, k)| k.is_one())
            .and_then(|(b, _)| match b.kind() {
                Node::Apply(Func::Ln, w) => Some(w.clone()),
                _ => None,
            });
        match log {
            Some(w) => out = out * w.powr(t.coef),
            None => rest.push(t),
        }
    }
    if !rest.is_empty() {
        out = out * Expr::exp(Expr::from_terms(rest));
    }
    out.simplify()
}

/// A slot in target coordinates: constants are coordinate-free, anything
/// else needs the mapped rendering.
fn target_slot(form: &CanonicalForm, i: usize) -> Option<Expr> {
    let src = form.coefficients.slots()[i];
    if src.vars().is_empty() {
        return Some(src.clone());
    }
    form.mapped.as_ref().map(|m| m.slots()[i].clone())
}

fn slot(name: &'static str, multiplier: Expr, argument: Option<Expr>) -> FunctionSlot {
    FunctionSlot {
        name,
        multiplier: multiplier.simplify(),
        argument,
    }
}

/// Catalog: `U_xieta + A U_xi + B U_eta = 0` with `A` or `B` zero, and
/// `U_etaeta + h U_eta = r`. Zero tests run on the source coefficients;
/// the integrations need the target rendering.
pub fn solve_canonical<T: Scalar>(
    form: &CanonicalForm,
    region: &SampleRegion<T>,
    cfg: &OracleConfig<T>,
) -> Result<Option<GeneralSolution>, OracleError> {
    if form.normalized_by.is_none() {
        return Ok(None);
    }
    let zero: Vec<bool> = form
        .coefficients
        .slots()
        .iter()
        .map(|e| vanishes(e, region, cfg))
        .collect::<Result<_, _>>()?;
    let t = VarPair::target();
    let (xi, eta) = (t.xe(), t.ye());
    let [u, v] = t.names();
    // slots: uxixi, uxieta, uetaeta, uxi, ueta, u, rhs
    let sol = match form.kind {
        Kind::Hyperbolic => {
            if !(zero[0] && zero[2] && zero[5] && zero[6]) {
                return Ok(None);
            }
            match (zero[3], zero[4]) {
                (true, true) => Some(GeneralSolution::new(
                    t.clone(),
                    Expr::zero(),
                    vec![slot("F", Expr::one(), Some(xi)), slot("G", Expr::one(), Some(eta))],
                    "wave",
                )),
                (false, true) => (|| {
                    let a = target_slot(form, 3)?;
                    let m = exp_of(&-antiderivative(&a, v)?);
                    if !m.contains_var(u) {
                        return Some(GeneralSolution::new(
                            t.clone(),
                            Expr::zero(),
                            vec![slot("F", m, Some(xi.clone())), slot("G", Expr::one(), Some(eta.clone()))],
                            "first-order-in-xi",
                        ));
                    }
                    let im = antiderivative(&m, u)?;
                    Some(GeneralSolution::new(
                        t.clone(),
                        Expr::zero(),
                        vec![slot("K", im, None), slot("G", Expr::one(), Some(eta.clone()))],
                        "first-order-in-xi-constant",
                    ))
                })(),
                (true, false) => (|| {
                    let b = target_slot(form, 4)?;
                    let m = exp_of(&-antiderivative(&b, u)?);
                    if !m.contains_var(v) {
                        return Some(GeneralSolution::new(
                            t.clone(),
                            Expr::zero(),
                            vec![slot("F", Expr::one(), Some(xi.clone())), slot("G", m, Some(eta.clone()))],
                            "first-order-in-eta",
                        ));
                    }
                    let im = antiderivative(&m, v)?;
                    Some(GeneralSolution::new(
                        t.clone(),
                        Expr::zero(),
                        vec![slot("F", Expr::one(), Some(xi.clone())), slot("K", im, None)],
                        "first-order-in-eta-constant",
                    ))
                })(),
                (false, false) => None,
            }
        }
        Kind::Parabolic => {
            if !(zero[0] && zero[1] && zero[3] && zero[5]) {
                return Ok(None);
            }
            (|| {
                let h = if zero[4] { Expr::zero() } else { target_slot(form, 4)? };
                let m = if h.is_zero() { Expr::one() } else { exp_of(&antiderivative(&h, v)?) };
                let inv_m = (Expr::one() / &m).simplify();
                let i1 = antiderivative(&inv_m, v)?;
                let particular = if zero[6] {
                    Expr::zero()
                } else {
                    let r = target_slot(form, 6)?;
                    let inner = antiderivative(&(&m * r).simplify(), v)?;
                    antiderivative(&(&inv_m * inner).simplify(), v)?
                };
                Some(GeneralSolution::new(
                    t.clone(),
                    particular,
                    vec![slot("F", i1, Some(xi.clone())), slot("G", Expr::one(), Some(xi.clone()))],
                    "second-order-in-eta",
                ))
            })()
        }
        _ => None,
    };
    Ok(sol)
}

/// `xi -> phi`, `eta -> psi` throughout.
pub fn pull_back(sol: &GeneralSolution, map: &TransitionMap) -> GeneralSolution {
    let back = |e: &Expr| map.to_source(e).simplify();
    GeneralSolution {
        vars: map.source.clone(),
        particular: back(&sol.particular),
        slots: sol
            .slots
            .iter()
            .map(|s| FunctionSlot {
                name: s.name,
                multiplier: back(&s.multiplier),
                argument: s.argument.as_ref().map(back),
            })
            .collect(),
        rule: sol.rule,
    }
}

/// `F(y + L+ x) + G(y + L- x)` for constant-coefficient homogeneous
/// hyperbolic equations without lower-order terms; `G(x)` when `a = 0`.
pub fn dalembert<T: Scalar>(
    p: &Pde2,
    region: &SampleRegion<T>,
    cfg: &OracleConfig<T>,
) -> Result<GeneralSolution, SolveError> {
    if !p.has_constant_coefficients() {
        return Err(SolveError::Precondition("coefficients must be constant"));
    }
    if !(p.d.is_zero() && p.e.is_zero() && p.g.is_zero() && p.f.is_zero()) {
        return Err(SolveError::Precondition("lower-order terms and right-hand side must vanish"));
    }
    let lp = lambdas(p, region, cfg)?;
    if lp.kind != Kind::Hyperbolic {
        return Err(SolveError::Precondition("equation must be hyperbolic"));
    }
    let (x, y) = (p.vars.xe(), p.vars.ye());
    let wave = |l: &Expr| (&y + l * &x).simplify();
    let second = match &lp.minus {
        Some(l) if !lp.degenerate => wave(l),
        _ => x.clone(),
    };
    Ok(GeneralSolution::new(
        p.vars.clone(),
        Expr::zero(),
        vec![
            slot("F", Expr::one(), Some(wave(lp.plus.as_ref().expect("hyperbolic root")))),
            slot("G", Expr::one(), Some(second)),
        ],
        "dalembert",
    ))
}

/// Finite-difference path of a residual check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FdScheme {
    /// Second-order central stencils at `h = max(1e-4, eps^(1/4))`.
    Second,
    /// Sixth-order central stencils; per point, the step from a doubling
    /// ladder whose value agrees best with the value at half that step.
    SixthAdaptive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FdReport<T> {
    pub scheme: FdScheme,
    pub points: usize,
    /// Largest step used.
    pub h: T,
    pub max_residual: T,
    /// Largest residual over `1 + sum |term|` at its point.
    pub max_relative: T,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport<T> {
    pub max_residual: T,
    pub samples: usize,
    pub survivors: usize,
    pub instantiation: Option<String>,
    pub pass: bool,
    pub fd: FdReport<T>,
}

const FD_REL_TOL: f64 = 1e-6;

/// Central-difference weights for offsets `-k..=k`, first and second
/// derivative, before dividing by `h` and `h^2`.
const D1_2: [f64; 3] = [-0.5, 0.0, 0.5];
const D2_2: [f64; 3] = [1.0, -2.0, 1.0];
const D1_6: [f64; 7] = [-1.0 / 60.0, 9.0 / 60.0, -45.0 / 60.0, 0.0, 45.0 / 60.0, -9.0 / 60.0, 1.0 / 60.0];
const D2_6: [f64; 7] = [
    2.0 / 180.0,
    -27.0 / 180.0,
    270.0 / 180.0,
    -490.0 / 180.0,
    270.0 / 180.0,
    -27.0 / 180.0,
    2.0 / 180.0,
];

/// Residual and its scale at `pt` with the given stencils.
fn fd_residual<T: Scalar>(
    p: &Pde2,
    u: &Expr,
    region: &SampleRegion<T>,
    pt: (T, T),
    h: T,
    (d1, d2): (&[f64], &[f64]),
) -> Option<(T, T)> {
    let k = (d1.len() / 2) as i32;
    let at = |i: i32, j: i32| region.eval(u, (pt.0 + T::of(i as f64) * h, pt.1 + T::of(j as f64) * h)).ok();
    let coef = |e: &Expr| region.eval(e, pt).ok();
    let (mut ux, mut uy, mut uxx, mut uyy, mut uxy) = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    for i in -k..=k {
        let (w1, w2) = (T::of(d1[(i + k) as usize]), T::of(d2[(i + k) as usize]));
        let (sx, sy) = (at(i, 0)?, at(0, i)?);
        ux = ux + w1 * sx;
        uy = uy + w1 * sy;
        uxx = uxx + w2 * sx;
        uyy = uyy + w2 * sy;
        if w1 != T::zero() {
            for j in -k..=k {
                let wj = T::of(d1[(j + k) as usize]);
                if wj != T::zero() {
                    uxy = uxy + w1 * wj * at(i, j)?;
                }
            }
        }
    }
    let hh = h * h;
    let two = T::of(2.0);
    let terms = [
        coef(&p.a)? * uxx / hh,
        two * coef(&p.b)? * uxy / hh,
        coef(&p.c)? * uyy / hh,
        coef(&p.d)? * ux / h,
        coef(&p.e)? * uy / h,
        coef(&p.g)? * at(0, 0)?,
        -coef(&p.f)?,
    ];
    let r = terms.iter().fold(T::zero(), |s, &t| s + t);
    let scale = terms.iter().fold(T::one(), |s, &t| s + t.abs());
    Some((r, scale))
}

fn base_step<T: Scalar>() -> T {
    T::of(1e-4).max(T::epsilon().powf(T::of(0.25)))
}

/// Residual at one point and the step it came from.
fn fd_point<T: Scalar>(p: &Pde2, u: &Expr, region: &SampleRegion<T>, pt: (T, T), scheme: FdScheme) -> Option<(T, T, T)> {
    match scheme {
        FdScheme::Second => {
            let h = base_step::<T>();
            fd_residual(p, u, region, pt, h, (&D1_2, &D2_2)).map(|(r, s)| (r, s, h))
        }
        FdScheme::SixthAdaptive => {
            let width = (region.x.1 - region.x.0).min(region.y.1 - region.y.0);
            let cap = width / T::of(60.0);
            // ladder starts at 1e-4 in f64; selection is sensitive to the start
            let mut h = T::of(1e-4).max(T::epsilon().powf(T::of(0.25)) * T::of(0.5)).min(cap);
            let mut prev: Option<(T, T, T)> = None;
            let mut best: Option<(T, (T, T, T))> = None;
            for _ in 0..6 {
                let cur = fd_residual(p, u, region, pt, h, (&D1_6, &D2_6)).map(|(r, s)| (r, s, h));
                if let (Some(a), Some(b)) = (prev, cur) {
                    let gap = (b.0 - a.0).abs();
                    if best.is_none_or(|(g, _)| gap < g) {
                        best = Some((gap, a));
                    }
                }
                prev = cur;
                h = h * T::of(2.0);
                if h > cap {
                    break;
                }
            }
            best.map(|(_, v)| v).or(prev)
        }
    }
}

/// [`residual_with`] checking three points by second-order differences.
pub fn residual<T: Scalar>(
    p: &Pde2,
    u: &Expr,
    region: &SampleRegion<T>,
    cfg: &OracleConfig<T>,
) -> Result<ResidualReport<T>, OracleError> {
    residual_with(p, u, region, cfg, 3, FdScheme::Second)
}

/// `operator(u) - f` at the oracle samples by symbolic differentiation,
/// and at `fd_points` of them by finite differences. Samples where `u`
/// faults are dropped; fewer than half surviving fails the report.
pub fn residual_with<T: Scalar>(
    p: &Pde2,
    u: &Expr,
    region: &SampleRegion<T>,
    cfg: &OracleConfig<T>,
    fd_points: usize,
    scheme: FdScheme,
) -> Result<ResidualReport<T>, OracleError> {
    let res = p.operator(u) - &p.f;
    let pts = region.sample(cfg, &[])?;
    let names = region.vars.names();
    let mut max_residual = T::zero();
    let mut pass = true;
    let mut ok_pts = Vec::new();
    for &pt in &pts {
        if let Ok((v, scale)) = res.eval_scaled(&[(names[0], pt.0), (names[1], pt.1)]) {
            max_residual = max_residual.max(v.abs());
            pass &= v.abs() <= cfg.tol(scale);
            ok_pts.push(pt);
        }
    }
    let survivors = ok_pts.len();
    pass &= 2 * survivors >= pts.len();
    let mut fd = FdReport {
        scheme,
        points: 0,
        h: T::zero(),
        max_residual: T::zero(),
        max_relative: T::zero(),
        pass: true,
    };
    for &pt in ok_pts.iter().take(fd_points) {
        if let Some((r, scale, h)) = fd_point(p, u, region, pt, scheme) {
            fd.points += 1;
            fd.h = fd.h.max(h);
            fd.max_residual = fd.max_residual.max(r.abs());
            fd.max_relative = fd.max_relative.max(r.abs() / scale);
        }
    }
    fd.pass = fd.points > 0 && fd.max_relative <= T::of(FD_REL_TOL);
    Ok(ResidualReport {
        max_residual,
        samples: pts.len(),
        survivors,
        instantiation: None,
        pass,
        fd,
    })
}

/// Residual reports of the template instantiated with each probe pair,
/// finite differences by [`FdScheme::SixthAdaptive`].
pub fn certify<T: Scalar>(
    p: &Pde2,
    sol: &GeneralSolution,
    probes: &[Probe],
    region: &SampleRegion<T>,
    cfg: &OracleConfig<T>,
    fd_points: usize,
) -> Result<Vec<ResidualReport<T>>, OracleError> {
    probes
        .iter()
        .map(|&pr| {
            let mut r = residual_with(p, &sol.instantiate(pr), region, cfg, fd_points, FdScheme::SixthAdaptive)?;
            r.instantiation = Some(pr.name().to_string());
            Ok(r)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::{build_map, reduce_compact};
    use crate::expr::parse_expr;
    use crate::factor::factor_principal;

    fn cfg() -> OracleConfig<f64> {
        OracleConfig::default()
    }

    fn solve(
        text: &str,
        vars: VarPair,
        b: [f64; 4],
        phi: &str,
        psi: &str,
        inv: Option<(&str, &str)>,
        rendering: Option<&str>,
    ) -> (Pde2, GeneralSolution, SampleRegion<f64>) {
        let p = Pde2::parse(text, &vars).unwrap();
        let r = SampleRegion::new(vars.clone(), (b[0], b[1]), (b[2], b[3])).unwrap();
        let pair = factor_principal(&p, &r, &cfg()).unwrap();
        let t = VarPair::target();
        let e = |s| parse_expr(s, &vars).unwrap();
        let inverse = inv.map(|(a, b)| (parse_expr(a, &t).unwrap(), parse_expr(b, &t).unwrap()));
        let map = build_map(&p, &pair, &e(phi), Some(&e(psi)), inverse, &r, &cfg()).unwrap();
        let mut form = reduce_compact(&p, &pair, &map, &r, &cfg()).unwrap();
        if let Some(t) = rendering {
            assert!(form.adopt_rendering(&map, t, &r, &cfg()).unwrap());
        }
        let sol = solve_canonical(&form, &r, &cfg()).unwrap().expect("catalog hit");
        (p, pull_back(&sol, &map), r)
    }

    fn certified(p: &Pde2, sol: &GeneralSolution, r: &SampleRegion<f64>) {
        for rep in certify(p, sol, &Probe::ALL, r, &cfg(), 3).unwrap() {
            assert!(rep.pass && rep.fd.pass, "{} {:?}", sol, rep);
        }
    }

    #[test]
    fn es1_exponential_multiplier() {
        let (p, sol, r) = solve("u_xy + 2*x*u_yy = u_y", VarPair::default(), [0.5, 1.5, 0.5, 1.5], "y - x^2", "x", None, None);
        assert_eq!(sol.text(), "exp(x)*F(y - x^2) + G(x)");
        certified(&p, &sol, &r);
    }

    #[test]
    fn par_es2_double_antiderivative() {
        let (p, sol, r) = solve(
            "y^2*u_xx - 2*y*u_xy + u_yy = u_x + 6*y",
            VarPair::default(),
            [0.5, 1.5, 0.5, 1.5],
            "x + y^2/2",
            "y",
            Some(("xi - eta^2/2", "eta")),
            None,
        );
        assert_eq!(sol.particular, parse_expr("y^3", &VarPair::default()).unwrap().simplify());
        certified(&p, &sol, &r);
    }

    #[test]
    fn final_example_constant_branch() {
        let (p, sol, r) = solve(
            "x*u_xx + (x-y)*u_xy - y*u_yy = 0",
            VarPair::default(),
            [1.0, 2.0, 1.0, 2.0],
            "x*y",
            "x - y",
            Some(("(eta + (eta^2 + 4*xi)^(1/2))/2", "((eta^2 + 4*xi)^(1/2) - eta)/2")),
            Some("(eta^2 + 4*xi)*U_xieta + eta*U_xi = 0"),
        );
        assert_eq!(sol.slots[0].argument, None);
        certified(&p, &sol, &r);
    }

    #[test]
    fn es5_is_not_in_catalog() {
        let v = VarPair::new("t", "x");
        let p = Pde2::parse("u_tt + 4*t*u_tx + 3*t^2*u_xx = 0", &v).unwrap();
        let r = SampleRegion::new(v.clone(), (0.5, 1.5), (-1.0, 1.0)).unwrap();
        let pair = factor_principal(&p, &r, &cfg()).unwrap();
        let e = |s| parse_expr(s, &v).unwrap();
        let map = build_map(&p, &pair, &e("x - t^2/2"), Some(&e("x - 3*t^2/2")), None, &r, &cfg()).unwrap();
        let form = reduce_compact(&p, &pair, &map, &r, &cfg()).unwrap();
        assert_eq!(solve_canonical(&form, &r, &cfg()).unwrap(), None);
    }

    #[test]
    fn dalembert_templates() {
        let v = VarPair::default();
        let r = SampleRegion::new(v.clone(), (-1.0, 1.0), (-1.0, 1.0)).unwrap();
        let p = Pde2::parse("u_xx + 3*u_xy + 2*u_yy = 0", &v).unwrap();
        let sol = dalembert(&p, &r, &cfg()).unwrap();
        assert_eq!(sol.text(), "F(y - x) + G(y - 2*x)");
        certified(&p, &sol, &r);
        let tv = VarPair::new("t", "x");
        let w = Pde2::parse("u_tt - 4*u_xx = 0", &tv).unwrap();
        let rt = SampleRegion::new(tv, (-1.0, 1.0), (-1.0, 1.0)).unwrap();
        assert_eq!(dalembert(&w, &rt, &cfg()).unwrap().text(), "F(2*t + x) + G(x - 2*t)");
        let bad = Pde2::parse("u_xx - u_yy + u_x = 0", &v).unwrap();
        assert!(matches!(dalembert(&bad, &r, &cfg()), Err(SolveError::Precondition(_))));
    }

    #[test]
    fn wrong_candidate_fails() {
        let v = VarPair::default();
        let r = SampleRegion::new(v.clone(), (-1.0, 1.0), (-1.0, 1.0)).unwrap();
        let p = Pde2::parse("u_xx = 0", &v).unwrap();
        let rep = residual(&p, &parse_expr("x^2", &v).unwrap(), &r, &cfg()).unwrap();
        assert!(!rep.pass && !rep.fd.pass);
        assert!((rep.max_residual - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sixth_order_beats_second_on_a_curved_solution() {
        let v = VarPair::default();
        let r = SampleRegion::new(v.clone(), (0.5, 1.5), (0.5, 1.5)).unwrap();
        let p = Pde2::parse("u_xy = 0", &v).unwrap();
        let u = parse_expr("exp(3*x) + sin(5*y)^2", &v).unwrap();
        let lo = residual_with(&p, &u, &r, &cfg(), 16, FdScheme::Second).unwrap();
        let hi = residual_with(&p, &u, &r, &cfg(), 16, FdScheme::SixthAdaptive).unwrap();
        assert_eq!((lo.fd.points, hi.fd.points), (16, 16));
        assert!(hi.fd.max_residual < 1e-6, "{:?}", hi.fd);
        assert!(hi.fd.h >= lo.fd.h);
    }

    #[test]
    fn exp_of_logs() {
        let t = VarPair::target();
        let e = parse_expr("-ln(eta)/2", &t).unwrap();
        assert_eq!(exp_of(&e), parse_expr("eta^(-1/2)", &t).unwrap().simplify());
    }
}
