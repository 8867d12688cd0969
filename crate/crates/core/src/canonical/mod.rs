//! Canonical forms `U_xieta = F` / `U_etaeta = F` by several independent
//! routes, inverse-map condition reports, and cross-validation.

mod conditions;
mod map;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use num_traits::Zero;

use crate::expr::{nonvanishing, Expr, Node, OracleConfig, OracleError, Rational, SampleRegion, VarPair};
use crate::factor::{FactorError, FactorPair};
use crate::pde::{vanishes, Axis, Kind, Pde2, PdeError};
use crate::scalar::Scalar;

pub use conditions::{inverse_condition_report, ConditionWitness, InverseConditionReport};
pub use map::{build_map, MapError, TransitionMap};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum CanonicalError {
    #[error("{0}")]
    Oracle(#[from] OracleError),
    #[error("{0}")]
    Map(#[from] MapError),
    #[error("{0}")]
    Factor(#[from] FactorError),
    #[error("{0}")]
    Pde(#[from] PdeError),
    #[error("the inverse-map method needs an inverse")]
    MissingInverse,
    #[error("{0} equations have no canonical form here")]
    Unsupported(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Factor formulas with first-order terms from the residues.
    Compact,
    /// Factor formulas with first-order terms `L[phi]`, `L[psi]`.
    CompactInvariant,
    ChainRule,
    InverseMap,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Compact => "compact",
            Method::CompactInvariant => "compact-invariant",
            Method::ChainRule => "chain",
            Method::InverseMap => "inverse",
        }
    }
}

/// Coefficients of `U_xixi, U_xieta, U_etaeta, U_xi, U_eta, U`; the
/// equation is their weighted sum `= rhs`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Coefficients {
    #[serde(serialize_with = "crate::ser::expr")]
    pub uxixi: Expr,
    #[serde(serialize_with = "crate::ser::expr")]
    pub uxieta: Expr,
    #[serde(serialize_with = "crate::ser::expr")]
    pub uetaeta: Expr,
    #[serde(serialize_with = "crate::ser::expr")]
    pub uxi: Expr,
    #[serde(serialize_with = "crate::ser::expr")]
    pub ueta: Expr,
    #[serde(serialize_with = "crate::ser::expr")]
    pub u: Expr,
    #[serde(serialize_with = "crate::ser::expr")]
    pub rhs: Expr,
}

pub const SLOT_NAMES: [&str; 7] = ["uxixi", "uxieta", "uetaeta", "uxi", "ueta", "u", "rhs"];

impl Coefficients {
    pub fn slots(&self) -> [&Expr; 7] {
        [&self.uxixi, &self.uxieta, &self.uetaeta, &self.uxi, &self.ueta, &self.u, &self.rhs]
    }

    pub fn slots_mut(&mut self) -> [&mut Expr; 7] {
        [
            &mut self.uxixi,
            &mut self.uxieta,
            &mut self.uetaeta,
            &mut self.uxi,
            &mut self.ueta,
            &mut self.u,
            &mut self.rhs,
        ]
    }

    pub fn map(&self, mut f: impl FnMut(&Expr) -> Expr) -> Coefficients {
        let [a, b, c, d, e, g, r] = self.slots();
        Coefficients {
            uxixi: f(a),
            uxieta: f(b),
            uetaeta: f(c),
            uxi: f(d),
            ueta: f(e),
            u: f(g),
            rhs: f(r),
        }
    }

    /// Slot the equation is normalized by.
    pub fn lead(&self, kind: Kind) -> &Expr {
        match kind {
            Kind::Parabolic => &self.uetaeta,
            _ => &self.uxieta,
        }
    }

    /// Coefficients of a PDE written in target variables.
    pub fn from_pde(p: &Pde2) -> Coefficients {
        Coefficients {
            uxixi: p.a.clone(),
            uxieta: (Expr::int(2) * &p.b).simplify(),
            uetaeta: p.c.clone(),
            uxi: p.d.clone(),
            ueta: p.e.clone(),
            u: p.g.clone(),
            rhs: p.f.clone(),
        }
    }

    /// Equation text over `vars` with unknown `U`.
    pub fn equation(&self, vars: &VarPair) -> String {
        let [x, y] = vars.names();
        let labels = [
            format!("U_{x}{x}"),
            format!("U_{x}{y}"),
            format!("U_{y}{y}"),
            format!("U_{x}"),
            format!("U_{y}"),
            "U".to_string(),
        ];
        let mut out = String::new();
        for (k, label) in self.slots().iter().zip(&labels) {
            if k.is_zero() {
                continue;
            }
            let (neg, text) = match k.kind() {
                Node::Neg(inner) => (true, inner.pretty()),
                _ => match k.as_const() {
                    Some(r) if r < Rational::zero() => (true, Expr::rational(-r).pretty()),
                    _ => (false, k.pretty()),
                },
            };
            let factor = if text == "1" {
                label.clone()
            } else if text.contains(' ') || text.contains('/') {
                format!("({text})*{label}")
            } else {
                format!("{text}*{label}")
            };
            match (out.is_empty(), neg) {
                (true, true) => out.push_str(&format!("-{factor}")),
                (true, false) => out.push_str(&factor),
                (false, true) => out.push_str(&format!(" - {factor}")),
                (false, false) => out.push_str(&format!(" + {factor}")),
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        format!("{out} = {}", self.rhs.pretty())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CanonicalForm {
    pub method: Method,
    pub kind: Kind,
    /// Source coordinates.
    pub coefficients: Coefficients,
    /// Target coordinates, when the map has an inverse.
    pub mapped: Option<Coefficients>,
    #[serde(serialize_with = "crate::ser::opt_expr")]
    pub normalized_by: Option<Expr>,
    pub warning: Option<String>,
}

impl CanonicalForm {
    pub fn lead(&self) -> &Expr {
        self.coefficients.lead(self.kind)
    }

    /// Equation text in target variables, when the mapped rendering exists.
    pub fn text(&self) -> Option<String> {
        self.mapped.as_ref().map(|c| c.equation(&VarPair::target()))
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.text() {
            Some(t) => write!(f, "{t}"),
            None => write!(f, "{} [source coordinates]", self.coefficients.equation(&VarPair::target())),
        }
    }
}

/// Principal-part contributions `[U_xixi, U_xieta, U_etaeta, U_xi, U_eta]`.
type Principal = [Expr; 5];

/// Adds the first-order and zeroth-order terms, which every method
/// transforms the same way, then normalizes.
fn assemble<T: Scalar>(
    p: &Pde2,
    map: &TransitionMap,
    kind: Kind,
    method: Method,
    principal: Principal,
    region: &SampleRegion<T>,
    cfg: &OracleConfig<T>,
) -> Result<CanonicalForm, CanonicalError> {
    let [[phx, phy], [psx, psy]] = map.forward_jacobian();
    let [k11, k12, k22, k1, k2] = principal;
    let raw = Coefficients {
        uxixi: k11,
        uxieta: k12,
        uetaeta: k22,
        uxi: k1 + &p.d * phx + &p.e * phy,
        ueta: k2 + &p.d * psx + &p.e * psy,
        u: p.g.clone(),
        rhs: p.f.clone(),
    }
    .map(Expr::simplify);
    let lead = raw.lead(kind).clone();
    let (coefficients, normalized_by, warning) = if nonvanishing(&lead, region, cfg)? {
        (raw.map(|e| (e / &lead).simplify()), Some(lead), None)
    } else {
        let w = format!("leading coefficient {} vanishes somewhere on the region; left unnormalized", lead.pretty());
        (raw, None, Some(w))
    };
    let mapped = map
        .inverse
        .as_ref()
        .map(|_| coefficients.map(|e| map.to_target(e).expect("inverse").simplify()));
    Ok(CanonicalForm {
        method,
        kind,
        coefficients,
        mapped,
        normalized_by,
        warning,
    })
}

fn check_invariance<T: Scalar>(
    pair: &FactorPair,
    map: &TransitionMap,
    region: &SampleRegion<T>,
    cfg: &OracleConfig<T>,
) -> Result<(), CanonicalError> {
    if !vanishes(&pair.plus.apply(&map.phi), region, cfg)? {
        return Err(MapError::NotInvariant("phi").into());
    }
    if pair.kind == Kind::Hyperbolic && !vanishes(&pair.minus.apply(&map.psi), region, cfg)? {
        return Err(MapError::NotInvariant("psi").into());
    }
    Ok(())
}

fn dot(r: &(Expr, Expr), e: &Expr, vars: &VarPair) -> Expr {
    let [x, y] = vars.names();
    &r.0 * e.diff(x) + &r.1 * e.diff(y)
}

fn reduce_factored<T: Scalar>(
    p: &Pde2,
    pair: &FactorPair,
    map: &TransitionMap,
    method: Method,
    region: &SampleRegion<T>,
    cfg: &OracleConfig<T>,
) -> Result<CanonicalForm, CanonicalError> {
    check_invariance(pair, map, region, cfg)?;
    let lead = &pair.lead;
    let vars = &p.vars;
    let (phi, psi) = (&map.phi, &map.psi);
    let z = Expr::zero;
    let principal = match pair.kind {
        Kind::Hyperbolic => {
            let k12 = lead * pair.minus.apply(phi) * pair.plus.apply(psi);
            let (k1, k2) = match method {
                Method::Compact => (
                    -(lead * dot(&pair.rho_minus(), phi, vars)),
                    -(lead * dot(&pair.rho_plus(), psi, vars)),
                ),
                _ => (p.principal(phi), p.principal(psi)),
            };
            [z(), k12, z(), k1, k2]
        }
        Kind::Parabolic => {
            let l = &pair.plus;
            let lpsi = l.apply(psi);
            let k22 = lead * lpsi.powi(2);
            let rho = pair.rho_minus();
            let (k1, k2) = match method {
                Method::Compact => (
                    -(lead * dot(&rho, phi, vars)),
                    lead * (l.apply(&lpsi) - dot(&rho, psi, vars)),
                ),
                _ => (p.principal(phi), p.principal(psi)),
            };
            [z(), z(), k22, k1, k2]
        }
        Kind::Elliptic => return Err(CanonicalError::Unsupported("elliptic")),
        Kind::Mixed => return Err(CanonicalError::Unsupported("mixed-type")),
    };
    assemble(p, map, pair.kind, method, principal, region, cfg)
}

/// Factor formulas, first-order terms from the residues `rho -+ . grad`.
pub fn reduce_compact<T: Scalar>(
    p: &Pde2,
    pair: &FactorPair,
    map: &TransitionMap,
    region: &SampleRegion<T>,
    cfg: &OracleConfig<T>,
) -> Result<CanonicalForm, CanonicalError> {
    reduce_factored(p, pair, map, Method::Compact, region, cfg)
}

/// Factor formulas, first-order terms from `L[phi]`, `L[psi]` with `L` the
/// principal part.
pub fn reduce_compact_invariant<T: Scalar>(
    p: &Pde2,
    pair: &FactorPair,
    map: &TransitionMap,
    region: &SampleRegion<T>,
    cfg: &OracleConfig<T>,
) -> Result<CanonicalForm, CanonicalError> {
    reduce_factored(p, pair, map, Method::CompactInvariant, region, cfg)
}

/// Plain chain rule; any valid map. `kind` picks the normalizing slot.
pub fn reduce_chain_rule<T: Scalar>(
    p: &Pde2,
    map: &TransitionMap,
    kind: Kind,
    region: &SampleRegion<T>,
    cfg: &OracleConfig<T>,
) -> Result<CanonicalForm, CanonicalError> {
    let [[phx, phy], [psx, psy]] = map.forward_jacobian();
    let (a, b, c) = (&p.a, &p.b, &p.c);
    let two = || Expr::int(2);
    let quad = |ux: &Expr, uy: &Expr, vx: &Expr, vy: &Expr| {
        a * ux * vx + b * (ux * vy + uy * vx) + c * uy * vy
    };
    let principal = [
        quad(&phx, &phy, &phx, &phy),
        two() * quad(&phx, &phy, &psx, &psy),
        quad(&psx, &psy, &psx, &psy),
        p.principal(&map.phi),
        p.principal(&map.psi),
    ];
    assemble(p, map, kind, Method::ChainRule, principal, region, cfg)
}

/// Principal part built in target coordinates from partials of the
/// inverse `(P, Q)`, then read back in source coordinates.
pub fn reduce_inverse_map<T: Scalar>(
    p: &Pde2,
    pair: &FactorPair,
    map: &TransitionMap,
    region: &SampleRegion<T>,
    cfg: &OracleConfig<T>,
) -> Result<CanonicalForm, CanonicalError> {
    let [[pu, pv], [qu, qv]] = map.inverse_jacobian().ok_or(CanonicalError::MissingInverse)?;
    check_invariance(pair, map, region, cfg)?;
    let [u, v] = map.target.names();
    let jd = map.inverse_determinant().expect("inverse");
    let tt = |e: &Expr| map.to_target(e).expect("inverse").simplify();
    let d = |e: &Expr, w: &str| e.diff(w).simplify();
    // forward partials through the inverse relations
    let phx = &qv / &jd;
    let phy = -(&pv / &jd);
    let psx = -(&qu / &jd);
    let psy = &pu / &jd;
    let lead = tt(&pair.lead);
    let z = Expr::zero;
    let principal: Principal = match pair.kind {
        Kind::Hyperbolic if pair.degenerate => {
            let (am, bm) = (tt(&pair.minus.alpha), tt(&pair.minus.beta));
            let (ap, bp) = (tt(&pair.plus.alpha), tt(&pair.plus.beta));
            let lm_phi = (am * &phx + bm * &phy).simplify();
            let lp_psi = (ap.clone() * &psx + bp.clone() * &psy).simplify();
            let rx = &lm_phi * d(&ap, u);
            let ry = &lm_phi * d(&bp, u);
            [
                z(),
                &lead * &lm_phi * &lp_psi,
                z(),
                -(&lead * (&rx * &phx + &ry * &phy)),
                &lead * (&lm_phi * d(&lp_psi, u) - &rx * &psx - &ry * &psy),
            ]
        }
        Kind::Hyperbolic => {
            let lam_plus = -(&qv / &pv);
            let r_minus = d(&lam_plus, u) / &pu;
            let puv = d(&pu, v);
            [
                z(),
                &lead / (&pu * &pv),
                z(),
                &lead * &r_minus * &phy,
                &lead * (-(puv / (&pu * pv.powi(2))) + &r_minus * &psy),
            ]
        }
        Kind::Parabolic => {
            let (s, t, cross) = match pair.axis() {
                Axis::X => (&pv, &qv, &phy),
                Axis::Y => (&qv, &pv, &phx),
            };
            let cross_psi = match pair.axis() {
                Axis::X => &psy,
                Axis::Y => &psx,
            };
            let lam = -(t / s);
            let l_lam = d(&lam, v) / s;
            let svv = d(s, v);
            [
                z(),
                z(),
                &lead / s.powi(2),
                &lead * &l_lam * cross,
                &lead * (-(svv / s.powi(3)) + &l_lam * cross_psi),
            ]
        }
        Kind::Elliptic => return Err(CanonicalError::Unsupported("elliptic")),
        Kind::Mixed => return Err(CanonicalError::Unsupported("mixed-type")),
    };
    let principal = principal.map(|e| map.to_source(&e));
    assemble(p, map, pair.kind, Method::InverseMap, principal, region, cfg)
}

/// Compact, compact-invariant and chain rule, plus the inverse-map method
/// when the map carries an inverse.
pub fn reduce_all<T: Scalar>(
    p: &Pde2,
    pair: &FactorPair,
    map: &TransitionMap,
    region: &SampleRegion<T>,
    cfg: &OracleConfig<T>,
) -> Result<Vec<CanonicalForm>, CanonicalError> {
    let mut out = vec![
        reduce_compact(p, pair, map, region, cfg)?,
        reduce_compact_invariant(p, pair, map, region, cfg)?,
        reduce_chain_rule(p, map, pair.kind, region, cfg)?,
    ];
    if map.inverse.is_some() {
        out.push(reduce_inverse_map(p, pair, map, region, cfg)?);
    }
    Ok(out)
}

/// Slot-by-slot oracle agreement of every form with the first, in source
/// coordinates.
pub fn cross_validate<T: Scalar>(
    forms: &[CanonicalForm],
    region: &SampleRegion<T>,
    cfg: &OracleConfig<T>,
) -> Result<bool, OracleError> {
    let Some(first) = forms.first() else {
        return Ok(true);
    };
    for f in &forms[1..] {
        if f.normalized_by.is_some() != first.normalized_by.is_some() {
            return Ok(false);
        }
        for (a, b) in f.coefficients.slots().iter().zip(first.coefficients.slots()) {
            if !vanishes(&(*a - b), region, cfg)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Compares a form with an equation in `xi`, `eta` and unknown `U`, both
/// taken up to an overall factor.
pub fn matches_equation<T: Scalar>(
    form: &CanonicalForm,
    map: &TransitionMap,
    text: &str,
    region: &SampleRegion<T>,
    cfg: &OracleConfig<T>,
) -> Result<bool, CanonicalError> {
    let want = Coefficients::from_pde(&Pde2::parse_with(text, &map.target, "U")?).map(|e| map.to_source(e));
    let wl = want.lead(form.kind);
    let fl = form.lead();
    for (w, f) in want.slots().iter().zip(form.coefficients.slots()) {
        if !vanishes(&(*w * fl - f * wl), region, cfg)? {
            return Ok(false);
        }
    }
    Ok(true)
}

impl CanonicalForm {
    /// Replaces the target rendering with `text` (normalized) when it agrees
    /// slot by slot with this form. Returns whether it was adopted.
    pub fn adopt_rendering<T: Scalar>(
        &mut self,
        map: &TransitionMap,
        text: &str,
        region: &SampleRegion<T>,
        cfg: &OracleConfig<T>,
    ) -> Result<bool, CanonicalError> {
        if self.normalized_by.is_none() {
            return Ok(false);
        }
        let raw = Coefficients::from_pde(&Pde2::parse_with(text, &map.target, "U")?);
        let lead = raw.lead(self.kind).clone();
        if lead.is_zero() {
            return Ok(false);
        }
        let want = raw.map(|e| (e / &lead).simplify());
        for (w, f) in want.slots().iter().zip(self.coefficients.slots()) {
            if !vanishes(&(map.to_source(w) - f), region, cfg)? {
                return Ok(false);
            }
        }
        self.mapped = Some(want);
        Ok(true)
    }
}
