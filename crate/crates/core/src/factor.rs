//! First-order operators `alpha d_x + beta d_y`, the factorization of the
//! principal part, residues and commutators.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::expr::{Expr, OracleConfig, OracleError, SampleRegion, VarPair};
use crate::pde::{lambdas, vanishes, Axis, Kind, Pde2, PdeError};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum FactorError {
    #[error("{0}")]
    Pde(#[from] PdeError),
    #[error("{0}")]
    Oracle(#[from] OracleError),
    #[error("pair is not monic; residues come from the general composition")]
    NonMonic,
    #[error("map precondition failed: {0}")]
    Invariance(String),
}

/// Monic slope: the operator is `d_x - lambda d_y` on axis `X`, or
/// `d_y - lambda d_x` on axis `Y`.
#[derive(Clone, Debug, PartialEq)]
pub struct Slope {
    pub axis: Axis,
    pub lambda: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FirstOrderOp {
    pub vars: VarPair,
    pub alpha: Expr,
    pub beta: Expr,
    pub slope: Option<Slope>,
}

impl FirstOrderOp {
    pub fn new(vars: VarPair, alpha: Expr, beta: Expr) -> FirstOrderOp {
        FirstOrderOp {
            vars,
            alpha: alpha.simplify(),
            beta: beta.simplify(),
            slope: None,
        }
    }

    /// `d_x - lambda d_y`.
    pub fn monic(vars: VarPair, lambda: Expr) -> FirstOrderOp {
        let lambda = lambda.simplify();
        FirstOrderOp {
            vars,
            alpha: Expr::one(),
            beta: (-&lambda).simplify(),
            slope: Some(Slope { axis: Axis::X, lambda }),
        }
    }

    /// `d_y - lambda d_x`.
    pub fn monic_y(vars: VarPair, lambda: Expr) -> FirstOrderOp {
        let lambda = lambda.simplify();
        FirstOrderOp {
            vars,
            alpha: (-&lambda).simplify(),
            beta: Expr::one(),
            slope: Some(Slope { axis: Axis::Y, lambda }),
        }
    }

    pub fn lambda(&self) -> Option<&Expr> {
        self.slope.as_ref().map(|s| &s.lambda)
    }

    pub fn apply(&self, e: &Expr) -> Expr {
        let [x, y] = self.vars.names();
        (&self.alpha * e.diff(x) + &self.beta * e.diff(y)).simplify()
    }

    /// Same operator over a renamed variable pair.
    pub fn renamed(&self, vars: VarPair) -> FirstOrderOp {
        let [ox, oy] = self.vars.names();
        let (nx, ny) = (vars.xe(), vars.ye());
        let b = [(ox, &nx), (oy, &ny)];
        FirstOrderOp {
            alpha: self.alpha.substitute(&b),
            beta: self.beta.substitute(&b),
            slope: self.slope.as_ref().map(|s| Slope {
                axis: s.axis,
                lambda: s.lambda.substitute(&b),
            }),
            vars,
        }
    }

    pub fn text(&self) -> String {
        let [x, y] = self.vars.names();
        let part = |k: &Expr, v: &str| {
            if k.is_zero() {
                None
            } else if k.is_one() {
                Some(format!("d_{v}"))
            } else {
                let t = k.pretty();
                let bare = !(t.starts_with('-') || t.contains(' ') || t.contains('/'));
                Some(if bare { format!("{t}*d_{v}") } else { format!("({t})*d_{v}") })
            }
        };
        let parts: Vec<String> = [part(&self.alpha, x), part(&self.beta, y)].into_iter().flatten().collect();
        parts.join(" + ")
    }
}

impl fmt::Display for FirstOrderOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text())
    }
}

/// `principal = lead * (minus o plus - rho . grad)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorPair {
    pub kind: Kind,
    pub plus: FirstOrderOp,
    pub minus: FirstOrderOp,
    pub lead: Expr,
    pub degenerate: bool,
}

impl FactorPair {
    pub fn vars(&self) -> &VarPair {
        &self.plus.vars
    }

    pub fn axis(&self) -> Axis {
        self.plus.slope.as_ref().map_or(Axis::X, |s| s.axis)
    }

    pub fn is_monic(&self) -> bool {
        self.plus.slope.is_some() && self.minus.slope.is_some()
    }

    /// `(L-[alpha+], L-[beta+])`: the first-order leftover of `L- o L+`.
    pub fn rho_minus(&self) -> (Expr, Expr) {
        (self.minus.apply(&self.plus.alpha), self.minus.apply(&self.plus.beta))
    }

    /// `(L+[alpha-], L+[beta-])`.
    pub fn rho_plus(&self) -> (Expr, Expr) {
        (self.plus.apply(&self.minus.alpha), self.plus.apply(&self.minus.beta))
    }

    /// Principal part rebuilt from the factors, applied to `u`.
    pub fn principal(&self, u: &Expr) -> Expr {
        let [x, y] = self.vars().names();
        let (rx, ry) = self.rho_minus();
        let comp = self.minus.apply(&self.plus.apply(u));
        (&self.lead * (comp - rx * u.diff(x) - ry * u.diff(y))).simplify()
    }

    /// Residue along the non-unit axis: `-rho_y` for `X` pairs, `-rho_x` for `Y` pairs.
    fn scalar_residue(&self, rho: (Expr, Expr)) -> Expr {
        match self.axis() {
            Axis::X => (-rho.1).simplify(),
            Axis::Y => (-rho.0).simplify(),
        }
    }
}

pub fn factor_principal<T: Scalar>(
    p: &Pde2,
    region: &SampleRegion<T>,
    cfg: &OracleConfig<T>,
) -> Result<FactorPair, FactorError> {
    let lp = lambdas(p, region, cfg)?;
    let vars = p.vars.clone();
    let pair = if lp.degenerate {
        let plus = FirstOrderOp::monic(vars.clone(), lp.plus.clone().expect("degenerate slope"));
        let minus = FirstOrderOp::new(vars, Expr::zero(), Expr::one());
        FactorPair {
            kind: lp.kind,
            plus,
            minus,
            lead: (Expr::int(2) * &p.b).simplify(),
            degenerate: true,
        }
    } else {
        let mk = |l: &Option<Expr>| {
            let l = l.clone().expect("root");
            match lp.axis {
                Axis::X => FirstOrderOp::monic(vars.clone(), l),
                Axis::Y => FirstOrderOp::monic_y(vars.clone(), l),
            }
        };
        let lead = match lp.axis {
            Axis::X => p.a.clone(),
            Axis::Y => p.c.clone(),
        };
        FactorPair {
            kind: lp.kind,
            plus: mk(&lp.plus),
            minus: mk(&lp.minus),
            lead,
            degenerate: false,
        }
    };
    Ok(pair)
}

/// `(L-[lambda+], L+[lambda-])` for a monic pair.
pub fn residue_terms(pair: &FactorPair) -> Result<(Expr, Expr), FactorError> {
    if !pair.is_monic() {
        return Err(FactorError::NonMonic);
    }
    Ok((pair.scalar_residue(pair.rho_minus()), pair.scalar_residue(pair.rho_plus())))
}

/// `L[lambda]` for the single parabolic factor.
pub fn parabolic_lambda_residue(op: &FirstOrderOp) -> Option<Expr> {
    op.lambda().map(|l| op.apply(l))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommutatorReport {
    #[serde(serialize_with = "crate::ser::expr")]
    pub r_minus: Expr,
    #[serde(serialize_with = "crate::ser::expr")]
    pub r_plus: Expr,
    pub commutes: bool,
    pub residue_free_minus: bool,
    pub residue_free_plus: bool,
    /// Agreement of the map-form twins; absent without a map.
    pub map_form_consistent: Option<bool>,
}

/// Forward map pieces the commutator report needs: `phi` annihilated by
/// `L+`, `psi` by `L-`.
pub struct MapForms<'a> {
    pub phi: &'a Expr,
    pub psi: &'a Expr,
}

pub fn commutator_report<T: Scalar>(
    p: &Pde2,
    pair: &FactorPair,
    map: Option<MapForms<'_>>,
    region: &SampleRegion<T>,
    cfg: &OracleConfig<T>,
) -> Result<CommutatorReport, FactorError> {
    let rm = pair.rho_minus();
    let rp = pair.rho_plus();
    let r_minus = pair.scalar_residue(rm.clone());
    let r_plus = pair.scalar_residue(rp.clone());
    let commutes = vanishes(&(&rm.0 - &rp.0), region, cfg)? && vanishes(&(&rm.1 - &rp.1), region, cfg)?;
    let residue_free_minus = vanishes(&rm.0, region, cfg)? && vanishes(&rm.1, region, cfg)?;
    let residue_free_plus = vanishes(&rp.0, region, cfg)? && vanishes(&rp.1, region, cfg)?;
    let map_form_consistent = match map {
        None => None,
        Some(m) => Some(map_twins(p, pair, &m, (commutes, residue_free_minus, residue_free_plus), region, cfg)?),
    };
    Ok(CommutatorReport {
        r_minus,
        r_plus,
        commutes,
        residue_free_minus,
        residue_free_plus,
        map_form_consistent,
    })
}

/// Checks `phi_y L[psi] = psi_y L[phi]` against `commutes`, and
/// `L[phi] = 0`, `L[psi] = 0` against the single residues. A twin whose
/// multiplier vanishes somewhere says nothing and is skipped.
fn map_twins<T: Scalar>(
    p: &Pde2,
    pair: &FactorPair,
    m: &MapForms<'_>,
    verdicts: (bool, bool, bool),
    region: &SampleRegion<T>,
    cfg: &OracleConfig<T>,
) -> Result<bool, FactorError> {
    if !vanishes(&pair.plus.apply(m.phi), region, cfg)? {
        return Err(FactorError::Invariance("L+[phi] does not vanish".into()));
    }
    if !vanishes(&pair.minus.apply(m.psi), region, cfg)? {
        return Err(FactorError::Invariance("L-[psi] does not vanish".into()));
    }
    let [x, y] = p.vars.names();
    let v = match pair.axis() {
        Axis::X => y,
        Axis::Y => x,
    };
    let (phi_v, psi_v) = (m.phi.diff(v).simplify(), m.psi.diff(v).simplify());
    let l_phi = p.principal(m.phi).simplify();
    let l_psi = p.principal(m.psi).simplify();
    let nonzero = |e: &Expr| crate::expr::nonvanishing(e, region, cfg);
    let (commutes, free_minus, free_plus) = verdicts;
    let mut ok = true;
    if nonzero(&(&phi_v * &psi_v))? {
        let w = vanishes(&(&phi_v * &l_psi - &psi_v * &l_phi), region, cfg)?;
        ok &= w == commutes;
    }
    if nonzero(&phi_v)? {
        ok &= vanishes(&l_phi, region, cfg)? == free_minus;
    }
    if nonzero(&psi_v)? {
        ok &= vanishes(&l_psi, region, cfg)? == free_plus;
    }
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{equiv, parse_expr};

    fn setup(text: &str, vars: VarPair, x: (f64, f64), y: (f64, f64)) -> (Pde2, SampleRegion<f64>, OracleConfig<f64>) {
        let p = Pde2::parse(text, &vars).unwrap();
        (p, SampleRegion::new(vars, x, y).unwrap(), OracleConfig::default())
    }

    #[test]
    fn rotation_annihilates_radius() {
        let v = VarPair::default();
        let r = FirstOrderOp::new(v.clone(), parse_expr("-y", &v).unwrap(), Expr::var("x"));
        assert!(r.apply(&parse_expr("x^2 + y^2", &v).unwrap()).is_zero());
        assert!(r.apply(&Expr::int(7)).is_zero());
    }

    #[test]
    fn es5_pair_and_residues() {
        let (p, r, cfg) = setup("u_tt + 4*t*u_tx + 3*t^2*u_xx = 0", VarPair::new("t", "x"), (0.5, 1.5), (-1.0, 1.0));
        let pair = factor_principal(&p, &r, &cfg).unwrap();
        assert_eq!(pair.plus.text(), "d_t + t*d_x");
        assert_eq!(pair.minus.text(), "d_t + 3*t*d_x");
        let (rm, rp) = residue_terms(&pair).unwrap();
        assert_eq!((rm, rp), (Expr::int(-1), Expr::int(-3)));
        let rep = commutator_report(&p, &pair, None, &r, &cfg).unwrap();
        assert!(!rep.commutes);
    }

    #[test]
    fn degenerate_pair() {
        let (p, r, cfg) = setup("u_xy + 2*x*u_yy = u_y", VarPair::default(), (0.5, 1.5), (0.5, 1.5));
        let pair = factor_principal(&p, &r, &cfg).unwrap();
        assert!(pair.degenerate);
        assert_eq!(pair.minus.text(), "d_y");
        assert_eq!(pair.plus.text(), "d_x + 2*x*d_y");
        assert_eq!(residue_terms(&pair), Err(FactorError::NonMonic));
        let phi = parse_expr("y - x^2", &p.vars).unwrap();
        assert!(pair.plus.apply(&phi).is_zero());
    }

    #[test]
    fn parabolic_residues() {
        let (p, r, cfg) = setup("x^2*u_xx + 2*x*y*u_xy + y^2*u_yy = 0", VarPair::default(), (0.5, 1.5), (0.5, 1.5));
        let pair = factor_principal(&p, &r, &cfg).unwrap();
        assert_eq!(pair.plus.text(), "d_x + (y/x)*d_y");
        assert!(parabolic_lambda_residue(&pair.plus).unwrap().is_zero());

        let (p, r, cfg) = setup("y^2*u_xx - 2*y*u_xy + u_yy = u_x + 6*y", VarPair::default(), (-1.0, 1.0), (0.5, 1.5));
        let pair = factor_principal(&p, &r, &cfg).unwrap();
        assert_eq!(pair.plus.text(), "(-y)*d_x + d_y");
        assert_eq!(parabolic_lambda_residue(&pair.plus).unwrap(), Expr::one());

        let (p, r, cfg) = setup(
            "x*y^3*u_xx - 2*x^2*y^2*u_xy + x^3*y*u_yy = y^3*u_x + x^3*u_y",
            VarPair::default(),
            (0.5, 1.5),
            (0.5, 1.5),
        );
        let pair = factor_principal(&p, &r, &cfg).unwrap();
        let got = parabolic_lambda_residue(&pair.plus).unwrap();
        let want = parse_expr("(x^2 + y^2)/y^3", &p.vars).unwrap();
        assert!(equiv(&got, &want, &r, &cfg).unwrap());
    }

    #[test]
    fn principal_rebuilds_from_factors() {
        let (p, r, cfg) = setup("x*u_xx + (x-y)*u_xy - y*u_yy = 0", VarPair::default(), (1.0, 2.0), (1.0, 2.0));
        let pair = factor_principal(&p, &r, &cfg).unwrap();
        for probe in ["x^3", "exp(x)*sin(y)", "x*y^2"] {
            let u = parse_expr(probe, &p.vars).unwrap();
            assert!(equiv(&pair.principal(&u), &p.principal(&u), &r, &cfg).unwrap(), "{probe}");
        }
    }
}
