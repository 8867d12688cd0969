//! Commutativity and residue conditions read off second partials of the
//! inverse map.

use serde::Serialize;

use super::{CanonicalError, TransitionMap};
use crate::expr::{Expr, OracleConfig, SampleRegion};
use crate::factor::{commutator_report, parabolic_lambda_residue, FactorPair};
use crate::pde::{vanishes, Axis, Kind, Pde2};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionWitness {
    pub name: &'static str,
    /// Target coordinates.
    #[serde(serialize_with = "crate::ser::expr")]
    pub expr: Expr,
    pub vanishes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InverseConditionReport {
    pub kind: Kind,
    pub witnesses: Vec<ConditionWitness>,
    /// Hyperbolic: `P_xieta = 0`.
    pub commutes: Option<bool>,
    pub residue_free_minus: Option<bool>,
    pub residue_free_plus: Option<bool>,
    /// Parabolic: `L[L[psi]] = 0`.
    pub ll_psi_zero: Option<bool>,
    /// Parabolic: `L[Lambda] = 0`, both `P_etaeta` and `Q_etaeta` vanish.
    pub lambda_residue_zero: Option<bool>,
    /// Parabolic: `Q_xi P_etaeta = P_xi Q_etaeta`, i.e. the principal part
    /// annihilates `psi`.
    pub psi_identity: Option<bool>,
    /// Agreement with the verdicts computed from the factors; absent when
    /// no comparable factor verdict exists.
    pub agrees_with_factors: Option<bool>,
}

impl InverseConditionReport {
    pub fn witness(&self, name: &str) -> Option<&ConditionWitness> {
        self.witnesses.iter().find(|w| w.name == name)
    }
}

/// `p` and `pair` are needed only for the cross-check against the factor
/// verdicts.
pub fn inverse_condition_report<T: Scalar>(
    map: &TransitionMap,
    kind: Kind,
    factors: Option<(&Pde2, &FactorPair)>,
    region: &SampleRegion<T>,
    cfg: &OracleConfig<T>,
) -> Result<InverseConditionReport, CanonicalError> {
    let [[pu, pv], [qu, qv]] = map.inverse_jacobian().ok_or(CanonicalError::MissingInverse)?;
    let [_, v] = map.target.names();
    let d = |e: &Expr, w: &str| e.diff(w).simplify();
    let mut witnesses = Vec::new();
    let mut push = |name: &'static str, expr: Expr| -> Result<bool, CanonicalError> {
        let expr = expr.simplify();
        let z = vanishes(&map.to_source(&expr), region, cfg)?;
        witnesses.push(ConditionWitness { name, expr, vanishes: z });
        Ok(z)
    };
    let mut rep = InverseConditionReport {
        kind,
        witnesses: Vec::new(),
        commutes: None,
        residue_free_minus: None,
        residue_free_plus: None,
        ll_psi_zero: None,
        lambda_residue_zero: None,
        psi_identity: None,
        agrees_with_factors: None,
    };
    match kind {
        Kind::Hyperbolic => {
            let puv = d(&pu, v);
            let quv = d(&qu, v);
            rep.commutes = Some(push("P_xieta", puv.clone())?);
            push("Q_xieta", quv.clone())?;
            rep.residue_free_plus = Some(push("r_plus_twin", &quv * &pu - &qu * &puv)?);
            rep.residue_free_minus = Some(push("r_minus_twin", &puv * &qv - &quv * &pv)?);
            if let Some((p, pair)) = factors {
                if pair.is_monic() && pair.axis() == Axis::X {
                    let c = commutator_report(p, pair, None, region, cfg)?;
                    rep.agrees_with_factors = Some(
                        rep.commutes == Some(c.commutes)
                            && rep.residue_free_minus == Some(c.residue_free_minus)
                            && rep.residue_free_plus == Some(c.residue_free_plus),
                    );
                }
            }
        }
        Kind::Parabolic => {
            let pvv = d(&pv, v);
            let qvv = d(&qv, v);
            let p0 = push("P_etaeta", pvv.clone())?;
            let q0 = push("Q_etaeta", qvv.clone())?;
            rep.psi_identity = Some(push("psi_identity", &qu * &pvv - &pu * &qvv)?);
            let axis = factors.map_or(Axis::X, |(_, pair)| pair.axis());
            rep.ll_psi_zero = Some(match axis {
                Axis::X => p0,
                Axis::Y => q0,
            });
            rep.lambda_residue_zero = Some(p0 && q0);
            if let Some((_, pair)) = factors {
                let l = &pair.plus;
                let ll = vanishes(&l.apply(&l.apply(&map.psi)), region, cfg)?;
                let lam = parabolic_lambda_residue(l).expect("parabolic factor is monic");
                let lam0 = vanishes(&lam, region, cfg)?;
                rep.agrees_with_factors = Some(rep.ll_psi_zero == Some(ll) && rep.lambda_residue_zero == Some(lam0));
            }
        }
        Kind::Elliptic => return Err(CanonicalError::Unsupported("elliptic")),
        Kind::Mixed => return Err(CanonicalError::Unsupported("mixed-type")),
    }
    rep.witnesses = witnesses;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_expr, VarPair};
    use crate::factor::factor_principal;

    #[test]
    fn inverse_es2_only_plus_residue_free() {
        let cfg = OracleConfig::default();
        let v = VarPair::new("t", "x");
        let tv = VarPair::target();
        let p = Pde2::parse("t^2*u_tt + 4*t*x*u_tx + 3*x^2*u_xx = 0", &v).unwrap();
        let r = SampleRegion::new(v.clone(), (0.5, 1.5), (0.5, 1.5)).unwrap();
        let pair = factor_principal(&p, &r, &cfg).unwrap();
        let e = |s| parse_expr(s, &v).unwrap();
        let f = |s| parse_expr(s, &tv).unwrap();
        let map = TransitionMap::new(
            v.clone(),
            e("x/t"),
            e("x/t^3"),
            Some((f("(xi/eta)^(1/2)"), f("(xi^3/eta)^(1/2)"))),
        );
        map.validate(&r, &cfg).unwrap();
        let rep = inverse_condition_report(&map, Kind::Hyperbolic, Some((&p, &pair)), &r, &cfg).unwrap();
        assert_eq!(rep.commutes, Some(false));
        assert_eq!(rep.residue_free_plus, Some(true));
        assert_eq!(rep.residue_free_minus, Some(false));
        assert_eq!(rep.agrees_with_factors, Some(true));
    }

    #[test]
    fn affine_map_is_free_of_everything() {
        let cfg = OracleConfig::default();
        let v = VarPair::default();
        let tv = VarPair::target();
        let r = SampleRegion::new(v.clone(), (0.5, 1.5), (0.5, 1.5)).unwrap();
        let map = TransitionMap::new(
            v.clone(),
            parse_expr("x + y", &v).unwrap(),
            parse_expr("x - y", &v).unwrap(),
            Some((parse_expr("(xi + eta)/2", &tv).unwrap(), parse_expr("(xi - eta)/2", &tv).unwrap())),
        );
        let rep = inverse_condition_report(&map, Kind::Hyperbolic, None, &r, &cfg).unwrap();
        assert!(rep.witnesses.iter().all(|w| w.vanishes));
        assert_eq!(rep.agrees_with_factors, None);
    }
}
