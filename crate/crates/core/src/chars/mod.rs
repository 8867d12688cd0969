//! Characteristic ODEs, invariants and traced characteristic curves.

mod solve;
mod trace;

use serde::Serialize;

use crate::expr::{nonvanishing, Expr, OracleConfig, OracleError, SampleRegion, VarPair};
use crate::factor::{FactorPair, FirstOrderOp};
use crate::pde::{vanishes, Kind};
use crate::scalar::Scalar;

pub use solve::{is_separable, solve_invariant};
pub use trace::{trace_curves, Curve, TraceError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Plus,
    Minus,
    Parabolic,
    Field,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Plus => "plus",
            Family::Minus => "minus",
            Family::Parabolic => "parabolic",
            Family::Field => "field",
        }
    }
}

/// Integral curves of the field `(alpha, beta)`; `rhs` is `dy/dx` when
/// `alpha` does not vanish identically.
#[derive(Clone, Debug, PartialEq)]
pub struct CharacteristicOde {
    pub vars: VarPair,
    pub family: Family,
    pub alpha: Expr,
    pub beta: Expr,
    pub rhs: Option<Expr>,
}

impl CharacteristicOde {
    pub fn from_op(op: &FirstOrderOp, family: Family) -> CharacteristicOde {
        let rhs = if op.alpha.is_zero() {
            None
        } else {
            Some((&op.beta / &op.alpha).simplify())
        };
        CharacteristicOde {
            vars: op.vars.clone(),
            family,
            alpha: op.alpha.clone(),
            beta: op.beta.clone(),
            rhs,
        }
    }

    /// `dy/dx = rhs`.
    pub fn slope(vars: VarPair, rhs: Expr, family: Family) -> CharacteristicOde {
        let rhs = rhs.simplify();
        CharacteristicOde {
            vars,
            family,
            alpha: Expr::one(),
            beta: rhs.clone(),
            rhs: Some(rhs),
        }
    }

    pub fn op(&self) -> FirstOrderOp {
        FirstOrderOp::new(self.vars.clone(), self.alpha.clone(), self.beta.clone())
    }

    pub fn text(&self) -> String {
        let [x, y] = self.vars.names();
        match &self.rhs {
            Some(r) => format!("d{y}/d{x} = {}", r.pretty()),
            None => format!("d{x}/d{y} = 0"),
        }
    }
}

/// One ODE per distinct family: `plus` then `minus`, or the single
/// parabolic family.
pub fn char_odes(pair: &FactorPair) -> Vec<CharacteristicOde> {
    if pair.kind == Kind::Parabolic {
        return vec![CharacteristicOde::from_op(&pair.plus, Family::Parabolic)];
    }
    vec![
        CharacteristicOde::from_op(&pair.plus, Family::Plus),
        CharacteristicOde::from_op(&pair.minus, Family::Minus),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    SolvedSymbolically,
    UserSupplied,
    Fixture,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Invariant {
    pub phi: Expr,
    pub family: Family,
    pub provenance: Provenance,
}

fn grad_norm2(e: &Expr, vars: &VarPair) -> Expr {
    let [x, y] = vars.names();
    (e.diff(x).powi(2) + e.diff(y).powi(2)).simplify()
}

/// `op[phi]` vanishes and `grad phi` does not, over the region.
pub fn verify_invariant<T: Scalar>(
    op: &FirstOrderOp,
    phi: &Expr,
    region: &SampleRegion<T>,
    cfg: &OracleConfig<T>,
) -> Result<bool, OracleError> {
    Ok(vanishes(&op.apply(phi), region, cfg)? && nonvanishing(&grad_norm2(phi, &op.vars), region, cfg)?)
}

/// Same level-curve family: the gradients are parallel everywhere.
pub fn invariant_equivalent<T: Scalar>(
    p: &Expr,
    q: &Expr,
    region: &SampleRegion<T>,
    cfg: &OracleConfig<T>,
) -> Result<bool, OracleError> {
    let [x, y] = region.vars.names();
    let cross = p.diff(x) * q.diff(y) - p.diff(y) * q.diff(x);
    vanishes(&cross, region, cfg)
}
