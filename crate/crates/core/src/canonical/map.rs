use thiserror::Error;

use crate::expr::{nonvanishing, Expr, OracleConfig, OracleError, SampleRegion, VarPair};
use crate::factor::FactorPair;
use crate::pde::{vanishes, Kind, Pde2};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum MapError {
    #[error("{0}")]
    Oracle(#[from] OracleError),
    #[error("Jacobian determinant vanishes on the region")]
    Jacobian,
    #[error("inverse does not undo the map: {0}")]
    RoundTrip(&'static str),
    #[error("inverse Jacobian times forward Jacobian is not the identity")]
    JacobianProduct,
    #[error("phi and psi belong to the same characteristic family")]
    SameFamily,
    #[error("{0} is not annihilated by its factor")]
    NotInvariant(&'static str),
    #[error("no admissible psi: L[psi] must not vanish and the principal part must annihilate psi")]
    ParabolicPsi,
    #[error("hyperbolic map needs psi")]
    MissingPsi,
}

/// `(x, y) -> (xi, eta) = (phi, psi)`, with an optional inverse
/// `x = P(xi, eta)`, `y = Q(xi, eta)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMap {
    pub source: VarPair,
    pub target: VarPair,
    pub phi: Expr,
    pub psi: Expr,
    pub inverse: Option<(Expr, Expr)>,
}

impl TransitionMap {
    pub fn new(source: VarPair, phi: Expr, psi: Expr, inverse: Option<(Expr, Expr)>) -> TransitionMap {
        TransitionMap {
            source,
            target: VarPair::target(),
            phi: phi.simplify(),
            psi: psi.simplify(),
            inverse: inverse.map(|(p, q)| (p.simplify(), q.simplify())),
        }
    }

    pub fn identity(vars: VarPair) -> TransitionMap {
        let t = VarPair::target();
        let inv = (t.xe(), t.ye());
        TransitionMap::new(vars.clone(), vars.xe(), vars.ye(), Some(inv))
    }

    /// Rows `(phi_x, phi_y)`, `(psi_x, psi_y)`.
    pub fn forward_jacobian(&self) -> [[Expr; 2]; 2] {
        let [x, y] = self.source.names();
        let d = |e: &Expr, v| e.diff(v).simplify();
        [[d(&self.phi, x), d(&self.phi, y)], [d(&self.psi, x), d(&self.psi, y)]]
    }

    pub fn jacobian(&self) -> Expr {
        let [[px, py], [qx, qy]] = self.forward_jacobian();
        (px * qy - py * qx).simplify()
    }

    /// Rows `(P_xi, P_eta)`, `(Q_xi, Q_eta)` in target coordinates.
    pub fn inverse_jacobian(&self) -> Option<[[Expr; 2]; 2]> {
        let (p, q) = self.inverse.as_ref()?;
        let [u, v] = self.target.names();
        let d = |e: &Expr, w| e.diff(w).simplify();
        Some([[d(p, u), d(p, v)], [d(q, u), d(q, v)]])
    }

    pub fn inverse_determinant(&self) -> Option<Expr> {
        let [[pu, pv], [qu, qv]] = self.inverse_jacobian()?;
        Some((pu * qv - pv * qu).simplify())
    }

    /// A target-coordinate expression read in source coordinates.
    pub fn to_source(&self, e: &Expr) -> Expr {
        let [u, v] = self.target.names();
        e.substitute(&[(u, &self.phi), (v, &self.psi)])
    }

    /// A source-coordinate expression read in target coordinates; needs the
    /// inverse.
    pub fn to_target(&self, e: &Expr) -> Option<Expr> {
        let (p, q) = self.inverse.as_ref()?;
        let [x, y] = self.source.names();
        Some(e.substitute(&[(x, p), (y, q)]))
    }

    /// Nonvanishing Jacobian; with an inverse also both round trips, the
    /// matrix identity `J_inv(Phi) J = I` and determinant reciprocity.
    pub fn validate<T: Scalar>(&self, region: &SampleRegion<T>, cfg: &OracleConfig<T>) -> Result<(), MapError> {
        let det = self.jacobian();
        if !nonvanishing(&det, region, cfg)? {
            return Err(MapError::Jacobian);
        }
        let Some((p, q)) = &self.inverse else {
            return Ok(());
        };
        let [x, y] = self.source.names();
        if !vanishes(&(self.to_source(p) - Expr::var(x)), region, cfg)? {
            return Err(MapError::RoundTrip("x"));
        }
        if !vanishes(&(self.to_source(q) - Expr::var(y)), region, cfg)? {
            return Err(MapError::RoundTrip("y"));
        }
        let inv = self.inverse_jacobian().expect("inverse");
        let fwd = self.forward_jacobian();
        for i in 0..2 {
            for j in 0..2 {
                let entry = self.to_source(&inv[i][0]) * &fwd[0][j] + self.to_source(&inv[i][1]) * &fwd[1][j];
                let want = if i == j { Expr::one() } else { Expr::zero() };
                if !vanishes(&(entry - want), region, cfg)? {
                    return Err(MapError::JacobianProduct);
                }
            }
        }
        let idet = self.to_source(&self.inverse_determinant().expect("inverse"));
        if !vanishes(&(idet * det - Expr::one()), region, cfg)? {
            return Err(MapError::JacobianProduct);
        }
        Ok(())
    }
}

fn parabolic_psi<T: Scalar>(
    p: &Pde2,
    pair: &FactorPair,
    psi: &Expr,
    region: &SampleRegion<T>,
    cfg: &OracleConfig<T>,
) -> Result<bool, MapError> {
    Ok(nonvanishing(&pair.plus.apply(psi), region, cfg)? && vanishes(&p.principal(psi), region, cfg)?)
}

/// Characteristic map from invariants. Hyperbolic: `phi` is annihilated
/// by `L+` and `psi` by `L-`, and the two are different families.
/// Parabolic: `phi` is annihilated by `L`; `psi` (default: `x`, then `y`)
/// must have `L[psi] != 0` and be annihilated by the principal part.
pub fn build_map<T: Scalar>(
    p: &Pde2,
    pair: &FactorPair,
    phi: &Expr,
    psi: Option<&Expr>,
    inverse: Option<(Expr, Expr)>,
    region: &SampleRegion<T>,
    cfg: &OracleConfig<T>,
) -> Result<TransitionMap, MapError> {
    if !vanishes(&pair.plus.apply(phi), region, cfg)? {
        return Err(MapError::NotInvariant("phi"));
    }
    let psi = match pair.kind {
        Kind::Parabolic => match psi {
            Some(s) if parabolic_psi(p, pair, s, region, cfg)? => s.clone(),
            Some(_) => return Err(MapError::ParabolicPsi),
            None => {
                let mut hit = None;
                for cand in [p.vars.xe(), p.vars.ye()] {
                    if parabolic_psi(p, pair, &cand, region, cfg)? {
                        hit = Some(cand);
                        break;
                    }
                }
                hit.ok_or(MapError::ParabolicPsi)?
            }
        },
        _ => {
            let s = psi.ok_or(MapError::MissingPsi)?;
            if !vanishes(&pair.minus.apply(s), region, cfg)? {
                return Err(MapError::NotInvariant("psi"));
            }
            if crate::chars::invariant_equivalent(phi, s, region, cfg)? {
                return Err(MapError::SameFamily);
            }
            s.clone()
        }
    };
    let map = TransitionMap::new(p.vars.clone(), phi.clone(), psi, inverse);
    map.validate(region, cfg)?;
    Ok(map)
}
