//! Turns flags into a parsed equation, region and oracle settings.

use characteristica::corpus::{self, Fixture};
use characteristica::expr::parse_expr;
use characteristica::pde::Pde2;
use characteristica::{Expr, Oracle, Region, VarPair};

use crate::{Common, Failure, MapArgs};

pub const SEED_ENV: &str = "CHARACTERISTICA_SEED";
const DEFAULT_REGION: [f64; 4] = [0.5, 1.5, 0.5, 1.5];

pub struct Input {
    pub text: String,
    pub vars: VarPair,
    pub region: Region,
    pub bounds: [f64; 4],
    pub fixture: Option<Fixture>,
}

pub fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(msg.to_string())
}

pub fn oracle(seed: Option<u64>, tol: Option<f64>) -> Result<Oracle, Failure> {
    let mut cfg = Oracle::default();
    let env = match std::env::var(SEED_ENV) {
        Ok(s) => Some(s.trim().parse::<u64>().map_err(|_| usage(format!("{SEED_ENV}={s:?} is not an integer")))?),
        Err(_) => None,
    };
    if let Some(s) = seed.or(env) {
        cfg = cfg.with_seed(s);
    }
    if let Some(t) = tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(usage("--tol must be positive"));
        }
        cfg = cfg.with_tolerance(t);
    }
    Ok(cfg)
}

pub fn find_fixture(id: &str) -> Result<Fixture, Failure> {
    corpus::fixture(id)
        .map_err(|e| Failure::Check(e.to_string()))?
        .ok_or_else(|| usage(format!("no fixture {id:?}")))
}

pub fn parse_vars(s: &str) -> Result<VarPair, Failure> {
    let parts: Vec<_> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [x, y] if !x.is_empty() && !y.is_empty() && x != y => Ok(VarPair::new(x, y)),
        _ => Err(usage(format!("--vars expects two distinct names, got {s:?}"))),
    }
}

pub fn parse_bounds(s: &str) -> Result<[f64; 4], Failure> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| usage(format!("--region expects x0,x1,y0,y1, got {s:?}")))?;
    <[f64; 4]>::try_from(v).map_err(|_| usage(format!("--region expects four numbers, got {s:?}")))
}

pub fn region(vars: &VarPair, b: [f64; 4], guards: Vec<Expr>) -> Result<Region, Failure> {
    Ok(Region::new(vars.clone(), (b[0], b[1]), (b[2], b[3]))
        .map_err(usage)?
        .with_guards(guards))
}

pub fn expr(text: &str, vars: &VarPair) -> Result<Expr, Failure> {
    parse_expr(text, vars).map_err(|e| usage(format!("{text:?}: {e}")))
}

/// Exactly one of the positional equation and `--fixture`. Flags override
/// fixture fields.
pub fn resolve(c: &Common) -> Result<Input, Failure> {
    resolve_with(c, DEFAULT_REGION)
}

pub fn resolve_with(c: &Common, default_region: [f64; 4]) -> Result<Input, Failure> {
    let fixture = match (&c.pde, &c.fixture) {
        (Some(_), Some(_)) => return Err(usage("give an equation or --fixture, not both")),
        (None, None) => return Err(usage("missing equation or --fixture")),
        (None, Some(id)) => Some(find_fixture(id)?),
        (Some(_), None) => None,
    };
    let vars = match (&c.vars, &fixture) {
        (Some(v), _) => parse_vars(v)?,
        (None, Some(f)) => f.var_pair(),
        (None, None) => VarPair::default(),
    };
    let bounds = match (&c.region, &fixture) {
        (Some(r), _) => parse_bounds(r)?,
        (None, Some(f)) => f.region,
        (None, None) => default_region,
    };
    let mut guards = Vec::new();
    if let Some(f) = &fixture {
        for g in &f.guards {
            guards.push(expr(g, &vars)?);
        }
    }
    for g in &c.guards {
        guards.push(expr(g, &vars)?);
    }
    let text = match (&c.pde, &fixture) {
        (Some(t), _) => t.clone(),
        (None, Some(f)) => f.pde.clone(),
        (None, None) => unreachable!(),
    };
    Ok(Input {
        region: region(&vars, bounds, guards)?,
        text,
        vars,
        bounds,
        fixture,
    })
}

impl Input {
    pub fn pde(&self) -> Result<Pde2, Failure> {
        Pde2::parse(&self.text, &self.vars).map_err(|e| usage(format!("{:?}: {e}", self.text)))
    }

    /// Flag value, else the fixture's.
    pub fn phi(&self, m: &MapArgs) -> Result<Option<(Expr, bool)>, Failure> {
        self.pick(m.phi.as_deref(), self.fixture.as_ref().and_then(|f| f.phi.as_deref()))
    }

    pub fn psi(&self, m: &MapArgs) -> Result<Option<(Expr, bool)>, Failure> {
        self.pick(m.psi.as_deref(), self.fixture.as_ref().and_then(|f| f.psi.as_deref()))
    }

    /// The bool is true for a user-supplied expression.
    fn pick(&self, flag: Option<&str>, stored: Option<&str>) -> Result<Option<(Expr, bool)>, Failure> {
        match (flag, stored) {
            (Some(t), _) => Ok(Some((expr(t, &self.vars)?, true))),
            (None, Some(t)) => Ok(Some((expr(t, &self.vars)?, false))),
            (None, None) => Ok(None),
        }
    }

    pub fn inverse(&self, m: &MapArgs) -> Result<Option<(Expr, Expr)>, Failure> {
        let t = VarPair::target();
        match (&m.inv_phi, &m.inv_psi) {
            (Some(p), Some(q)) => Ok(Some((expr(p, &t)?, expr(q, &t)?))),
            (None, None) => match self.fixture.as_ref().and_then(|f| f.inverse.as_ref()) {
                Some([p, q]) => Ok(Some((expr(p, &t)?, expr(q, &t)?))),
                None => Ok(None),
            },
            _ => Err(usage("--inv-phi and --inv-psi go together")),
        }
    }
}
