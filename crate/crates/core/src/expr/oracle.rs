//! Numeric identity oracle: seeded sampling over a guarded rectangle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::tree::{Expr, Func, Node, VarPair};
use crate::scalar::Scalar;

/// Default seed, shared by every run unless overridden.
pub const DEFAULT_SEED: u64 = 0x5EED_C4A2_2024_0001;

/// Environment variable that overrides the oracle seed in the CLI.
pub const SEED_ENV: &str = "CHARACTERISTICA_SEED";

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("region exhausted: found {found} of {wanted} admissible sample points")]
    RegionExhausted { found: usize, wanted: usize },
    #[error("invalid region: {0}")]
    InvalidRegion(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleRegion<T> {
    pub vars: VarPair,
    pub x: (T, T),
    pub y: (T, T),
    /// Expressions that must stay at least `eps_guard` away from zero.
    pub guards: Vec<Expr>,
    pub eps_guard: T,
}

impl<T: Scalar> SampleRegion<T> {
    pub fn new(vars: VarPair, x: (T, T), y: (T, T)) -> Result<Self, OracleError> {
        if !(x.0 < x.1 && y.0 < y.1) {
            return Err(OracleError::InvalidRegion(format!(
                "need x_lo < x_hi and y_lo < y_hi, got [{}, {}] x [{}, {}]",
                x.0, x.1, y.0, y.1
            )));
        }
        Ok(SampleRegion {
            vars,
            x,
            y,
            guards: Vec::new(),
            eps_guard: T::of(1e-3),
        })
    }

    pub fn with_guards(mut self, guards: Vec<Expr>) -> Self {
        self.guards = guards;
        self
    }

    pub fn center(&self) -> (T, T) {
        let two = T::of(2.0);
        ((self.x.0 + self.x.1) / two, (self.y.0 + self.y.1) / two)
    }

    pub fn contains(&self, p: (T, T)) -> bool {
        p.0 >= self.x.0 && p.0 <= self.x.1 && p.1 >= self.y.0 && p.1 <= self.y.1
    }

    /// Same rectangle and guards over a different variable pair.
    pub fn renamed(&self, vars: VarPair) -> Self {
        let rename: Vec<(String, Expr)> = vec![
            (self.vars.x.to_string(), vars.xe()),
            (self.vars.y.to_string(), vars.ye()),
        ];
        let b: Vec<(&str, &Expr)> = rename.iter().map(|(n, e)| (n.as_str(), e)).collect();
        SampleRegion {
            vars,
            x: self.x,
            y: self.y,
            guards: self.guards.iter().map(|g| g.substitute(&b)).collect(),
            eps_guard: self.eps_guard,
        }
    }

    /// Evaluates `e` at a point of this region.
    pub fn eval(&self, e: &Expr, p: (T, T)) -> Result<T, super::EvalError> {
        e.eval_at(self.vars.names(), p.0, p.1)
    }

    fn admissible(&self, p: (T, T), implicit: &[Guard], exprs: &[&Expr]) -> bool {
        let names = self.vars.names();
        let eps = self.eps_guard;
        for g in &self.guards {
            match g.eval_at(names, p.0, p.1) {
                Ok(v) if v.abs() >= eps => {}
                _ => return false,
            }
        }
        for g in implicit {
            match g.expr.eval_at(names, p.0, p.1) {
                Ok(v) if g.positive && v >= eps => {}
                Ok(v) if !g.positive && v.abs() >= eps => {}
                _ => return false,
            }
        }
        exprs.iter().all(|e| e.eval_at(names, p.0, p.1).is_ok())
    }

    /// Draws `cfg.samples` admissible points. Candidates come from a fixed
    /// seeded stream, so the result is deterministic for a given seed and
    /// set of expressions.
    pub fn sample(&self, cfg: &OracleConfig<T>, exprs: &[&Expr]) -> Result<Vec<(T, T)>, OracleError> {
        let mut implicit = Vec::new();
        for e in exprs {
            domain_guards(e, &mut implicit);
        }
        implicit.dedup();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let wanted = cfg.samples;
        let max_tries = 200 * wanted + 2000;
        let mut out = Vec::with_capacity(wanted);
        let (x0, x1) = (self.x.0.as_f64(), self.x.1.as_f64());
        let (y0, y1) = (self.y.0.as_f64(), self.y.1.as_f64());
        for _ in 0..max_tries {
            if out.len() == wanted {
                break;
            }
            let u: f64 = rng.gen();
            let v: f64 = rng.gen();
            let p = (T::of(x0 + (x1 - x0) * u), T::of(y0 + (y1 - y0) * v));
            if self.admissible(p, &implicit, exprs) {
                out.push(p);
            }
        }
        if out.len() < wanted {
            return Err(OracleError::RegionExhausted {
                found: out.len(),
                wanted,
            });
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleConfig<T> {
    pub samples: usize,
    pub tau_abs: T,
    pub tau_rel: T,
    pub seed: u64,
}

impl<T: Scalar> Default for OracleConfig<T> {
    fn default() -> Self {
        OracleConfig {
            samples: 64,
            tau_abs: T::of(1e-9),
            tau_rel: T::of(1e-9),
            seed: DEFAULT_SEED,
        }
    }
}

impl<T: Scalar> OracleConfig<T> {
    pub fn with_tolerance(mut self, tau: T) -> Self {
        self.tau_abs = tau;
        self.tau_rel = tau;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Tolerance at a point with the given magnitude scale.
    pub fn tol(&self, scale: T) -> T {
        self.tau_abs + self.tau_rel * scale
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Guard {
    expr: Expr,
    positive: bool,
}

/// Denominators, logarithm and even-root arguments of `e`.
fn domain_guards(e: &Expr, out: &mut Vec<Guard>) {
    let mut push = |expr: &Expr, positive: bool| {
        if expr.as_const().is_none() {
            let g = Guard {
                expr: expr.clone(),
                positive,
            };
            if !out.contains(&g) {
                out.push(g);
            }
        }
    };
    match e.kind() {
        Node::Const(_) | Node::Var(_) => {}
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) => {
            domain_guards(a, out);
            domain_guards(b, out);
        }
        Node::Div(a, b) => {
            push(b, false);
            domain_guards(a, out);
            domain_guards(b, out);
        }
        Node::Pow(a, r) => {
            if !r.is_integer() && r.denom() % 2 == 0 {
                push(a, true);
            } else if *r.numer() < 0 {
                push(a, false);
            }
            domain_guards(a, out);
        }
        Node::Neg(a) => domain_guards(a, out),
        Node::Apply(f, a) => {
            match f {
                Func::Ln | Func::Sqrt => push(a, true),
                _ => {}
            }
            domain_guards(a, out);
        }
    }
}

/// Outcome of a zero test with the worst sample.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroReport<T> {
    pub zero: bool,
    pub samples: usize,
    pub worst_point: Option<(T, T)>,
    pub worst_value: T,
    pub worst_ratio: T,
}

/// Full report behind [`equiv_zero`].
pub fn check_zero<T: Scalar>(
    e: &Expr,
    region: &SampleRegion<T>,
    cfg: &OracleConfig<T>,
) -> Result<ZeroReport<T>, OracleError> {
    if e.is_zero() {
        return Ok(ZeroReport {
            zero: true,
            samples: 0,
            worst_point: None,
            worst_value: T::zero(),
            worst_ratio: T::zero(),
        });
    }
    let pts = region.sample(cfg, &[e])?;
    let names = region.vars.names();
    let mut rep = ZeroReport {
        zero: true,
        samples: pts.len(),
        worst_point: None,
        worst_value: T::zero(),
        worst_ratio: T::zero(),
    };
    for p in pts {
        let env = [(names[0], p.0), (names[1], p.1)];
        let (v, scale) = match e.eval_scaled(&env) {
            Ok(vs) => vs,
            Err(_) => continue,
        };
        let ratio = v.abs() / cfg.tol(scale);
        if ratio > rep.worst_ratio || rep.worst_point.is_none() {
            rep.worst_ratio = ratio;
            rep.worst_value = v;
            rep.worst_point = Some(p);
        }
        if ratio > T::one() {
            rep.zero = false;
        }
    }
    Ok(rep)
}

/// True iff `e` vanishes within tolerance at every accepted sample.
pub fn equiv_zero<T: Scalar>(e: &Expr, region: &SampleRegion<T>, cfg: &OracleConfig<T>) -> Result<bool, OracleError> {
    Ok(check_zero(e, region, cfg)?.zero)
}

/// Oracle equality of two expressions.
pub fn equiv<T: Scalar>(a: &Expr, b: &Expr, region: &SampleRegion<T>, cfg: &OracleConfig<T>) -> Result<bool, OracleError> {
    equiv_zero(&(a - b), region, cfg)
}

/// True iff `e` stays clear of zero (beyond tolerance) at every sample.
pub fn nonvanishing<T: Scalar>(e: &Expr, region: &SampleRegion<T>, cfg: &OracleConfig<T>) -> Result<bool, OracleError> {
    let pts = region.sample(cfg, &[e])?;
    let names = region.vars.names();
    for p in pts {
        match e.eval_scaled(&[(names[0], p.0), (names[1], p.1)]) {
            Ok((v, s)) if v.abs() > cfg.tol(s) => {}
            _ => return Ok(false),
        }
    }
    Ok(true)
}

/// Constant sign of `e` over the samples: `Some(1)`, `Some(-1)`, or `None`
/// when it changes sign or touches zero.
pub fn sign_on<T: Scalar>(e: &Expr, region: &SampleRegion<T>, cfg: &OracleConfig<T>) -> Result<Option<i8>, OracleError> {
    let pts = region.sample(cfg, &[e])?;
    let names = region.vars.names();
    let mut sign = 0i8;
    for p in pts {
        let s = match e.eval_scaled(&[(names[0], p.0), (names[1], p.1)]) {
            Ok((v, sc)) if v > cfg.tol(sc) => 1,
            Ok((v, sc)) if v < -cfg.tol(sc) => -1,
            _ => return Ok(None),
        };
        if sign != 0 && s != sign {
            return Ok(None);
        }
        sign = s;
    }
    Ok(if sign == 0 { None } else { Some(sign) })
}
