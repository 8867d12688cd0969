use num_integer::Integer;
use thiserror::Error;

use super::tree::{Expr, Func, Node, Rational};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FaultKind {
    DivisionByZero,
    Domain(&'static str),
    NonFinite,
    Unbound(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("evaluation fault ({kind:?}) in `{subtree}`")]
pub struct EvalError {
    pub kind: FaultKind,
    pub subtree: String,
}

fn fault<T>(kind: FaultKind, e: &Expr) -> Result<T, EvalError> {
    Err(EvalError {
        kind,
        subtree: e.pretty(),
    })
}

fn finite<T: Scalar>(v: T, e: &Expr) -> Result<T, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        fault(FaultKind::NonFinite, e)
    }
}

/// Real power with a rational exponent; odd-denominator roots of negative
/// bases take the real branch.
pub(crate) fn rpow<T: Scalar>(b: T, r: &Rational, e: &Expr) -> Result<T, EvalError> {
    if r.is_integer() {
        let n = *r.numer();
        if b == T::zero() && n < 0 {
            return fault(FaultKind::DivisionByZero, e);
        }
        return match i32::try_from(n) {
            Ok(n) => Ok(b.powi(n)),
            Err(_) => Ok(b.powf(T::of_rational(r))),
        };
    }
    if b > T::zero() {
        return Ok(b.powf(T::of_rational(r)));
    }
    if b == T::zero() {
        return if *r.numer() > 0 {
            Ok(T::zero())
        } else {
            fault(FaultKind::DivisionByZero, e)
        };
    }
    if r.denom().is_odd() {
        let mag = (-b).powf(T::of_rational(r));
        return Ok(if r.numer().is_odd() { -mag } else { mag });
    }
    fault(FaultKind::Domain("fractional power of a negative base"), e)
}

pub(crate) fn apply<T: Scalar>(f: Func, a: T, e: &Expr) -> Result<T, EvalError> {
    Ok(match f {
        Func::Exp => a.exp(),
        Func::Ln => {
            if a <= T::zero() {
                return fault(FaultKind::Domain("ln of a non-positive argument"), e);
            }
            a.ln()
        }
        Func::Sqrt => {
            if a < T::zero() {
                return fault(FaultKind::Domain("sqrt of a negative argument"), e);
            }
            a.sqrt()
        }
        Func::Sinh => a.sinh(),
        Func::Cosh => a.cosh(),
        Func::Tanh => a.tanh(),
        Func::Sin => a.sin(),
        Func::Cos => a.cos(),
    })
}

fn lookup<T: Scalar>(env: &[(&str, T)], name: &str, e: &Expr) -> Result<T, EvalError> {
    env.iter()
        .find(|(n, _)| *n == name)
        .map(|(_, v)| *v)
        .map_or_else(|| fault(FaultKind::Unbound(name.to_string()), e), Ok)
}

impl Expr {
    /// Evaluates with the given variable bindings.
    pub fn eval<T: Scalar>(&self, env: &[(&str, T)]) -> Result<T, EvalError> {
        let v = match self.kind() {
            Node::Const(c) => T::of_rational(c),
            Node::Var(n) => lookup(env, n, self)?,
            Node::Add(a, b) => a.eval(env)? + b.eval(env)?,
            Node::Sub(a, b) => a.eval(env)? - b.eval(env)?,
            Node::Mul(a, b) => a.eval(env)? * b.eval(env)?,
            Node::Div(a, b) => {
                let num = a.eval(env)?;
                let den = b.eval(env)?;
                if den == T::zero() {
                    return fault(FaultKind::DivisionByZero, self);
                }
                num / den
            }
            Node::Pow(a, r) => rpow(a.eval(env)?, r, self)?,
            Node::Neg(a) => -a.eval(env)?,
            Node::Apply(f, a) => apply(*f, a.eval(env)?, self)?,
        };
        finite(v, self)
    }

    /// Evaluates at a point of the plane spanned by `names`.
    pub fn eval_at<T: Scalar>(&self, names: [&str; 2], x: T, y: T) -> Result<T, EvalError> {
        self.eval(&[(names[0], x), (names[1], y)])
    }

    /// Value together with a magnitude bound on the rounding error scale:
    /// sums accumulate the magnitudes of their operands, so cancellation
    /// does not make the relative tolerance meaningless.
    pub fn eval_scaled<T: Scalar>(&self, env: &[(&str, T)]) -> Result<(T, T), EvalError> {
        let (v, m) = match self.kind() {
            Node::Const(c) => {
                let v = T::of_rational(c);
                (v, v.abs())
            }
            Node::Var(n) => {
                let v = lookup(env, n, self)?;
                (v, v.abs())
            }
            Node::Add(a, b) | Node::Sub(a, b) => {
                let (va, ma) = a.eval_scaled(env)?;
                let (vb, mb) = b.eval_scaled(env)?;
                let v = if matches!(self.kind(), Node::Add(..)) { va + vb } else { va - vb };
                (v, ma + mb)
            }
            Node::Mul(a, b) => {
                let (va, ma) = a.eval_scaled(env)?;
                let (vb, mb) = b.eval_scaled(env)?;
                (va * vb, ma * mb)
            }
            Node::Div(a, b) => {
                let (va, ma) = a.eval_scaled(env)?;
                let (vb, mb) = b.eval_scaled(env)?;
                if vb == T::zero() {
                    return fault(FaultKind::DivisionByZero, self);
                }
                let v = va / vb;
                (v, (ma + v.abs() * mb) / vb.abs())
            }
            Node::Pow(a, r) => {
                let (va, ma) = a.eval_scaled(env)?;
                let v = rpow(va, r, self)?;
                let d = if va == T::zero() {
                    T::zero()
                } else {
                    (T::of_rational(r) * v / va).abs()
                };
                (v, v.abs() + d * ma)
            }
            Node::Neg(a) => {
                let (va, ma) = a.eval_scaled(env)?;
                (-va, ma)
            }
            Node::Apply(f, a) => {
                let (va, ma) = a.eval_scaled(env)?;
                let v = apply(*f, va, self)?;
                let slope = match f {
                    Func::Exp => v.abs(),
                    Func::Ln => T::one() / va.abs(),
                    Func::Sqrt => {
                        if v == T::zero() {
                            T::zero()
                        } else {
                            T::one() / (v + v)
                        }
                    }
                    Func::Sinh => va.cosh(),
                    Func::Cosh => va.sinh().abs(),
                    Func::Tanh | Func::Sin | Func::Cos => T::one(),
                };
                (v, v.abs() + slope * ma)
            }
        };
        Ok((finite(v, self)?, m.max(v.abs())))
    }
}
