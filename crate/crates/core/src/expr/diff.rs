use num_traits::One;

use super::tree::{Expr, Func, Node};

impl Expr {
    /// Exact partial derivative with respect to the variable `v`.
    pub fn diff(&self, v: &str) -> Expr {
        match self.kind() {
            Node::Const(_) => Expr::zero(),
            Node::Var(n) => {
                if &**n == v {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Add(a, b) => a.diff(v) + b.diff(v),
            Node::Sub(a, b) => a.diff(v) - b.diff(v),
            Node::Mul(a, b) => a.diff(v) * b + a * b.diff(v),
            Node::Div(a, b) => {
                let da = a.diff(v);
                let db = b.diff(v);
                if db.is_zero() {
                    da / b
                } else {
                    (da * b - a * db) / b.powi(2)
                }
            }
            Node::Pow(a, r) => {
                let da = a.diff(v);
                if da.is_zero() {
                    return Expr::zero();
                }
                Expr::rational(*r) * a.powr(r - num_rational::Rational64::one()) * da
            }
            Node::Neg(a) => -a.diff(v),
            Node::Apply(f, a) => {
                let da = a.diff(v);
                if da.is_zero() {
                    return Expr::zero();
                }
                let outer = match f {
                    Func::Exp => self.clone(),
                    Func::Ln => return da / a,
                    Func::Sqrt => return da / (Expr::int(2) * self),
                    Func::Sinh => Expr::cosh(a.clone()),
                    Func::Cosh => Expr::sinh(a.clone()),
                    Func::Tanh => Expr::one() / Expr::cosh(a.clone()).powi(2),
                    Func::Sin => Expr::cos(a.clone()),
                    Func::Cos => -Expr::sin(a.clone()),
                };
                outer * da
            }
        }
    }
}
