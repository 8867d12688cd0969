//! Numeric characteristic curves: arc-length RK4 on the unit field.

use serde::Serialize;
use thiserror::Error;

use super::CharacteristicOde;
use crate::expr::{Expr, SampleRegion};
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum TraceError {
    #[error("step size must be positive")]
    Step,
    #[error("seed ({0}, {1}) lies outside the region")]
    Seed(f64, f64),
}

#[derive(Clone, Debug, Serialize)]
pub struct Curve<T> {
    pub seed: (T, T),
    pub h: T,
    pub points: Vec<(T, T)>,
    /// Stopped for a reason other than leaving the region or closing:
    /// vanishing field, evaluation fault or the step budget.
    pub truncated: bool,
    pub closed: bool,
    /// Largest relative change of the supplied invariant along the curve.
    pub drift: Option<T>,
    /// Largest sine of the angle between a chord and the field at its
    /// midpoint.
    pub defect: T,
}

struct Field<'a, T> {
    alpha: &'a Expr,
    beta: &'a Expr,
    region: &'a SampleRegion<T>,
}

impl<T: Scalar> Field<'_, T> {
    fn raw(&self, p: (T, T)) -> Option<(T, T)> {
        let a = self.region.eval(self.alpha, p).ok()?;
        let b = self.region.eval(self.beta, p).ok()?;
        Some((a, b))
    }

    /// Unit field, `None` where it faults or (nearly) vanishes.
    fn unit(&self, p: (T, T)) -> Option<(T, T)> {
        let (a, b) = self.raw(p)?;
        let n = a.hypot(b);
        (n.is_finite() && n > T::of(1e-12)).then(|| (a / n, b / n))
    }

    fn rk4(&self, p: (T, T), h: T) -> Option<(T, T)> {
        let two = T::of(2.0);
        let at = |k: (T, T), s: T| (p.0 + s * k.0, p.1 + s * k.1);
        let k1 = self.unit(p)?;
        let k2 = self.unit(at(k1, h / two))?;
        let k3 = self.unit(at(k2, h / two))?;
        let k4 = self.unit(at(k3, h))?;
        let six = T::of(6.0);
        Some((
            p.0 + h / six * (k1.0 + two * k2.0 + two * k3.0 + k4.0),
            p.1 + h / six * (k1.1 + two * k2.1 + two * k3.1 + k4.1),
        ))
    }
}

/// Point where the segment `p -> q` leaves the rectangle.
fn clip<T: Scalar>(region: &SampleRegion<T>, p: (T, T), q: (T, T)) -> (T, T) {
    let mut t = T::one();
    let mut shrink = |from: T, to: T, lo: T, hi: T| {
        if to < lo && to != from {
            t = t.min((lo - from) / (to - from));
        }
        if to > hi && to != from {
            t = t.min((hi - from) / (to - from));
        }
    };
    shrink(p.0, q.0, region.x.0, region.x.1);
    shrink(p.1, q.1, region.y.0, region.y.1);
    let t = t.max(T::zero());
    (p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1))
}

struct Branch<T> {
    points: Vec<(T, T)>,
    truncated: bool,
    closed: bool,
}

fn march<T: Scalar>(field: &Field<T>, seed: (T, T), h: T, max_steps: usize) -> Branch<T> {
    let mut points = Vec::new();
    let mut p = seed;
    let mut traveled = T::zero();
    for _ in 0..max_steps {
        let Some(q) = field.rk4(p, h) else {
            return Branch { points, truncated: true, closed: false };
        };
        if !field.region.contains(q) {
            points.push(clip(field.region, p, q));
            return Branch { points, truncated: false, closed: false };
        }
        traveled = traveled + h.abs();
        points.push(q);
        p = q;
        let back = (q.0 - seed.0).hypot(q.1 - seed.1);
        if traveled > T::of(10.0) * h.abs() && back < h.abs() {
            points.push(seed);
            return Branch { points, truncated: false, closed: true };
        }
    }
    Branch { points, truncated: true, closed: false }
}

fn defect<T: Scalar>(field: &Field<T>, points: &[(T, T)]) -> T {
    let two = T::of(2.0);
    let mut worst = T::zero();
    for w in points.windows(2) {
        let c = (w[1].0 - w[0].0, w[1].1 - w[0].1);
        let n = c.0.hypot(c.1);
        if n <= T::epsilon() {
            continue;
        }
        let mid = ((w[0].0 + w[1].0) / two, (w[0].1 + w[1].1) / two);
        if let Some(t) = field.unit(mid) {
            worst = worst.max((c.0 * t.1 - c.1 * t.0).abs() / n);
        }
    }
    worst
}

fn drift<T: Scalar>(region: &SampleRegion<T>, phi: &Expr, seed: (T, T), points: &[(T, T)]) -> Option<T> {
    let v0 = region.eval(phi, seed).ok()?;
    let mut worst = T::zero();
    for &p in points {
        if let Ok(v) = region.eval(phi, p) {
            worst = worst.max((v - v0).abs() / (T::one() + v0.abs()));
        }
    }
    Some(worst)
}

/// Traces the integral curve of `(alpha, beta)` through each seed in both
/// directions until it leaves the region, closes on itself, or stalls.
pub fn trace_curves<T: Scalar>(
    ode: &CharacteristicOde,
    seeds: &[(T, T)],
    region: &SampleRegion<T>,
    h: T,
    invariant: Option<&Expr>,
) -> Result<Vec<Curve<T>>, TraceError> {
    if !(h > T::zero()) {
        return Err(TraceError::Step);
    }
    let field = Field {
        alpha: &ode.alpha,
        beta: &ode.beta,
        region,
    };
    let span = (region.x.1 - region.x.0) + (region.y.1 - region.y.0);
    let max_steps = ((T::of(20.0) * span / h).to_usize().unwrap_or(usize::MAX)).clamp(100, 200_000);
    let mut out = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        if !region.contains(seed) {
            return Err(TraceError::Seed(seed.0.as_f64(), seed.1.as_f64()));
        }
        let fwd = march(&field, seed, h, max_steps);
        let (mut points, truncated, closed) = if fwd.closed {
            let mut pts = vec![seed];
            pts.extend(fwd.points);
            (pts, fwd.truncated, true)
        } else {
            let bwd = march(&field, seed, -h, max_steps);
            let mut pts: Vec<_> = bwd.points.into_iter().rev().collect();
            pts.push(seed);
            pts.extend(fwd.points);
            (pts, fwd.truncated || bwd.truncated, bwd.closed)
        };
        points.dedup();
        out.push(Curve {
            seed,
            h,
            truncated,
            closed,
            drift: invariant.and_then(|phi| drift(region, phi, seed, &points)),
            defect: defect(&field, &points),
            points,
        });
    }
    Ok(out)
}
