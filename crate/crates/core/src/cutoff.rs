//! Smooth monotone transitions from 0 to 1.
//!
//! The blend is `chi(t) = e^{-1/t} / (e^{-1/t} + e^{-1/(1-t)})` on `t in (0, 1)`,
//! written as `1 / (1 + e^q)` with `q = 1/t - 1/(1-t)` so that it never
//! overflows. Derivatives are closed-form.

use crate::error::{Error, Result};
use crate::grid::{GridFunction1D, SimGrid, TankGeometry};

/// `C^infinity` step from 0 (left of `x0`) to 1 (right of `x1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothStep {
    x0: f64,
    x1: f64,
}

impl SmoothStep {
    pub fn new(x0: f64, x1: f64) -> Result<Self> {
        if !(x0.is_finite() && x1.is_finite() && x0 < x1) {
            return Err(Error::BadInterval { x0, x1 });
        }
        Ok(Self { x0, x1 })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }

    /// Value, first and second derivative at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let w = self.x1 - self.x0;
        let t = (x - self.x0) / w;
        let (c, d1, d2) = unit_step(t);
        (c, d1 / w, d2 / (w * w))
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    /// Largest slope, attained at the midpoint by symmetry.
    pub fn max_slope(&self) -> f64 {
        self.eval(0.5 * (self.x0 + self.x1)).1
    }
}

/// The blend on the unit interval with its first two derivatives in `t`.
fn unit_step(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let u = 1.0 - t;
    let q = 1.0 / t - 1.0 / u;
    let dq = -1.0 / (t * t) - 1.0 / (u * u);
    let ddq = 2.0 / (t * t * t) - 2.0 / (u * u * u);
    // chi = 1/(1+e^q) and chi(1-chi) = 1/(e^{q/2}+e^{-q/2})^2, both without overflow.
    let c = if q > 0.0 {
        let e = (-q).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + q.exp())
    };
    let bell = c * (1.0 - c);
    if bell == 0.0 {
        return (c, 0.0, 0.0);
    }
    let d1 = -bell * dq;
    let d2 = -((1.0 - 2.0 * c) * d1 * dq + bell * ddq);
    (c, d1, d2)
}

/// Samples the step from 0 at `x0` to 1 at `x1` on the tank nodes.
pub fn smooth_cutoff(geo: &TankGeometry, grid: &SimGrid, x0: f64, x1: f64) -> Result<GridFunction1D> {
    if !(0.0 <= x0 && x1 <= geo.length * (1.0 + 1e-14)) {
        return Err(Error::BadInterval { x0, x1 });
    }
    let step = SmoothStep::new(x0, x1)?;
    Ok(GridFunction1D::from_fn(grid, geo, |x| step.value(x)))
}
