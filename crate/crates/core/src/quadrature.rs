//! Composite trapezoid rules in `x`, on the mapped rectangle and in time.

use crate::error::{Error, Result};
use crate::grid::{GridFunction2D, SimGrid, TankGeometry};

/// Composite trapezoid rule on uniform nodes.
pub fn trapezoid_1d(f: &[f64], dx: f64) -> f64 {
    let n = f.len();
    match n {
        0 | 1 => 0.0,
        _ => {
            let inner: f64 = f[1..n - 1].iter().sum();
            dx * (inner + 0.5 * (f[0] + f[n - 1]))
        }
    }
}

/// Trapezoid rule on arbitrary increasing abscissae.
pub fn trapezoid_nonuniform(t: &[f64], f: &[f64]) -> f64 {
    debug_assert_eq!(t.len(), f.len());
    t.windows(2)
        .zip(f.windows(2))
        .map(|(t, f)| 0.5 * (t[1] - t[0]) * (f[0] + f[1]))
        .sum()
}

/// Running trapezoid integral `F_i = int_0^{x_i} f`, with `F_0 = 0`.
pub fn cumulative_trapezoid(f: &[f64], dx: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(f.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in f.windows(2) {
        acc += 0.5 * dx * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Rejects surfaces whose mapped depth `h + eta` drops to `h / 4` or below.
pub fn check_depth(eta: &[f64], geo: &TankGeometry) -> Result<()> {
    let min_depth = eta.iter().fold(f64::INFINITY, |m, &e| m.min(geo.depth + e));
    let limit = 0.25 * geo.depth;
    if !(min_depth > limit) {
        return Err(Error::DegenerateDepth { min_depth, limit });
    }
    Ok(())
}

/// `int int_{Omega} f dy dx`, evaluated as `int_0^L int_0^1 f (h + eta) ds dx`
/// with the tensor-product trapezoid rule.
pub fn volume_integral(
    f: &GridFunction2D,
    eta: &[f64],
    geo: &TankGeometry,
    grid: &SimGrid,
) -> Result<f64> {
    if f.nodes_x() != grid.nodes_x() || f.levels() != grid.levels() || eta.len() != grid.nodes_x() {
        return Err(Error::ShapeMismatch(format!(
            "field {}x{}, eta {}, grid {}x{}",
            f.nodes_x(),
            f.levels(),
            eta.len(),
            grid.nodes_x(),
            grid.levels()
        )));
    }
    check_depth(eta, geo)?;
    let ws = grid.s_weights();
    let wx = grid.x_weights(geo);
    let mut total = 0.0;
    for (j, &w) in ws.iter().enumerate() {
        let level = f.level(j);
        let row: f64 = level
            .iter()
            .zip(eta)
            .zip(&wx)
            .map(|((v, e), wx)| wx * v * (geo.depth + e))
            .sum();
        total += w * row;
    }
    Ok(total)
}
