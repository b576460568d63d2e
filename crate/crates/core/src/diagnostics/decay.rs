//! Measured decay against the quantitative estimate.

use serde::{Deserialize, Serialize};

use super::AuditSamples;
use crate::damping::DampingBudget;
use crate::dynamics::RunHistory;
use crate::error::{Error, Result};
use crate::multipliers::{decay_constants, DecayConstants};

/// Two sides of one inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl Inequality {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            holds: lhs <= rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub t_final: f64,
    pub h0: f64,
    pub h_final: f64,
    pub constants: DecayConstants,
    /// `(1/2 - c - alpha) T H(T)` against the constant bound times `H(0)`.
    pub final_energy_bound: Inequality,
    /// `(1/2 - c) int H` against pressure work, boundary and observation.
    pub integrated_bound: Inequality,
    /// `|[int zeta psi]|` against `2 sqrt(2/g) N_1 H(0)`.
    pub boundary_bound: Inequality,
    pub budget: DampingBudget,
    /// Log-linear fit `H ~ exp(-r t)` over `[T/2, T]`.
    pub rate_second_half: f64,
    /// Fits over `[T/2, 3T/4]` and `[3T/4, T]`.
    pub rate_windows: [f64; 2],
    pub window: f64,
    /// `H((k+1) T') / H(k T')`.
    pub window_ratios: Vec<f64>,
    /// Largest window ratio.
    pub contraction: f64,
}

/// Slope of `-ln H` by least squares over `t in [a, b]`.
pub fn log_linear_rate(times: &[f64], h: &[f64], a: f64, b: f64) -> f64 {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(h)
        .filter(|(t, v)| **t >= a - 1e-12 && **t <= b + 1e-12 && **v > 0.0)
        .map(|(t, v)| (*t, v.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    -sxy / sxx
}

/// Energy at time `t` by linear interpolation between samples.
fn energy_at(times: &[f64], h: &[f64], t: f64) -> f64 {
    let k = times.partition_point(|s| *s < t);
    if k == 0 {
        return h[0];
    }
    if k >= times.len() {
        return h[times.len() - 1];
    }
    let (t0, t1) = (times[k - 1], times[k]);
    let w = if t1 > t0 { (t - t0) / (t1 - t0) } else { 1.0 };
    h[k - 1] * (1.0 - w) + h[k] * w
}

/// Builds the decay report. `alpha` defaults to `(1/2 - c)/2`; `windows`
/// is the number of windows `T' = T / windows` for the contraction ratios.
pub fn decay_report(
    samples: &AuditSamples,
    history: &RunHistory,
    alpha: Option<f64>,
    windows: usize,
) -> Result<DecayReport> {
    let ctx = &samples.context;
    let h0 = samples.h0();
    if !(h0 > 0.0) {
        return Err(Error::ZeroEnergy);
    }
    if windows == 0 {
        return Err(Error::InvalidConfig("decay windows must be positive".into()));
    }
    let geo = &ctx.geo;
    let times = samples.times();
    let h: Vec<f64> = samples.samples.iter().map(|s| s.h).collect();
    let t_final = *times.last().unwrap_or(&0.0);
    let h_final = *h.last().unwrap_or(&0.0);

    let probe = decay_constants(&history.states, &ctx.beach, geo, &ctx.grid, h0, 0.0)?;
    let alpha = alpha.unwrap_or_else(|| {
        if probe.c < 0.5 {
            0.5 * (0.5 - probe.c)
        } else {
            0.25
        }
    });
    let constants = DecayConstants { alpha, ..probe };

    let g = geo.gravity;
    let boundary_factor = 2.0 * (2.0 / g).sqrt();
    let k_bound = constants.cm.powi(2) / (2.0 * alpha * g)
        + t_final.sqrt() * constants.n2t
        + boundary_factor * constants.n1t;
    let final_energy_bound = Inequality::new((0.5 - constants.c - alpha) * t_final * h_final, k_bound * h0);

    let int_h = samples.integral(|s| s.h);
    let work = -samples.integral(|s| s.p_zeta);
    let boundary = -samples.jump(|s| s.zeta_psi);
    let obs = samples.integral(|s| s.observation);
    let integrated_bound = Inequality::new((0.5 - constants.c) * int_h, work + boundary + obs);
    let boundary_bound = Inequality::new(boundary.abs(), boundary_factor * constants.n1t * h0);

    let dx = ctx.grid.dx(geo);
    let budget = crate::damping::cumulative_damping_bound(&times, &samples.dp_history, dx, ctx.beach.sup_chi(), h0)?;

    let window = t_final / windows as f64;
    let marks: Vec<f64> = (0..=windows).map(|k| energy_at(&times, &h, k as f64 * window)).collect();
    let window_ratios: Vec<f64> = marks.windows(2).map(|w| w[1] / w[0]).collect();
    let contraction = window_ratios.iter().fold(f64::NEG_INFINITY, |m, r| m.max(*r));

    Ok(DecayReport {
        t_final,
        h0,
        h_final,
        constants,
        final_energy_bound,
        integrated_bound,
        boundary_bound,
        budget,
        rate_second_half: log_linear_rate(&times, &h, 0.5 * t_final, t_final),
        rate_windows: [
            log_linear_rate(&times, &h, 0.5 * t_final, 0.75 * t_final),
            log_linear_rate(&times, &h, 0.75 * t_final, t_final),
        ],
        window,
        window_ratios,
        contraction,
    })
}
