//! Energy ledger, identity audits and the decay report.

mod audit;
mod decay;

pub use audit::{
    audit_equipartition, audit_remainder_split, audit_multiplier_identity, audit_pohozaev, audit_remainder, audit_run,
    dissipation_check, AuditContext, AuditSamples, AuditSuite, DissipationCheck, SampleIntegrals,
};
pub use decay::{decay_report, log_linear_rate, DecayReport, Inequality};

use serde::{Deserialize, Serialize};

use crate::dynamics::{Dynamics, Model, RhsEval};
use crate::elliptic::{PotentialField, SurfaceState, TraceSet};
use crate::error::Result;
use crate::grid::{GridFunction1D, SimGrid, TankGeometry};
use crate::multipliers::derived_multipliers;
use crate::quadrature::trapezoid_1d;

/// Per-sample energy ledger.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// Total energy `KE + PE`.
    pub h: f64,
    /// `1/2 int psi G psi`.
    pub ke: f64,
    /// `g/2 int eta^2`.
    pub pe: f64,
    /// `int Theta`, `Theta = -eta psi_t - g eta^2 / 2`.
    pub theta_int: f64,
    /// Bottom and wall boundary functional of the Pohozaev identity.
    pub sigma: f64,
    /// `int (h/2 + rho/2) phi_x^2(-h) + (L/2) int phi_y^2(L, y) dy`; NaN without a beach.
    pub q_integrand: f64,
    /// `int dP Vbar`.
    pub damping_power: f64,
    /// `int zeta psi`; NaN without a beach.
    pub boundary_b: f64,
    pub max_eta: f64,
}

/// `(H, KE, PE)` by the trapezoid rule.
pub fn energy(state: &SurfaceState, traces: &TraceSet, geo: &TankGeometry) -> (f64, f64, f64) {
    let dx = geo.length / (state.eta.len() - 1) as f64;
    let kd: Vec<f64> = state.psi.iter().zip(traces.gpsi.iter()).map(|(p, g)| 0.5 * p * g).collect();
    let pd: Vec<f64> = state.eta.iter().map(|e| 0.5 * geo.gravity * e * e).collect();
    let ke = trapezoid_1d(&kd, dx);
    let pe = trapezoid_1d(&pd, dx);
    (ke + pe, ke, pe)
}

/// Kinetic energy in volume form `1/2 int int |grad phi|^2`.
pub fn kinetic_volume(field: &PotentialField, state: &SurfaceState, geo: &TankGeometry, grid: &SimGrid) -> Result<f64> {
    let sq = field.phi_x.zip_map(&field.phi_y, |a, b| 0.5 * (a * a + b * b));
    crate::quadrature::volume_integral(&sq, &state.eta, geo, grid)
}

/// `Theta = -eta psi_t - g eta^2 / 2`.
pub fn theta(state: &SurfaceState, dpsi_dt: &[f64], gravity: f64) -> GridFunction1D {
    state
        .eta
        .iter()
        .zip(dpsi_dt)
        .map(|(e, p)| -e * p - 0.5 * gravity * e * e)
        .collect()
}

/// One identity: `lhs = rhs` with named contributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub relative_residual: f64,
    pub per_term_breakdown: Vec<NamedValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

impl IdentityReport {
    /// Builds the report; residuals are normalized by `max(|lhs|, |rhs|, scale)`.
    pub fn new(name: &str, lhs: f64, rhs: f64, scale: f64, terms: &[(&str, f64)]) -> Self {
        let residual = lhs - rhs;
        let denom = lhs.abs().max(rhs.abs()).max(scale.abs());
        let relative_residual = if denom > 0.0 { residual.abs() / denom } else { 0.0 };
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            residual,
            relative_residual,
            per_term_breakdown: terms
                .iter()
                .map(|(n, v)| NamedValue {
                    name: n.to_string(),
                    value: *v,
                })
                .collect(),
        }
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.per_term_breakdown.iter().find(|t| t.name == name).map(|t| t.value)
    }
}

/// Energy ledger for `state`, reusing the first RK stage.
pub fn record_for(dynamics: &Dynamics, state: &SurfaceState, k1: &RhsEval, t: f64) -> Result<DiagnosticsRecord> {
    let cfg = dynamics.config();
    let geo = &cfg.geo;
    let grid = &cfg.grid;
    let dx = grid.dx(geo);
    let (h, ke, pe) = energy(state, &k1.traces, geo);
    let th = theta(state, &k1.dpsi, geo.gravity);
    let field = match (&k1.solution, cfg.model) {
        (Some(sol), _) => dynamics.solver().field(sol),
        (None, Model::LinearTank) | (None, Model::Nonlinear) => {
            let flat = SurfaceState::new(GridFunction1D::zeros(state.eta.len()), state.psi.clone());
            let sol = dynamics.solver().solve(&flat, None)?;
            dynamics.solver().field(&sol)
        }
    };
    let view = FieldView::new(&field, state, geo, grid);
    let sigma = view.sigma();
    let (q_integrand, boundary_b) = match dynamics.beach() {
        Some(beach) => {
            let d = derived_multipliers(dynamics.spectrum(), state, beach, geo);
            let bottom: Vec<f64> = (0..view.n)
                .map(|i| (0.5 * geo.depth + 0.5 * d.rho[i]) * view.bottom_u(i).powi(2))
                .collect();
            let zp: Vec<f64> = d.zeta.iter().zip(state.psi.iter()).map(|(a, b)| a * b).collect();
            (trapezoid_1d(&bottom, dx) + view.wall_term(), trapezoid_1d(&zp, dx))
        }
        None => (f64::NAN, f64::NAN),
    };
    Ok(DiagnosticsRecord {
        t,
        h,
        ke,
        pe,
        theta_int: trapezoid_1d(&th, dx),
        sigma,
        q_integrand,
        damping_power: crate::damping::damping_power(&k1.pressure.dp, &k1.traces.vbar, dx),
        boundary_b,
        max_eta: state.eta.max_abs(),
    })
}

/// Read-only access to a velocity field with the quadrature weights.
pub(crate) struct FieldView<'a> {
    pub field: &'a PotentialField,
    pub n: usize,
    pub ny: usize,
    pub wx: Vec<f64>,
    pub ws: Vec<f64>,
    pub depth: Vec<f64>,
    pub h: f64,
    pub length: f64,
}

impl<'a> FieldView<'a> {
    pub fn new(field: &'a PotentialField, state: &SurfaceState, geo: &TankGeometry, grid: &SimGrid) -> Self {
        Self {
            field,
            n: grid.nodes_x(),
            ny: grid.ny,
            wx: grid.x_weights(geo),
            ws: grid.s_weights(),
            depth: state.eta.iter().map(|e| geo.depth + e).collect(),
            h: geo.depth,
            length: geo.length,
        }
    }

    /// `phi_x` on the bottom.
    pub fn bottom_u(&self, i: usize) -> f64 {
        self.field.phi_x.get(i, 0)
    }

    /// `y` of node `(i, j)`.
    pub fn y(&self, i: usize, j: usize) -> f64 {
        -self.h + (j as f64 / self.ny as f64) * self.depth[i]
    }

    /// `int int f(i, j, y, u, v) dy dx` with `u = phi_x`, `v = phi_y`.
    pub fn volume(&self, f: impl Fn(usize, f64, f64, f64) -> f64) -> f64 {
        let mut total = 0.0;
        for i in 0..self.n {
            let mut col = 0.0;
            for j in 0..=self.ny {
                let u = self.field.phi_x.get(i, j);
                let v = self.field.phi_y.get(i, j);
                col += self.ws[j] * f(i, self.y(i, j), u, v);
            }
            total += self.wx[i] * self.depth[i] * col;
        }
        total
    }

    /// `int f(i) phi_x^2(x, -h) dx`.
    pub fn bottom(&self, f: impl Fn(usize) -> f64) -> f64 {
        (0..self.n).map(|i| self.wx[i] * f(i) * self.bottom_u(i).powi(2)).sum()
    }

    /// `(L/2) int phi_y^2(L, y) dy`.
    pub fn wall_term(&self) -> f64 {
        let i = self.n - 1;
        let col: f64 = (0..=self.ny).map(|j| self.ws[j] * self.field.phi_y.get(i, j).powi(2)).sum();
        0.5 * self.length * self.depth[i] * col
    }

    /// Pohozaev boundary functional.
    pub fn sigma(&self) -> f64 {
        0.5 * self.h * self.bottom(|_| 1.0) + self.wall_term()
    }
}
