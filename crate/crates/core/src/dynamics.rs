//! Time integration of the surface system
//! `eta_t = G(eta) psi`, `psi_t = -g eta - N(eta) psi - P`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::damping::{
    pressure_experimental_dtn, pressure_from_vbar, vbar_from_flux, DampingLaw,
    PressureField,
};
use crate::diagnostics::{record_for, DiagnosticsRecord};
use crate::elliptic::{flat_dtn_with, EllipticSolution, EllipticSolver, SurfaceState, TraceSet};
use crate::error::{Error, Result};
use crate::grid::{GridFunction1D, GridFunction2D, SimGrid, TankGeometry};
use crate::multipliers::BeachProfile;
use crate::quadrature::trapezoid_1d;
use crate::spectral::{CosineSpectrum, Parity};

/// Which equations are advanced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// Full potential flow under the moving surface.
    #[default]
    Nonlinear,
    /// Flat-surface operator `k tanh(kh)`, no `N(eta) psi`.
    LinearTank,
}

/// One cosine mode `amplitude * cos(n pi x / L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CosineMode {
    pub n: usize,
    pub amplitude: f64,
}

/// Gaussian hump `amplitude * exp(-((x - center)/width)^2)`, shifted to zero mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianBump {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

/// Initial surface and potential.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct InitialCondition {
    #[serde(default)]
    pub eta_modes: Vec<CosineMode>,
    #[serde(default)]
    pub psi_modes: Vec<CosineMode>,
    #[serde(default)]
    pub bump: Option<GaussianBump>,
}

impl InitialCondition {
    pub fn single_mode(n: usize, amplitude: f64) -> Self {
        Self {
            eta_modes: vec![CosineMode { n, amplitude }],
            ..Self::default()
        }
    }

    pub fn build(&self, geo: &TankGeometry, grid: &SimGrid) -> Result<SurfaceState> {
        let sum = |modes: &[CosineMode]| {
            GridFunction1D::from_fn(grid, geo, |x| {
                modes
                    .iter()
                    .map(|m| m.amplitude * (m.n as f64 * PI * x / geo.length).cos())
                    .sum()
            })
        };
        for m in self.eta_modes.iter().chain(&self.psi_modes) {
            if m.n > grid.nx / 2 {
                return Err(Error::InvalidConfig(format!(
                    "mode {} is not resolved by nx = {}",
                    m.n, grid.nx
                )));
            }
        }
        let mut eta = sum(&self.eta_modes);
        // Mode 0 of eta would violate the zero-mean constraint.
        if self.eta_modes.iter().any(|m| m.n == 0 && m.amplitude != 0.0) {
            return Err(Error::InvalidConfig("eta cannot carry mode 0".into()));
        }
        let psi = sum(&self.psi_modes);
        if let Some(b) = self.bump {
            if !(b.width > 0.0) {
                return Err(Error::InvalidConfig("bump width must be positive".into()));
            }
            let hump = GridFunction1D::from_fn(grid, geo, |x| b.amplitude * (-((x - b.center) / b.width).powi(2)).exp());
            let mean = trapezoid_1d(&hump, grid.dx(geo)) / geo.length;
            for (e, v) in eta.iter_mut().zip(hump.iter()) {
                *e += v - mean;
            }
        }
        let state = SurfaceState::new(eta, psi);
        state.validate(geo, grid)?;
        Ok(state)
    }
}

/// Exponential filter `exp(-alpha (k / k_max)^order)` applied to `eta` and
/// `psi` after every step. It removes the sawtooth growth of the modes next
/// to Nyquist and leaves resolved modes untouched to roundoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpFilter {
    pub alpha: f64,
    pub order: u32,
}

impl Default for ExpFilter {
    fn default() -> Self {
        Self { alpha: 36.0, order: 36 }
    }
}

impl ExpFilter {
    pub fn factor(&self, k_over_kmax: f64) -> f64 {
        (-self.alpha * k_over_kmax.powi(self.order as i32)).exp()
    }
}

/// Everything needed to run one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub geo: TankGeometry,
    pub grid: SimGrid,
    /// Beach length `delta`; needed for damping and for the audits.
    pub beach_delta: Option<f64>,
    pub dt: f64,
    pub t_final: f64,
    pub model: Model,
    pub damping: DampingLaw,
    pub ic: InitialCondition,
    pub sample_stride: usize,
    /// `None` runs the unfiltered scheme.
    #[serde(default)]
    pub filter: Option<ExpFilter>,
}

impl SimConfig {
    /// Largest step allowed by `dt * omega(k_max) <= 1`.
    pub fn max_stable_dt(geo: &TankGeometry, grid: &SimGrid) -> f64 {
        1.0 / geo.omega(grid.max_wavenumber(geo))
    }

    pub fn validate(&self) -> Result<()> {
        self.geo.validate()?;
        self.grid.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("time.dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "time.t_final must be nonnegative, got {}",
                self.t_final
            )));
        }
        let limit = Self::max_stable_dt(&self.geo, &self.grid);
        if self.dt > limit * (1.0 + 1e-12) {
            return Err(Error::InvalidConfig(format!(
                "time.dt = {} exceeds the dispersion limit 1/omega(k_max) = {limit:.6}",
                self.dt
            )));
        }
        if let Some(f) = self.filter {
            if !(f.alpha >= 0.0 && f.alpha.is_finite()) || f.order == 0 {
                return Err(Error::InvalidConfig(format!(
                    "filter needs alpha >= 0 and order >= 1, got {} and {}",
                    f.alpha, f.order
                )));
            }
        }
        if self.sample_stride == 0 {
            return Err(Error::InvalidConfig("time.sample_stride must be at least 1".into()));
        }
        if self.damping != DampingLaw::Off && self.beach_delta.is_none() {
            return Err(Error::InvalidConfig("damping needs beach.delta".into()));
        }
        if self.damping == DampingLaw::ExperimentalDtn && self.model != Model::LinearTank {
            return Err(Error::InvalidConfig(
                "the experimental pressure law is only available with the linear tank model".into(),
            ));
        }
        Ok(())
    }

    /// Step count and the effective step: `t_final` is reached exactly with a
    /// step no longer than `dt`.
    pub fn steps(&self) -> (usize, f64) {
        if self.t_final == 0.0 {
            return (0, self.dt);
        }
        let n = (self.t_final / self.dt - 1e-9).ceil().max(1.0) as usize;
        (n, self.t_final / n as f64)
    }
}

/// Time derivatives and the by-products of one right-hand-side evaluation.
#[derive(Debug, Clone)]
pub struct RhsEval {
    pub deta: GridFunction1D,
    pub dpsi: GridFunction1D,
    pub traces: TraceSet,
    pub pressure: PressureField,
    /// Elliptic solution for the nonlinear model.
    pub solution: Option<EllipticSolution>,
}

/// Integrator state shared across steps: solver, beach and a warm start.
#[derive(Debug, Clone)]
pub struct Dynamics {
    cfg: SimConfig,
    solver: EllipticSolver,
    beach: Option<BeachProfile>,
    guess: Option<GridFunction2D>,
}

impl Dynamics {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let solver = EllipticSolver::new(&cfg.geo, &cfg.grid)?;
        let beach = cfg
            .beach_delta
            .map(|d| BeachProfile::build(&cfg.geo, &cfg.grid, d))
            .transpose()?;
        Ok(Self {
            cfg: cfg.clone(),
            solver,
            beach,
            guess: None,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn solver(&self) -> &EllipticSolver {
        &self.solver
    }

    pub fn spectrum(&self) -> &CosineSpectrum {
        self.solver.spectrum()
    }

    pub fn beach(&self) -> Option<&BeachProfile> {
        self.beach.as_ref()
    }

    fn pressure(&self, traces: &TraceSet) -> Result<PressureField> {
        let n = self.cfg.grid.nodes_x();
        let beach = match (&self.beach, self.cfg.damping) {
            (_, DampingLaw::Off) | (None, _) => return Ok(PressureField::zeros(n)),
            (Some(b), _) => b,
        };
        match self.cfg.damping {
            DampingLaw::Off => unreachable!(),
            DampingLaw::DepthIntegrated => pressure_from_vbar(self.spectrum(), traces, beach),
            DampingLaw::ExperimentalDtn => Ok(pressure_experimental_dtn(
                self.spectrum(),
                &traces.gpsi,
                beach,
                self.cfg.grid.dx(&self.cfg.geo),
                self.cfg.geo.length,
            )),
        }
    }

    /// Flat-surface traces: `G = k tanh(kh)`, `Vbar = -int_0^x G`.
    pub fn linear_traces(&self, state: &SurfaceState) -> Result<TraceSet> {
        let sp = self.spectrum();
        let gpsi = flat_dtn_with(sp, &state.psi, &self.cfg.geo);
        let vbar = vbar_from_flux(sp, &gpsi)?;
        let psi_x = sp.derivative(&state.psi, Parity::Even);
        let eta_x = sp.derivative(&state.eta, Parity::Even);
        let n = gpsi.len();
        Ok(TraceSet {
            v: psi_x.clone(),
            b: gpsi.clone(),
            npsi: GridFunction1D::zeros(n),
            dk_deta: GridFunction1D::zeros(n),
            gpsi,
            vbar,
            eta_x,
            psi_x,
        })
    }

    /// Right-hand side at `state`.
    pub fn rhs(&mut self, state: &SurfaceState) -> Result<RhsEval> {
        let g = self.cfg.geo.gravity;
        let (traces, solution) = match self.cfg.model {
            Model::Nonlinear => {
                let sol = self.solver.solve(state, self.guess.as_ref())?;
                let tr = self.solver.traces(&sol, state);
                self.guess = Some(sol.phi.clone());
                (tr, Some(sol))
            }
            Model::LinearTank => {
                state.validate(&self.cfg.geo, &self.cfg.grid)?;
                (self.linear_traces(state)?, None)
            }
        };
        let pressure = self.pressure(&traces)?;
        let deta = traces.gpsi.clone();
        let dpsi: GridFunction1D = (0..deta.len())
            .map(|i| -g * state.eta[i] - traces.dk_deta[i] - pressure.p[i])
            .collect();
        Ok(RhsEval {
            deta,
            dpsi,
            traces,
            pressure,
            solution,
        })
    }

    /// One classical RK4 step whose first stage is `k1`, followed by the
    /// zero-mean projection of `eta` and the blow-up check.
    pub fn step_from(&mut self, state: &SurfaceState, k1: &RhsEval, dt: f64, t: f64) -> Result<SurfaceState> {
        let stage = |s: &SurfaceState, k: &RhsEval, a: f64| SurfaceState {
            eta: s.eta.axpy(a, &k.deta),
            psi: s.psi.axpy(a, &k.dpsi),
        };
        let at = |e: Error, tt: f64| Error::AtTime { t: tt, source: Box::new(e) };
        let k2 = self.rhs(&stage(state, k1, 0.5 * dt)).map_err(|e| at(e, t + 0.5 * dt))?;
        let k3 = self.rhs(&stage(state, &k2, 0.5 * dt)).map_err(|e| at(e, t + 0.5 * dt))?;
        let k4 = self.rhs(&stage(state, &k3, dt)).map_err(|e| at(e, t + dt))?;
        let n = state.eta.len();
        let mut eta = GridFunction1D::zeros(n);
        let mut psi = GridFunction1D::zeros(n);
        for i in 0..n {
            eta[i] = state.eta[i] + dt / 6.0 * (k1.deta[i] + 2.0 * k2.deta[i] + 2.0 * k3.deta[i] + k4.deta[i]);
            psi[i] = state.psi[i] + dt / 6.0 * (k1.dpsi[i] + 2.0 * k2.dpsi[i] + 2.0 * k3.dpsi[i] + k4.dpsi[i]);
        }
        if let Some(f) = self.cfg.filter {
            let k_max = self.cfg.grid.max_wavenumber(&self.cfg.geo);
            eta = self.spectrum().even_multiplier(&eta, |k| f.factor(k / k_max));
            psi = self.spectrum().even_multiplier(&psi, |k| f.factor(k / k_max));
        }
        let mean = trapezoid_1d(&eta, self.cfg.grid.dx(&self.cfg.geo)) / self.cfg.geo.length;
        for e in eta.iter_mut() {
            *e -= mean;
        }
        let next = SurfaceState { eta, psi };
        next.eta.check_finite("eta").map_err(|e| at(e, t + dt))?;
        next.psi.check_finite("psi").map_err(|e| at(e, t + dt))?;
        let max_eta = next.eta.max_abs();
        if max_eta > 0.5 * self.cfg.geo.depth {
            return Err(Error::BlowUp { t: t + dt, max_eta });
        }
        Ok(next)
    }

    /// One RK4 step from `state`.
    pub fn step_rk4(&mut self, state: &SurfaceState, dt: f64, t: f64) -> Result<SurfaceState> {
        let k1 = self.rhs(state).map_err(|e| Error::AtTime { t, source: Box::new(e) })?;
        self.step_from(state, &k1, dt, t)
    }
}

/// Stored samples of one run.
#[derive(Debug, Clone)]
pub struct RunHistory {
    pub config: SimConfig,
    /// Step actually used.
    pub dt: f64,
    pub times: Vec<f64>,
    pub states: Vec<SurfaceState>,
    pub pressures: Vec<PressureField>,
    pub records: Vec<DiagnosticsRecord>,
}

impl RunHistory {
    pub fn h0(&self) -> f64 {
        self.records.first().map_or(0.0, |r| r.h)
    }
}

/// Runs `cfg` to `t_final`, sampling every `sample_stride` steps and always
/// at the final time.
pub fn simulate(cfg: &SimConfig) -> Result<RunHistory> {
    simulate_observed(cfg, |_, _, _, _| Ok(()))
}

/// [`simulate`], calling `observe(step, t, state, rhs)` on every step before
/// it is advanced.
pub fn simulate_observed(
    cfg: &SimConfig,
    mut observe: impl FnMut(usize, f64, &SurfaceState, &RhsEval) -> Result<()>,
) -> Result<RunHistory> {
    let mut dynamics = Dynamics::new(cfg)?;
    let (steps, dt) = cfg.steps();
    let mut state = cfg.ic.build(&cfg.geo, &cfg.grid)?;
    let mut history = RunHistory {
        config: cfg.clone(),
        dt,
        times: Vec::new(),
        states: Vec::new(),
        pressures: Vec::new(),
        records: Vec::new(),
    };
    for k in 0..=steps {
        let t = k as f64 * dt;
        let k1 = dynamics.rhs(&state).map_err(|e| Error::AtTime { t, source: Box::new(e) })?;
        observe(k, t, &state, &k1)?;
        if k % cfg.sample_stride == 0 || k == steps {
            let rec = record_for(&dynamics, &state, &k1, t)?;
            history.times.push(t);
            history.states.push(state.clone());
            history.pressures.push(k1.pressure.clone());
            history.records.push(rec);
        }
        if k == steps {
            break;
        }
        state = dynamics.step_from(&state, &k1, dt, t)?;
    }
    Ok(history)
}
