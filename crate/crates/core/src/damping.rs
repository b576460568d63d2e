//! Pneumatic pressure on the beach.
//!
//! The pressure slope is `dP = chi Vbar`, with `P` the primitive of zero mean.
//! Since `dH/dt = -int dP Vbar`, this law only removes energy.

use serde::{Deserialize, Serialize};

use crate::elliptic::TraceSet;
use crate::error::{Error, Result};
use crate::grid::GridFunction1D;
use crate::multipliers::BeachProfile;
use crate::quadrature::{cumulative_trapezoid, trapezoid_1d, trapezoid_nonuniform};
use crate::spectral::{CosineSpectrum, Parity};

/// How the surface pressure is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DampingLaw {
    /// No pressure.
    #[default]
    Off,
    /// `d_x P = chi Vbar`.
    DepthIntegrated,
    /// `P = chi G(eta) psi`. Only accepted together with the linear tank model.
    ExperimentalDtn,
}

/// External pressure `P` and its slope `dP`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PressureField {
    pub p: GridFunction1D,
    pub dp: GridFunction1D,
}

impl PressureField {
    pub fn zeros(n: usize) -> Self {
        Self {
            p: GridFunction1D::zeros(n),
            dp: GridFunction1D::zeros(n),
        }
    }

    fn from_slope(spectrum: &CosineSpectrum, dp: GridFunction1D) -> Result<Self> {
        let p = spectrum.antiderivative(&dp, Parity::Odd)?;
        Ok(Self { p, dp })
    }
}

/// `dP = chi Vbar`, `P` its mean-zero primitive.
pub fn pressure_from_vbar(
    spectrum: &CosineSpectrum,
    traces: &TraceSet,
    beach: &BeachProfile,
) -> Result<PressureField> {
    pressure_from_depth_velocity(spectrum, &traces.vbar, beach)
}

/// Pressure for a given depth-integrated velocity.
pub fn pressure_from_depth_velocity(
    spectrum: &CosineSpectrum,
    vbar: &[f64],
    beach: &BeachProfile,
) -> Result<PressureField> {
    let dp: GridFunction1D = beach.chi.iter().zip(vbar).map(|(c, v)| c * v).collect();
    PressureField::from_slope(spectrum, dp)
}

/// `dP = -chi int_0^x G psi`, with the running integral taken spectrally.
pub fn pressure_from_flux(
    spectrum: &CosineSpectrum,
    traces: &TraceSet,
    beach: &BeachProfile,
) -> Result<PressureField> {
    let vbar = vbar_from_flux(spectrum, &traces.gpsi)?;
    pressure_from_depth_velocity(spectrum, &vbar, beach)
}

/// `-int_0^x G psi`: the spectral primitive, which needs `int G psi = 0`.
pub fn vbar_from_flux(spectrum: &CosineSpectrum, gpsi: &[f64]) -> Result<GridFunction1D> {
    let prim = spectrum.antiderivative(gpsi, Parity::Even)?;
    Ok(prim.scaled(-1.0))
}

/// `-int_0^x G psi` by the cumulative trapezoid rule.
pub fn vbar_from_flux_trapezoid(gpsi: &[f64], dx: f64) -> GridFunction1D {
    cumulative_trapezoid(gpsi, dx).into_iter().map(|v| -v).collect()
}

/// `P = chi G psi`, shifted to zero mean. `dP` is its spectral derivative.
pub fn pressure_experimental_dtn(
    spectrum: &CosineSpectrum,
    gpsi: &[f64],
    beach: &BeachProfile,
    dx: f64,
    length: f64,
) -> PressureField {
    let raw: Vec<f64> = beach.chi.iter().zip(gpsi).map(|(c, g)| c * g).collect();
    let mean = trapezoid_1d(&raw, dx) / length;
    let p: GridFunction1D = raw.iter().map(|v| v - mean).collect();
    let dp = spectrum.derivative(&p, Parity::Even);
    PressureField { p, dp }
}

/// Damping power `int dP Vbar`.
pub fn damping_power(dp: &[f64], vbar: &[f64], dx: f64) -> f64 {
    let f: Vec<f64> = dp.iter().zip(vbar).map(|(a, b)| a * b).collect();
    trapezoid_1d(&f, dx)
}

/// Cumulative pressure budget `int_0^T int (dP)^2` against `(sup chi) H(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DampingBudget {
    pub lhs: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// Evaluates the pressure budget by the trapezoid rule in time.
pub fn cumulative_damping_bound(
    times: &[f64],
    dp: &[GridFunction1D],
    dx: f64,
    sup_chi: f64,
    h0: f64,
) -> Result<DampingBudget> {
    if times.len() != dp.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} times, {} pressure samples",
            times.len(),
            dp.len()
        )));
    }
    let sq: Vec<f64> = dp
        .iter()
        .map(|d| {
            let s: Vec<f64> = d.iter().map(|v| v * v).collect();
            trapezoid_1d(&s, dx)
        })
        .collect();
    let lhs = trapezoid_nonuniform(times, &sq);
    let bound = sup_chi * h0;
    let ratio = if bound > 0.0 {
        lhs / bound
    } else if lhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(DampingBudget { lhs, bound, ratio })
}

/// `(||P||, L ||dP||)` for the Poincare check.
pub fn poincare_pair(pressure: &PressureField, dx: f64, length: f64) -> (f64, f64) {
    let l2 = |f: &[f64]| crate::multipliers::l2_norm(f, dx);
    (l2(&pressure.p), length * l2(&pressure.dp))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_slope_zero_pressure() {
        let sp = CosineSpectrum::new(16, 2.0);
        let chi = GridFunction1D::constant(17, 1.0);
        let beach = BeachProfile {
            delta: 0.5,
            chi: chi.clone(),
            chi_x: GridFunction1D::zeros(17),
            m: GridFunction1D::zeros(17),
            m_x: GridFunction1D::zeros(17),
            m_xx: GridFunction1D::zeros(17),
        };
        let p = pressure_from_depth_velocity(&sp, &[0.0; 17], &beach).unwrap();
        assert_eq!(p.p.max_abs(), 0.0);
        assert_eq!(p.dp.max_abs(), 0.0);
    }

    #[test]
    fn budget_of_silent_run_is_zero() {
        let b = cumulative_damping_bound(&[0.0, 1.0], &[GridFunction1D::zeros(5), GridFunction1D::zeros(5)], 0.1, 0.0, 1.0)
            .unwrap();
        assert_eq!(b.lhs, 0.0);
        assert_eq!(b.ratio, 0.0);
    }
}
