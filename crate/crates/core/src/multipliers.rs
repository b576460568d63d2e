//! Beach cutoff `chi`, multiplier weight `m`, and the fields and constants
//! built from them.

use serde::{Deserialize, Serialize};

use crate::cutoff::SmoothStep;
use crate::elliptic::SurfaceState;
use crate::error::{Error, Result};
use crate::grid::{GridFunction1D, SimGrid, TankGeometry};
use crate::spectral::{CosineSpectrum, Parity};

/// Damping zone and multiplier weight on the tank nodes.
///
/// `chi` rises from 0 at `L - delta` to 1 at `L - delta/2`. The weight is
/// `m = x kappa(x)` with `kappa` falling from 1 at `L - delta/2` to 0 at `L`.
/// Derivatives of `chi` and `m` are evaluated from closed forms.
#[derive(Debug, Clone, PartialEq)]
pub struct BeachProfile {
    pub delta: f64,
    pub chi: GridFunction1D,
    pub chi_x: GridFunction1D,
    pub m: GridFunction1D,
    pub m_x: GridFunction1D,
    pub m_xx: GridFunction1D,
}

impl BeachProfile {
    pub fn build(geo: &TankGeometry, grid: &SimGrid, delta: f64) -> Result<Self> {
        let l = geo.length;
        if !(delta > 0.0 && delta < 0.5 * l) {
            return Err(Error::BadBeach {
                delta,
                half_length: 0.5 * l,
            });
        }
        let rise = SmoothStep::new(l - delta, l - 0.5 * delta)?;
        let taper = SmoothStep::new(l - 0.5 * delta, l)?;
        let n = grid.nodes_x();
        let mut out = Self {
            delta,
            chi: GridFunction1D::zeros(n),
            chi_x: GridFunction1D::zeros(n),
            m: GridFunction1D::zeros(n),
            m_x: GridFunction1D::zeros(n),
            m_xx: GridFunction1D::zeros(n),
        };
        for i in 0..n {
            let x = grid.x(geo, i);
            let (c, c1, _) = rise.eval(x);
            let (t, t1, t2) = taper.eval(x);
            let (k, k1, k2) = (1.0 - t, -t1, -t2);
            out.chi[i] = c;
            out.chi_x[i] = c1;
            out.m[i] = x * k;
            out.m_x[i] = k + x * k1;
            out.m_xx[i] = 2.0 * k1 + x * k2;
        }
        // The last node is x = L up to rounding; pin the endpoint values.
        out.m[n - 1] = 0.0;
        out.chi[n - 1] = 1.0;
        Ok(out)
    }

    /// Same weight `m`, no damping (`chi = 0`).
    pub fn without_damping(&self) -> Self {
        let n = self.chi.len();
        Self {
            chi: GridFunction1D::zeros(n),
            chi_x: GridFunction1D::zeros(n),
            ..self.clone()
        }
    }

    /// Test-only weight `m(x) = x` (which does not vanish at `x = L`) with no damping.
    pub fn identity_weight(geo: &TankGeometry, grid: &SimGrid) -> Self {
        let n = grid.nodes_x();
        Self {
            delta: 0.0,
            chi: GridFunction1D::zeros(n),
            chi_x: GridFunction1D::zeros(n),
            m: grid.x_nodes(geo),
            m_x: GridFunction1D::constant(n, 1.0),
            m_xx: GridFunction1D::zeros(n),
        }
    }

    pub fn sup_chi(&self) -> f64 {
        self.chi.max().max(0.0)
    }

    /// `C(m) = sup m + (L/2) sup |1/2 - m_x|`.
    pub fn c_m(&self, geo: &TankGeometry) -> f64 {
        let sup_m = self.m.max();
        let sup_dev = self.m_x.iter().fold(0.0_f64, |a, v| a.max((0.5 - v).abs()));
        sup_m + 0.5 * geo.length * sup_dev
    }
}

/// Multiplier fields of one state.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedMultipliers {
    pub zeta: GridFunction1D,
    pub rho: GridFunction1D,
    pub rho_x: GridFunction1D,
    pub psi1: GridFunction1D,
    pub psi2: GridFunction1D,
}

/// Evaluates `zeta`, `rho`, `rho_x`, `Psi_1` and `Psi_2` with spectral
/// derivatives of `eta` and `psi`.
pub fn derived_multipliers(
    spectrum: &CosineSpectrum,
    state: &SurfaceState,
    beach: &BeachProfile,
    geo: &TankGeometry,
) -> DerivedMultipliers {
    let n = state.eta.len();
    let dx = geo.length / (n - 1) as f64;
    let eta_x = spectrum.derivative(&state.eta, Parity::Even);
    let eta_xx = spectrum.second_derivative(&state.eta);
    let psi_x = spectrum.derivative(&state.psi, Parity::Even);
    let psi_xx = spectrum.second_derivative(&state.psi);
    let mut out = DerivedMultipliers {
        zeta: GridFunction1D::zeros(n),
        rho: GridFunction1D::zeros(n),
        rho_x: GridFunction1D::zeros(n),
        psi1: GridFunction1D::zeros(n),
        psi2: GridFunction1D::zeros(n),
    };
    for i in 0..n {
        let x = i as f64 * dx;
        let (m, mx, mxx) = (beach.m[i], beach.m_x[i], beach.m_xx[i]);
        let (e, ex, exx) = (state.eta[i], eta_x[i], eta_xx[i]);
        let (p, px, pxx) = (state.psi[i], psi_x[i], psi_xx[i]);
        out.zeta[i] = mx * e + m * ex - 0.25 * e + 0.5 * (1.0 - mx) * e;
        out.rho[i] = (m - x) * ex + (1.25 + 0.5 * mx) * e;
        out.rho_x[i] = (mx - 1.0) * ex + (m - x) * exx + 0.5 * mxx * e + (1.25 + 0.5 * mx) * ex;
        out.psi1[i] = -m * px - 0.25 * p + 0.5 * (1.0 - mx) * p;
        out.psi2[i] = -0.5 * mxx * p + 1.5 * (1.0 - mx) * px + (x - m) * pxx;
    }
    out
}

/// Constants entering the quantitative decay estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayConstants {
    /// `C(m)`.
    pub cm: f64,
    /// `sup |rho_x|` over the run.
    pub c: f64,
    pub alpha: f64,
    pub n1t: f64,
    pub n2t: f64,
    /// `min rho` over the run.
    pub rho_min: f64,
    /// `rho >= -h` everywhere and `c < 1/2`.
    pub admissible: bool,
}

/// Measures `c`, `N_{1,T}`, `N_{2,T}` over a sequence of states.
pub fn decay_constants<'a>(
    states: impl IntoIterator<Item = &'a SurfaceState>,
    beach: &BeachProfile,
    geo: &TankGeometry,
    grid: &SimGrid,
    h0: f64,
    alpha: f64,
) -> Result<DecayConstants> {
    if !(h0 > 0.0) {
        return Err(Error::ZeroEnergy);
    }
    let spectrum = CosineSpectrum::for_geometry(grid.nx, geo);
    let dx = grid.dx(geo);
    let mut c = 0.0_f64;
    let mut rho_min = f64::INFINITY;
    let mut psi1_max = 0.0_f64;
    let mut psi2_max = 0.0_f64;
    for state in states {
        let d = derived_multipliers(&spectrum, state, beach, geo);
        c = c.max(d.rho_x.max_abs());
        rho_min = rho_min.min(d.rho.min());
        psi1_max = psi1_max.max(l2_norm(&d.psi1, dx));
        psi2_max = psi2_max.max(l2_norm(&d.psi2, dx));
    }
    Ok(DecayConstants {
        cm: beach.c_m(geo),
        c,
        alpha,
        n1t: psi1_max / h0.sqrt(),
        n2t: psi2_max / h0.sqrt(),
        rho_min,
        admissible: rho_min >= -geo.depth && c < 0.5,
    })
}

/// Trapezoid `L^2` norm.
pub fn l2_norm(f: &[f64], dx: f64) -> f64 {
    let sq: Vec<f64> = f.iter().map(|v| v * v).collect();
    crate::quadrature::trapezoid_1d(&sq, dx).sqrt()
}
