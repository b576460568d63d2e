//! Potential flow under the free surface.
//!
//! With `y = -h + s D(x)`, `D = h + eta`, the kinetic energy of the flow is
//!
//! ```text
//! K = 1/2 int int [ D Phi_x^2 - 2 s eta_x Phi_x Phi_s + (1 + s^2 eta_x^2) Phi_s^2 / D ] ds dx
//! ```
//!
//! where `Phi(x, s)` is the potential at fixed `s`. The discrete energy uses
//! spectral `x` derivatives, trapezoid weights on nodes in `s` for the first
//! term and cell midpoints for the other two. The discrete potential minimizes
//! it subject to `Phi = psi` on `s = 1`. Everything else follows from that one
//! quadratic form:
//!
//! * the Dirichlet-to-Neumann map `G psi` is its gradient in `psi`, so it is
//!   symmetric and `1/2 int psi G psi` equals the discrete energy;
//! * the per-level horizontal fluxes `f_j` sum to the depth-integrated
//!   velocity `Vbar`, and `G psi = -d/dx Vbar` holds exactly;
//! * its gradient in `eta` is the shape derivative of the kinetic energy.
//!
//! The minimizer is found by conjugate gradients preconditioned with the
//! flat-surface operator, which is diagonal in cosine modes and tridiagonal
//! in `s`.

use crate::error::{Error, Result};
use crate::grid::{trapezoid_weights, GridFunction1D, GridFunction2D, SimGrid, TankGeometry};
use crate::quadrature::check_depth;
use crate::spectral::{CosineSpectrum, Parity};

/// Relative residual at which conjugate gradients stops.
pub const SOLVER_TOLERANCE: f64 = 1e-12;
/// Iteration cap; reaching it is reported as a solver failure.
pub const SOLVER_MAX_ITERATIONS: usize = 400;

/// Zakharov variables: elevation `eta` and surface potential `psi`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SurfaceState {
    pub eta: GridFunction1D,
    pub psi: GridFunction1D,
}

impl SurfaceState {
    pub fn new(eta: GridFunction1D, psi: GridFunction1D) -> Self {
        Self { eta, psi }
    }

    pub fn rest(grid: &SimGrid) -> Self {
        Self {
            eta: GridFunction1D::zeros(grid.nodes_x()),
            psi: GridFunction1D::zeros(grid.nodes_x()),
        }
    }

    /// Shape, finiteness and depth checks required by every solve.
    pub fn validate(&self, geo: &TankGeometry, grid: &SimGrid) -> Result<()> {
        let n = grid.nodes_x();
        if self.eta.len() != n || self.psi.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "state has {} / {} nodes, grid has {n}",
                self.eta.len(),
                self.psi.len()
            )));
        }
        self.eta.check_finite("eta")?;
        self.psi.check_finite("psi")?;
        check_depth(&self.eta, geo)
    }

    /// Trapezoid mean of `eta`.
    pub fn eta_mean(&self, geo: &TankGeometry) -> f64 {
        let n = self.eta.len() - 1;
        crate::quadrature::trapezoid_1d(&self.eta, geo.length / n as f64) / geo.length
    }
}

/// Interior potential and the true-coordinate velocity on the mapped grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    pub phi: GridFunction2D,
    /// `d phi / dx` at fixed `y`.
    pub phi_x: GridFunction2D,
    /// `d phi / dy`.
    pub phi_y: GridFunction2D,
    /// Conjugate-gradient iterations used.
    pub iterations: usize,
}

/// Surface traces derived from one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSet {
    /// `G(eta) psi`.
    pub gpsi: GridFunction1D,
    /// Horizontal velocity on the surface.
    pub v: GridFunction1D,
    /// Vertical velocity on the surface.
    pub b: GridFunction1D,
    /// `N(eta) psi = V^2/2 - B^2/2 + eta_x V B`.
    pub npsi: GridFunction1D,
    /// Depth-integrated horizontal velocity.
    pub vbar: GridFunction1D,
    /// Exact derivative of the discrete kinetic energy in `eta`. It converges
    /// to `npsi` and makes the semi-discrete flow exactly Hamiltonian.
    pub dk_deta: GridFunction1D,
    /// `eta_x`.
    pub eta_x: GridFunction1D,
    /// `psi_x`.
    pub psi_x: GridFunction1D,
}

/// Fields of one column-independent coefficient set.
struct Coefficients {
    depth: Vec<f64>,
    eta_x: Vec<f64>,
}

/// Minimizer of the discrete energy and the quantities read off it.
#[derive(Debug, Clone)]
pub struct EllipticSolution {
    /// `Phi` on every level, surface included.
    pub phi: GridFunction2D,
    /// `Phi_x` at fixed `s` on every level.
    pub phi_sx: GridFunction2D,
    pub depth: GridFunction1D,
    pub eta_x: GridFunction1D,
    pub gpsi: GridFunction1D,
    pub vbar: GridFunction1D,
    pub dk_deta: GridFunction1D,
    pub iterations: usize,
}

/// Reusable solver for one geometry and grid: FFT plans and the factorized
/// flat-surface preconditioner.
#[derive(Debug, Clone)]
pub struct EllipticSolver {
    geo: TankGeometry,
    grid: SimGrid,
    spectrum: CosineSpectrum,
    wx: Vec<f64>,
    ws: Vec<f64>,
    /// `s` at cell midpoints `j + 1/2`.
    s_mid: Vec<f64>,
    /// Thomas factors per cosine mode: modified diagonal inverses and the
    /// constant off-diagonal.
    precond_inv: Vec<Vec<f64>>,
    precond_off: f64,
}

impl EllipticSolver {
    pub fn new(geo: &TankGeometry, grid: &SimGrid) -> Result<Self> {
        geo.validate()?;
        grid.validate()?;
        let spectrum = CosineSpectrum::for_geometry(grid.nx, geo);
        let ds = grid.ds();
        let ny = grid.ny;
        let h = geo.depth;
        let ws = trapezoid_weights(ny, ds);
        let s_mid = (0..ny).map(|j| (j as f64 + 0.5) * ds).collect();
        let off = -1.0 / (h * ds);
        let precond_inv = (0..=grid.nx)
            .map(|m| {
                let k = if m == grid.nx { 0.0 } else { spectrum.mode_wavenumber(m) };
                let mut inv = vec![0.0; ny];
                let mut prev = 0.0;
                for j in 0..ny {
                    let vertical = if j == 0 { 1.0 } else { 2.0 } / (h * ds);
                    let diag = ws[j] * h * k * k + vertical;
                    let d = if j == 0 { diag } else { diag - off * off * prev };
                    inv[j] = 1.0 / d;
                    prev = inv[j];
                }
                inv
            })
            .collect();
        Ok(Self {
            geo: *geo,
            grid: *grid,
            spectrum,
            wx: grid.x_weights(geo),
            ws,
            s_mid,
            precond_inv,
            precond_off: off,
        })
    }

    pub fn geometry(&self) -> &TankGeometry {
        &self.geo
    }

    pub fn grid(&self) -> &SimGrid {
        &self.grid
    }

    pub fn spectrum(&self) -> &CosineSpectrum {
        &self.spectrum
    }

    fn coefficients(&self, eta: &[f64]) -> Coefficients {
        Coefficients {
            depth: eta.iter().map(|e| self.geo.depth + e).collect(),
            eta_x: self.spectrum.derivative(eta, Parity::Even).into_inner(),
        }
    }

    /// `x` derivatives of every level, two levels per transform.
    fn level_derivatives(&self, levels: &[f64], count: usize, parity: Parity, out: &mut [f64]) {
        let n = self.grid.nodes_x();
        let mut buf = self.spectrum.buffer();
        let mut j = 0;
        while j + 1 < count {
            let (a, b) = (&levels[j * n..(j + 1) * n], &levels[(j + 1) * n..(j + 2) * n]);
            let (oa, ob) = out[j * n..(j + 2) * n].split_at_mut(n);
            self.spectrum.derivative_pair_into(a, b, parity, oa, ob, &mut buf);
            j += 2;
        }
        if j < count {
            self.spectrum
                .derivative_into(&levels[j * n..(j + 1) * n], parity, &mut out[j * n..(j + 1) * n], &mut buf);
        }
    }

    /// Applies the Euler-Lagrange operator to `phi` (all `ny + 1` levels).
    ///
    /// Returns the weighted gradient divided by the `x` weights: rows
    /// `0..ny` are the interior equations and row `ny` is `G psi`. Also
    /// returns the horizontal fluxes `f_j` and `Phi_x` when requested.
    fn apply(
        &self,
        c: &Coefficients,
        phi: &[f64],
        out: &mut [f64],
        mut fluxes: Option<&mut [f64]>,
        mut phi_sx: Option<&mut [f64]>,
    ) {
        let n = self.grid.nodes_x();
        let ny = self.grid.ny;
        let levels = ny + 1;
        let ds = self.grid.ds();
        let mut px = vec![0.0; n * levels];
        self.level_derivatives(phi, levels, Parity::Even, &mut px);

        let mut f = vec![0.0; n * levels];
        for j in 0..levels {
            let w = self.ws[j];
            for i in 0..n {
                f[j * n + i] = w * c.depth[i] * px[j * n + i];
            }
        }
        // Vertical fluxes S_{j+1/2}; their divergence goes straight into `out`.
        out.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..ny {
            let s = self.s_mid[j];
            for i in 0..n {
                let lo = j * n + i;
                let hi = lo + n;
                let ex = c.eta_x[i];
                let delta = phi[hi] - phi[lo];
                let avg = 0.5 * (px[lo] + px[hi]);
                let flux = (1.0 + s * s * ex * ex) / c.depth[i] * delta / ds - s * ex * avg;
                out[lo] -= flux;
                out[hi] += flux;
                let half = 0.5 * s * ex * delta;
                f[lo] -= half;
                f[hi] -= half;
            }
        }
        let mut dfx = vec![0.0; n * levels];
        self.level_derivatives(&f, levels, Parity::Odd, &mut dfx);
        for (o, d) in out.iter_mut().zip(&dfx) {
            *o -= d;
        }
        if let Some(fl) = fluxes.as_deref_mut() {
            fl.copy_from_slice(&f);
        }
        if let Some(p) = phi_sx.as_deref_mut() {
            p.copy_from_slice(&px);
        }
    }

    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = self.grid.nodes_x();
        a.chunks(n)
            .zip(b.chunks(n))
            .map(|(ra, rb)| ra.iter().zip(rb).zip(&self.wx).map(|((u, v), w)| w * u * v).sum::<f64>())
            .sum()
    }

    /// Inverse of the flat-surface operator on the interior levels.
    fn precondition(&self, r: &[f64], z: &mut [f64]) {
        let n = self.grid.nodes_x();
        let ny = self.grid.ny;
        let mut coeff = vec![0.0; n * ny];
        let mut buf = self.spectrum.buffer();
        let mut j = 0;
        while j < ny {
            let a = &r[j * n..(j + 1) * n];
            let b = if j + 1 < ny { &r[(j + 1) * n..(j + 2) * n] } else { a };
            let mut ca = vec![0.0; n];
            let mut cb = vec![0.0; n];
            self.spectrum.cosine_coefficients_pair(a, b, &mut ca, &mut cb, &mut buf);
            coeff[j * n..(j + 1) * n].copy_from_slice(&ca);
            if j + 1 < ny {
                coeff[(j + 1) * n..(j + 2) * n].copy_from_slice(&cb);
            }
            j += 2;
        }
        let off = self.precond_off;
        let mut y = vec![0.0; ny];
        for m in 0..n {
            let inv = &self.precond_inv[m];
            // Forward sweep then back substitution.
            for j in 0..ny {
                let rhs = coeff[j * n + m];
                y[j] = if j == 0 { rhs * inv[0] } else { (rhs - off * y[j - 1]) * inv[j] };
            }
            for j in (0..ny - 1).rev() {
                y[j] -= off * inv[j] * y[j + 1];
            }
            for j in 0..ny {
                coeff[j * n + m] = y[j];
            }
        }
        let mut j = 0;
        while j < ny {
            let ca = &coeff[j * n..(j + 1) * n];
            let cb = if j + 1 < ny { &coeff[(j + 1) * n..(j + 2) * n] } else { ca };
            let mut a = vec![0.0; n];
            let mut b = vec![0.0; n];
            self.spectrum.from_cosine_coefficients_pair(ca, cb, &mut a, &mut b, &mut buf);
            z[j * n..(j + 1) * n].copy_from_slice(&a);
            if j + 1 < ny {
                z[(j + 1) * n..(j + 2) * n].copy_from_slice(&b);
            }
            j += 2;
        }
    }

    /// Minimizes the discrete energy with `Phi = psi` on the surface.
    /// `guess`, if given, supplies a starting potential on every level.
    pub fn solve(&self, state: &SurfaceState, guess: Option<&GridFunction2D>) -> Result<EllipticSolution> {
        state.validate(&self.geo, &self.grid)?;
        let n = self.grid.nodes_x();
        let ny = self.grid.ny;
        let total = n * (ny + 1);
        let interior = n * ny;
        let c = self.coefficients(&state.eta);

        let mut phi = vec![0.0; total];
        if let Some(g) = guess {
            if g.nodes_x() != n || g.levels() != ny + 1 {
                return Err(Error::ShapeMismatch("initial guess does not match the grid".into()));
            }
            phi[..interior].copy_from_slice(&g.as_slice()[..interior]);
        } else {
            for j in 0..ny {
                phi[j * n..(j + 1) * n].copy_from_slice(&state.psi);
            }
        }
        phi[interior..].copy_from_slice(&state.psi);

        let mut out = vec![0.0; total];
        self.apply(&c, &phi, &mut out, None, None);
        let mut r: Vec<f64> = out[..interior].iter().map(|v| -v).collect();

        // Scale of the problem: the operator applied to the surface data alone.
        let mut lift = vec![0.0; total];
        lift[interior..].copy_from_slice(&state.psi);
        self.apply(&c, &lift, &mut out, None, None);
        let b_norm = self.dot(&out[..interior], &out[..interior]).sqrt();

        let mut iterations = 0;
        if b_norm > 0.0 {
            let mut z = vec![0.0; interior];
            self.precondition(&r, &mut z);
            let mut p = z.clone();
            let mut rz = self.dot(&r, &z);
            let mut p_full = vec![0.0; total];
            loop {
                let r_norm = self.dot(&r, &r).sqrt();
                if r_norm <= SOLVER_TOLERANCE * b_norm {
                    break;
                }
                if iterations >= SOLVER_MAX_ITERATIONS {
                    return Err(Error::SolverFailure(format!(
                        "no convergence after {iterations} iterations (residual ratio {:.3e})",
                        r_norm / b_norm
                    )));
                }
                p_full[..interior].copy_from_slice(&p);
                self.apply(&c, &p_full, &mut out, None, None);
                let ap = &out[..interior];
                let pap = self.dot(&p, ap);
                if !(pap > 0.0) {
                    return Err(Error::SolverFailure(format!("operator not positive: p.Ap = {pap:.3e}")));
                }
                let alpha = rz / pap;
                for k in 0..interior {
                    phi[k] += alpha * p[k];
                    r[k] -= alpha * ap[k];
                }
                self.precondition(&r, &mut z);
                let rz_new = self.dot(&r, &z);
                let beta = rz_new / rz;
                rz = rz_new;
                for k in 0..interior {
                    p[k] = z[k] + beta * p[k];
                }
                iterations += 1;
            }
        }

        let mut f = vec![0.0; total];
        let mut px = vec![0.0; total];
        self.apply(&c, &phi, &mut out, Some(&mut f), Some(&mut px));
        let gpsi: GridFunction1D = out[interior..].to_vec().into();
        let mut vbar = vec![0.0; n];
        for level in f.chunks(n) {
            for (v, fl) in vbar.iter_mut().zip(level) {
                *v += fl;
            }
        }
        let dk_deta = self.shape_gradient(&c, &phi, &px);

        let mut phi_field = GridFunction2D::zeros(&self.grid);
        phi_field.as_mut_slice().copy_from_slice(&phi);
        let mut phi_sx = GridFunction2D::zeros(&self.grid);
        phi_sx.as_mut_slice().copy_from_slice(&px);
        let sol = EllipticSolution {
            phi: phi_field,
            phi_sx,
            depth: c.depth.into(),
            eta_x: c.eta_x.into(),
            gpsi,
            vbar: vbar.into(),
            dk_deta,
            iterations,
        };
        if !(sol.gpsi.is_finite() && sol.vbar.is_finite() && sol.dk_deta.is_finite()) {
            return Err(Error::NonFinite("elliptic solution"));
        }
        Ok(sol)
    }

    /// `d K / d eta` at the minimizer: `1/2 e_D - d/dx (1/2 e_{eta_x})`,
    /// where `e` is the column energy density.
    fn shape_gradient(&self, c: &Coefficients, phi: &[f64], px: &[f64]) -> GridFunction1D {
        let n = self.grid.nodes_x();
        let ny = self.grid.ny;
        let ds = self.grid.ds();
        let mut e_d = vec![0.0; n];
        let mut e_ex = vec![0.0; n];
        for j in 0..=ny {
            let w = self.ws[j];
            for i in 0..n {
                e_d[i] += w * px[j * n + i] * px[j * n + i];
            }
        }
        for j in 0..ny {
            let s = self.s_mid[j];
            for i in 0..n {
                let lo = j * n + i;
                let hi = lo + n;
                let ex = c.eta_x[i];
                let d = c.depth[i];
                let q = (phi[hi] - phi[lo]) / ds;
                let avg = 0.5 * (px[lo] + px[hi]);
                e_d[i] -= ds * (1.0 + s * s * ex * ex) / (d * d) * q * q;
                e_ex[i] += ds * (2.0 * s * s * ex / d * q * q - 2.0 * s * avg * q);
            }
        }
        let half_ex: Vec<f64> = e_ex.iter().map(|v| 0.5 * v).collect();
        let d_ex = self.spectrum.derivative(&half_ex, Parity::Odd);
        e_d.iter().zip(d_ex.iter()).map(|(a, b)| 0.5 * a - b).collect()
    }

    /// Surface traces of a solution.
    pub fn traces(&self, sol: &EllipticSolution, state: &SurfaceState) -> TraceSet {
        let psi_x = self.spectrum.derivative(&state.psi, Parity::Even);
        let ex = &sol.eta_x;
        let n = ex.len();
        let mut b = vec![0.0; n];
        let mut v = vec![0.0; n];
        let mut npsi = vec![0.0; n];
        for i in 0..n {
            let bi = (sol.gpsi[i] + ex[i] * psi_x[i]) / (1.0 + ex[i] * ex[i]);
            let vi = psi_x[i] - ex[i] * bi;
            b[i] = bi;
            v[i] = vi;
            npsi[i] = 0.5 * vi * vi - 0.5 * bi * bi + ex[i] * vi * bi;
        }
        TraceSet {
            gpsi: sol.gpsi.clone(),
            v: v.into(),
            b: b.into(),
            npsi: npsi.into(),
            vbar: sol.vbar.clone(),
            dk_deta: sol.dk_deta.clone(),
            eta_x: sol.eta_x.clone(),
            psi_x,
        }
    }

    /// True-coordinate velocity field of a solution.
    pub fn field(&self, sol: &EllipticSolution) -> PotentialField {
        let n = self.grid.nodes_x();
        let ny = self.grid.ny;
        let ds = self.grid.ds();
        let phi = sol.phi.as_slice();
        let mut phi_x = GridFunction2D::zeros(&self.grid);
        let mut phi_y = GridFunction2D::zeros(&self.grid);
        for j in 0..=ny {
            let s = self.grid.s(j);
            for i in 0..n {
                let at = |jj: usize| phi[jj * n + i];
                let phi_s = if j == 0 {
                    0.0
                } else if j == ny {
                    (3.0 * at(ny) - 4.0 * at(ny - 1) + at(ny - 2)) / (2.0 * ds)
                } else {
                    (at(j + 1) - at(j - 1)) / (2.0 * ds)
                };
                let d = sol.depth[i];
                phi_y.set(i, j, phi_s / d);
                phi_x.set(i, j, sol.phi_sx.get(i, j) - s * sol.eta_x[i] * phi_s / d);
            }
        }
        PotentialField {
            phi: sol.phi.clone(),
            phi_x,
            phi_y,
            iterations: sol.iterations,
        }
    }
}

/// One-shot potential solve.
pub fn solve_potential(geo: &TankGeometry, grid: &SimGrid, state: &SurfaceState) -> Result<PotentialField> {
    let solver = EllipticSolver::new(geo, grid)?;
    let sol = solver.solve(state, None)?;
    Ok(solver.field(&sol))
}

/// Traces of a field produced by [`solve_potential`] for `state`.
///
/// The Dirichlet-to-Neumann data is recomputed from the potential through the
/// same discrete fluxes the solver balances.
pub fn compute_traces(
    field: &PotentialField,
    state: &SurfaceState,
    geo: &TankGeometry,
    grid: &SimGrid,
) -> Result<TraceSet> {
    let solver = EllipticSolver::new(geo, grid)?;
    state.validate(geo, grid)?;
    let c = solver.coefficients(&state.eta);
    let total = grid.nodes_x() * grid.levels();
    let mut out = vec![0.0; total];
    let mut f = vec![0.0; total];
    let mut px = vec![0.0; total];
    solver.apply(&c, field.phi.as_slice(), &mut out, Some(&mut f), Some(&mut px));
    let n = grid.nodes_x();
    let mut vbar = vec![0.0; n];
    for level in f.chunks(n) {
        for (v, fl) in vbar.iter_mut().zip(level) {
            *v += fl;
        }
    }
    let dk_deta = solver.shape_gradient(&c, field.phi.as_slice(), &px);
    let mut phi_sx = GridFunction2D::zeros(grid);
    phi_sx.as_mut_slice().copy_from_slice(&px);
    let sol = EllipticSolution {
        phi: field.phi.clone(),
        phi_sx,
        depth: c.depth.into(),
        eta_x: c.eta_x.into(),
        gpsi: out[total - n..].to_vec().into(),
        vbar: vbar.into(),
        dk_deta,
        iterations: field.iterations,
    };
    Ok(solver.traces(&sol, state))
}

/// Flat-bottom, flat-surface Dirichlet-to-Neumann map: the cosine multiplier
/// `k tanh(k h)`.
pub fn flat_dtn(psi: &[f64], geo: &TankGeometry) -> GridFunction1D {
    let spectrum = CosineSpectrum::new(psi.len() - 1, geo.length);
    flat_dtn_with(&spectrum, psi, geo)
}

pub fn flat_dtn_with(spectrum: &CosineSpectrum, psi: &[f64], geo: &TankGeometry) -> GridFunction1D {
    let h = geo.depth;
    spectrum.even_multiplier(psi, |k| k * (k * h).tanh())
}
