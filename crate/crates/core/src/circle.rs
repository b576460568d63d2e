//! Linearized water waves on the circle `R / 2 pi Z`, infinite depth, `g = 1`.
//!
//! Fields are stored as Fourier coefficients `c_n`, `n = -N..=N`, at index
//! `n + N`. Norms and scalar products are taken in coefficient space, that is
//! the `L^2(S^1)` ones divided by `2 pi`.
//!
//! With `theta = |D|^{1/2} psi` and `A = d_x^{-1} |D|^{1/2}` the system is
//! `u_t + L u + P u = 0`, `u = (eta, theta)`, where `L` rotates each mode at
//! frequency `sqrt|n|` and `P theta = -A (chi A theta)`, so that
//! `(P u, u) = int chi (A theta)^2 >= 0`.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

fn index(n_max: usize, n: i64) -> usize {
    (n + n_max as i64) as usize
}

fn modes(n_max: usize) -> impl Iterator<Item = i64> {
    let n = n_max as i64;
    -n..=n
}

/// `(eta, psi)` in Fourier coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    pub n_max: usize,
    pub eta_hat: Vec<Complex64>,
    pub psi_hat: Vec<Complex64>,
}

/// `(eta, theta)` with `theta = |D|^{1/2} psi`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrizedState {
    pub n_max: usize,
    pub eta_hat: Vec<Complex64>,
    pub theta_hat: Vec<Complex64>,
}

impl SpectralState {
    pub fn zeros(n_max: usize) -> Self {
        Self {
            n_max,
            eta_hat: vec![ZERO; 2 * n_max + 1],
            psi_hat: vec![ZERO; 2 * n_max + 1],
        }
    }

    /// Real fields `sum a cos(n x) + b sin(n x)` given as `(n, a, b)` per mode.
    pub fn from_real_modes(n_max: usize, eta: &[(usize, f64, f64)], psi: &[(usize, f64, f64)]) -> Result<Self> {
        let mut out = Self::zeros(n_max);
        let fill = |dst: &mut Vec<Complex64>, src: &[(usize, f64, f64)]| -> Result<()> {
            for &(n, a, b) in src {
                if n > n_max {
                    return Err(Error::InvalidConfig(format!("mode {n} exceeds N = {n_max}")));
                }
                if n == 0 {
                    dst[n_max] += Complex64::new(a, 0.0);
                } else {
                    let c = Complex64::new(0.5 * a, -0.5 * b);
                    dst[index(n_max, n as i64)] += c;
                    dst[index(n_max, -(n as i64))] += c.conj();
                }
            }
            Ok(())
        };
        fill(&mut out.eta_hat, eta)?;
        fill(&mut out.psi_hat, psi)?;
        out.validate()?;
        Ok(out)
    }

    pub fn coeff_eta(&self, n: i64) -> Complex64 {
        self.eta_hat[index(self.n_max, n)]
    }

    pub fn coeff_psi(&self, n: i64) -> Complex64 {
        self.psi_hat[index(self.n_max, n)]
    }

    /// Shapes, conjugate symmetry and `eta_0 = 0`.
    pub fn validate(&self) -> Result<()> {
        let len = 2 * self.n_max + 1;
        if self.eta_hat.len() != len || self.psi_hat.len() != len {
            return Err(Error::ShapeMismatch(format!(
                "expected {len} coefficients, got {} and {}",
                self.eta_hat.len(),
                self.psi_hat.len()
            )));
        }
        let scale = self
            .eta_hat
            .iter()
            .chain(&self.psi_hat)
            .fold(0.0_f64, |m, c| m.max(c.norm()))
            .max(f64::MIN_POSITIVE);
        for v in [&self.eta_hat, &self.psi_hat] {
            for n in 0..=self.n_max as i64 {
                let a = v[index(self.n_max, n)];
                let b = v[index(self.n_max, -n)];
                if (a - b.conj()).norm() > 1e-12 * scale {
                    return Err(Error::InvalidConfig(format!("mode {n} breaks conjugate symmetry")));
                }
            }
        }
        if self.eta_hat[self.n_max].norm() > 1e-14 * scale {
            return Err(Error::NonzeroMean {
                mean: self.eta_hat[self.n_max].re,
                scale,
            });
        }
        Ok(())
    }

    pub fn symmetrize(&self) -> SymmetrizedState {
        SymmetrizedState {
            n_max: self.n_max,
            eta_hat: self.eta_hat.clone(),
            theta_hat: multiplier(Multiplier::SqrtAbsD, &self.psi_hat),
        }
    }

    /// Inverse of [`symmetrize`](Self::symmetrize); `theta` does not see the
    /// constant mode of `psi`, which is supplied separately.
    pub fn from_symmetrized(u: &SymmetrizedState, psi_mean: Complex64) -> Self {
        let mut psi_hat: Vec<Complex64> = modes(u.n_max)
            .zip(&u.theta_hat)
            .map(|(n, t)| if n == 0 { ZERO } else { t / (n.unsigned_abs() as f64).sqrt() })
            .collect();
        psi_hat[u.n_max] = psi_mean;
        Self {
            n_max: u.n_max,
            eta_hat: u.eta_hat.clone(),
            psi_hat,
        }
    }
}

impl SymmetrizedState {
    pub fn zeros(n_max: usize) -> Self {
        Self {
            n_max,
            eta_hat: vec![ZERO; 2 * n_max + 1],
            theta_hat: vec![ZERO; 2 * n_max + 1],
        }
    }

    fn axpy(&self, a: f64, d: &SymmetrizedState) -> Self {
        Self {
            n_max: self.n_max,
            eta_hat: self.eta_hat.iter().zip(&d.eta_hat).map(|(x, y)| x + a * y).collect(),
            theta_hat: self.theta_hat.iter().zip(&d.theta_hat).map(|(x, y)| x + a * y).collect(),
        }
    }

    pub fn l2_norm(&self) -> f64 {
        inner(self, self).sqrt()
    }
}

/// Real part of `sum conj(u_n) v_n` over both components.
pub fn inner(u: &SymmetrizedState, v: &SymmetrizedState) -> f64 {
    let dot = |a: &[Complex64], b: &[Complex64]| a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum::<f64>();
    dot(&u.eta_hat, &v.eta_hat) + dot(&u.theta_hat, &v.theta_hat)
}

/// Fourier multipliers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Multiplier {
    /// `|n|`.
    AbsD,
    /// `sqrt|n|`.
    SqrtAbsD,
    /// `1/(i n)`, zero on `n = 0`.
    InvDx,
}

impl Multiplier {
    pub fn symbol(self, n: i64) -> Complex64 {
        let a = n.unsigned_abs() as f64;
        match self {
            Multiplier::AbsD => Complex64::new(a, 0.0),
            Multiplier::SqrtAbsD => Complex64::new(a.sqrt(), 0.0),
            Multiplier::InvDx if n == 0 => ZERO,
            Multiplier::InvDx => Complex64::new(0.0, -1.0 / n as f64),
        }
    }
}

/// Applies `op` to a coefficient vector of length `2N + 1`.
pub fn multiplier(op: Multiplier, coeffs: &[Complex64]) -> Vec<Complex64> {
    let n_max = coeffs.len() / 2;
    modes(n_max).zip(coeffs).map(|(n, c)| op.symbol(n) * c).collect()
}

/// Applies `op` to both fields of a state.
pub fn multiplier_state(op: Multiplier, state: &SpectralState) -> SpectralState {
    SpectralState {
        n_max: state.n_max,
        eta_hat: multiplier(op, &state.eta_hat),
        psi_hat: multiplier(op, &state.psi_hat),
    }
}

/// Points of the padded product grid, `M = 2 (2N + 1)`.
pub fn padded_len(n_max: usize) -> usize {
    2 * (2 * n_max + 1)
}

/// The `2N + 1` collocation points `2 pi j / (2N + 1)`.
pub fn collocation_points(n_max: usize) -> Vec<f64> {
    let m = 2 * n_max + 1;
    (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect()
}

/// Cutoff sampled on the padded grid; every other sample is a collocation point.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleCutoff {
    n_max: usize,
    samples: Vec<f64>,
}

impl CircleCutoff {
    pub fn from_samples(n_max: usize, samples: Vec<f64>) -> Result<Self> {
        let m = padded_len(n_max);
        if samples.len() != m {
            return Err(Error::ShapeMismatch(format!("expected {m} cutoff samples, got {}", samples.len())));
        }
        if let Some((index, &value)) = samples.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
            return Err(Error::NegativeCutoff { index, value });
        }
        Ok(Self { n_max, samples })
    }

    pub fn from_fn(n_max: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let m = padded_len(n_max);
        Self::from_samples(n_max, (0..m).map(|j| f(2.0 * PI * j as f64 / m as f64)).collect())
    }

    pub fn zero(n_max: usize) -> Self {
        Self {
            n_max,
            samples: vec![0.0; padded_len(n_max)],
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(|v| *v == 0.0)
    }
}

/// `L` and `P` for one cutoff, with cached FFT plans.
#[derive(Clone)]
pub struct CircleOperator {
    n_max: usize,
    chi: CircleCutoff,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CircleOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CircleOperator").field("n_max", &self.n_max).finish()
    }
}

impl CircleOperator {
    pub fn new(chi: CircleCutoff) -> Self {
        let m = padded_len(chi.n_max);
        let mut planner = FftPlanner::new();
        Self {
            n_max: chi.n_max,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
            chi,
        }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `L u = (-|D|^{1/2} theta, |D|^{1/2} eta)`.
    pub fn apply_l(&self, u: &SymmetrizedState) -> SymmetrizedState {
        let t = multiplier(Multiplier::SqrtAbsD, &u.theta_hat);
        SymmetrizedState {
            n_max: u.n_max,
            eta_hat: t.iter().map(|c| -c).collect(),
            theta_hat: multiplier(Multiplier::SqrtAbsD, &u.eta_hat),
        }
    }

    /// `-A (chi A theta)`; the product is formed on the padded grid.
    fn apply_p_theta(&self, theta: &[Complex64]) -> Vec<Complex64> {
        let n = self.n_max as i64;
        let m = padded_len(self.n_max);
        let at = multiplier(Multiplier::InvDx, &multiplier(Multiplier::SqrtAbsD, theta));
        let mut buf = vec![ZERO; m];
        for k in -n..=n {
            buf[k.rem_euclid(m as i64) as usize] = at[index(self.n_max, k)];
        }
        self.inverse.process(&mut buf);
        for (b, c) in buf.iter_mut().zip(&self.chi.samples) {
            *b *= c / m as f64;
        }
        self.forward.process(&mut buf);
        let prod: Vec<Complex64> = (-n..=n).map(|k| buf[k.rem_euclid(m as i64) as usize]).collect();
        multiplier(Multiplier::InvDx, &multiplier(Multiplier::SqrtAbsD, &prod))
            .into_iter()
            .map(|c| -c)
            .collect()
    }

    /// `P u = (0, -A (chi A theta))`.
    pub fn apply_p(&self, u: &SymmetrizedState) -> SymmetrizedState {
        SymmetrizedState {
            n_max: u.n_max,
            eta_hat: vec![ZERO; u.eta_hat.len()],
            theta_hat: if self.chi.is_zero() {
                vec![ZERO; u.theta_hat.len()]
            } else {
                self.apply_p_theta(&u.theta_hat)
            },
        }
    }

    /// `u_t = -L u - P u`.
    pub fn rate(&self, u: &SymmetrizedState) -> SymmetrizedState {
        let l = self.apply_l(u);
        let p = self.apply_p(u);
        SymmetrizedState {
            n_max: u.n_max,
            eta_hat: l.eta_hat.iter().zip(&p.eta_hat).map(|(a, b)| -(a + b)).collect(),
            theta_hat: l.theta_hat.iter().zip(&p.theta_hat).map(|(a, b)| -(a + b)).collect(),
        }
    }

    pub fn rk4_step(&self, u: &SymmetrizedState, dt: f64) -> SymmetrizedState {
        let k1 = self.rate(u);
        let k2 = self.rate(&u.axpy(0.5 * dt, &k1));
        let k3 = self.rate(&u.axpy(0.5 * dt, &k2));
        let k4 = self.rate(&u.axpy(dt, &k3));
        u.axpy(dt / 6.0, &k1)
            .axpy(dt / 3.0, &k2)
            .axpy(dt / 3.0, &k3)
            .axpy(dt / 6.0, &k4)
    }
}

/// The damping block applied to `u`; fails on a negative cutoff sample.
#[allow(non_snake_case)]
pub fn damping_operator_P(u: &SymmetrizedState, chi_samples: &[f64]) -> Result<SymmetrizedState> {
    let chi = CircleCutoff::from_samples(u.n_max, chi_samples.to_vec())?;
    Ok(CircleOperator::new(chi).apply_p(u))
}

fn check_regularity(s: f64) -> Result<()> {
    let two_s = 2.0 * s;
    if !(s >= 0.0) || (two_s - two_s.round()).abs() > 1e-12 {
        return Err(Error::InvalidConfig(format!("Sobolev index {s} must satisfy 2s in N")));
    }
    Ok(())
}

fn weighted_norm(c: &[Complex64], s: f64) -> f64 {
    let n_max = c.len() / 2;
    modes(n_max)
        .zip(c)
        .map(|(n, c)| (1.0 + (n * n) as f64).powf(s) * c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `(||eta||_{H^s}, ||psi||_{H^{s+1/2}})`.
pub fn sobolev_norm(state: &SpectralState, s: f64) -> Result<(f64, f64)> {
    check_regularity(s)?;
    Ok((weighted_norm(&state.eta_hat, s), weighted_norm(&state.psi_hat, s + 0.5)))
}

/// Stored trajectory of a circle run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleHistory {
    pub dt: f64,
    /// Steps between stored samples.
    pub stride: usize,
    pub times: Vec<f64>,
    /// `||u||`.
    pub l2: Vec<f64>,
    /// `||u_t||`.
    pub rate_norm: Vec<f64>,
    /// `(P u, u)`.
    pub damping_form: Vec<f64>,
    pub s_list: Vec<f64>,
    /// `||eta||_{H^s} + ||psi||_{H^{s+1/2}}` for each `s`, indexed `[s][sample]`.
    pub sobolev: Vec<Vec<f64>>,
    /// `||psi||_{H^1}` and `||psi||_{H^2}`.
    pub psi_h1: Vec<f64>,
    pub psi_h2: Vec<f64>,
}

/// Advances `state` by RK4 to `t_final`, storing every `stride` steps.
pub fn evolve_circle(
    state: &SpectralState,
    chi: &CircleCutoff,
    dt: f64,
    t_final: f64,
    s_list: &[f64],
    stride: usize,
) -> Result<(CircleHistory, SpectralState)> {
    state.validate()?;
    if chi.n_max != state.n_max {
        return Err(Error::ShapeMismatch(format!(
            "cutoff built for N = {}, state has N = {}",
            chi.n_max, state.n_max
        )));
    }
    if !(dt > 0.0) || dt * (state.n_max as f64).sqrt() > 1.0 + 1e-12 {
        return Err(Error::InvalidConfig(format!(
            "dt = {dt} violates dt sqrt(N) <= 1 for N = {}",
            state.n_max
        )));
    }
    if !(t_final >= 0.0) || stride == 0 {
        return Err(Error::InvalidConfig("t_final must be nonnegative and stride positive".into()));
    }
    for &s in s_list {
        check_regularity(s)?;
    }
    let op = CircleOperator::new(chi.clone());
    let steps = if t_final == 0.0 { 0 } else { (t_final / dt - 1e-9).ceil() as usize };
    let h = if steps == 0 { dt } else { t_final / steps as f64 };
    let psi_mean = state.psi_hat[state.n_max];
    let mut u = state.symmetrize();
    let mut hist = CircleHistory {
        dt: h,
        stride,
        times: Vec::new(),
        l2: Vec::new(),
        rate_norm: Vec::new(),
        damping_form: Vec::new(),
        s_list: s_list.to_vec(),
        sobolev: vec![Vec::new(); s_list.len()],
        psi_h1: Vec::new(),
        psi_h2: Vec::new(),
    };
    for k in 0..=steps {
        if k % stride == 0 || k == steps {
            let rate = op.rate(&u);
            let full = SpectralState::from_symmetrized(&u, psi_mean);
            hist.times.push(k as f64 * h);
            hist.l2.push(u.l2_norm());
            hist.rate_norm.push(rate.l2_norm());
            hist.damping_form.push(inner(&op.apply_p(&u), &u));
            for (col, &s) in hist.sobolev.iter_mut().zip(s_list) {
                let (a, b) = sobolev_norm(&full, s)?;
                col.push(a + b);
            }
            hist.psi_h1.push(weighted_norm(&full.psi_hat, 1.0));
            hist.psi_h2.push(weighted_norm(&full.psi_hat, 2.0));
        }
        if k < steps {
            u = op.rk4_step(&u, h);
        }
    }
    Ok((hist, SpectralState::from_symmetrized(&u, psi_mean)))
}

/// Worst `|d/dt ||u||^2 + 2 (P u, u)|` over a history, with fourth-order
/// differences. Samples must be equally spaced, so the final sample is
/// ignored when it falls off the stride.
pub fn energy_law_residual(hist: &CircleHistory) -> f64 {
    let sample_dt = hist.dt * hist.stride as f64;
    let mut n = hist.l2.len();
    if n >= 2 && (hist.times[n - 1] - hist.times[n - 2] - sample_dt).abs() > 1e-9 * sample_dt {
        n -= 1;
    }
    let e: Vec<f64> = hist.l2[..n].iter().map(|v| v * v).collect();
    if n < 5 {
        return 0.0;
    }
    let dt = sample_dt;
    let mut worst = 0.0_f64;
    for k in 0..n {
        let d = if k >= 2 && k + 2 < n {
            -e[k + 2] + 8.0 * e[k + 1] - 8.0 * e[k - 1] + e[k - 2]
        } else if k < 2 {
            let f = |j: usize| e[j];
            if k == 0 {
                -25.0 * f(0) + 48.0 * f(1) - 36.0 * f(2) + 16.0 * f(3) - 3.0 * f(4)
            } else {
                -3.0 * f(0) - 10.0 * f(1) + 18.0 * f(2) - 6.0 * f(3) + f(4)
            }
        } else {
            let f = |j: usize| e[n - 1 - j];
            if k == n - 1 {
                25.0 * f(0) - 48.0 * f(1) + 36.0 * f(2) - 16.0 * f(3) + 3.0 * f(4)
            } else {
                3.0 * f(0) + 10.0 * f(1) - 18.0 * f(2) + 6.0 * f(3) - f(4)
            }
        } / (12.0 * dt);
        worst = worst.max((d + 2.0 * hist.damping_form[k]).abs());
    }
    worst
}

/// Supremum ratios for one regularity index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolevRatio {
    pub s: f64,
    /// `sup_{t <= T} N_s(t) / N_s(0)` on `[0, T_long]`.
    pub ratio_t: f64,
    /// Same on `[0, 2 T_long]`.
    pub ratio_2t: f64,
    /// `|ratio_2t / ratio_t - 1|`.
    pub relative_change: f64,
}

/// Frequency-localization ratios: the run side against the initial-data side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationRatio {
    /// Sobolev order of `psi` on the run side (1 or 2).
    pub order: f64,
    /// `sup_t ||psi(t)||_{H^order} / ||u(0)||`, on `[0, T]` and `[0, 2T]`.
    pub run_t: f64,
    pub run_2t: f64,
    /// `||(eta_0, psi_0)||_{H^{order-1/2} x H^order} / ||(eta_0, psi_0)||_{L^2 x H^{1/2}-dot}`.
    pub initial: f64,
    /// `run / initial` on both horizons.
    pub constant_t: f64,
    pub constant_2t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformBoundReport {
    pub n_max: usize,
    pub dt: f64,
    pub t_long: f64,
    pub ratios: Vec<SobolevRatio>,
    /// `sup_t ||u_t(t)|| / ||u_t(0)||`; at most 1 up to integrator error.
    pub commuted_ratio: f64,
    /// `sup_t ||u(t)|| / ||u(0)||`.
    pub l2_ratio: f64,
    /// [`energy_law_residual`] of the run.
    pub energy_law_residual: f64,
    pub localization: Vec<LocalizationRatio>,
}

fn sup_until(times: &[f64], v: &[f64], t: f64) -> f64 {
    times
        .iter()
        .zip(v)
        .filter(|(s, _)| **s <= t + 1e-9)
        .fold(f64::NEG_INFINITY, |m, (_, v)| m.max(*v))
}

/// Runs to `2 T_long` and reports the supremum ratios on both horizons.
pub fn uniform_bound_experiment(
    initial: &SpectralState,
    chi: &CircleCutoff,
    s_list: &[f64],
    t_long: f64,
    dt: f64,
) -> Result<UniformBoundReport> {
    if !(t_long > 0.0) {
        return Err(Error::InvalidConfig("T_long must be positive".into()));
    }
    let (hist, _) = evolve_circle(initial, chi, dt, 2.0 * t_long, s_list, 1)?;
    uniform_bound_from_history(&hist, initial, t_long)
}

/// Report for a history that covers `[0, 2 T_long]` at every step.
pub fn uniform_bound_from_history(
    hist: &CircleHistory,
    initial: &SpectralState,
    t_long: f64,
) -> Result<UniformBoundReport> {
    let t_end = *hist.times.last().unwrap_or(&0.0);
    if !(t_long > 0.0) || t_end < 2.0 * t_long - 1e-9 {
        return Err(Error::InvalidConfig(format!(
            "history ends at {t_end}, before 2 T_long = {}",
            2.0 * t_long
        )));
    }
    let ratios = hist
        .s_list
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let col = &hist.sobolev[i];
            let r1 = sup_until(&hist.times, col, t_long) / col[0];
            let r2 = sup_until(&hist.times, col, 2.0 * t_long) / col[0];
            SobolevRatio {
                s,
                ratio_t: r1,
                ratio_2t: r2,
                relative_change: (r2 / r1 - 1.0).abs(),
            }
        })
        .collect();
    let rate0 = hist.rate_norm[0];
    let commuted_ratio = if rate0 > 0.0 {
        hist.rate_norm.iter().fold(0.0_f64, |m, v| m.max(*v)) / rate0
    } else {
        1.0
    };
    let l2_0 = hist.l2[0];
    if !(l2_0 > 0.0) {
        return Err(Error::ZeroEnergy);
    }
    let l2_ratio = hist.l2.iter().fold(0.0_f64, |m, v| m.max(*v)) / l2_0;

    let base = l2_0;
    let localization = [1.0, 2.0]
        .into_iter()
        .enumerate()
        .map(|(j, order)| {
            let initial_ratio =
                (weighted_norm(&initial.eta_hat, order - 0.5) + weighted_norm(&initial.psi_hat, order))
                    / (weighted_norm(&initial.eta_hat, 0.0) + base_theta(initial));
            let col = if j == 0 { &hist.psi_h1 } else { &hist.psi_h2 };
            let run_t = sup_until(&hist.times, col, t_long) / base;
            let run_2t = sup_until(&hist.times, col, 2.0 * t_long) / base;
            LocalizationRatio {
                order,
                run_t,
                run_2t,
                initial: initial_ratio,
                constant_t: run_t / initial_ratio,
                constant_2t: run_2t / initial_ratio,
            }
        })
        .collect();
    Ok(UniformBoundReport {
        n_max: initial.n_max,
        dt: hist.dt,
        t_long,
        ratios,
        commuted_ratio,
        l2_ratio,
        energy_law_residual: energy_law_residual(hist),
        localization,
    })
}

/// `||psi||_{H^{1/2}-dot} = ||theta||`.
fn base_theta(state: &SpectralState) -> f64 {
    multiplier(Multiplier::SqrtAbsD, &state.psi_hat)
        .iter()
        .map(|c| c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}
