//! Cosine/sine spectral calculus on the wall-bounded interval `[0, L]`.
//!
//! Node data on `x_i = i L / nx` is extended to the `2L`-periodic line, evenly
//! for cosine-type data (Neumann walls) or oddly for sine-type data (data that
//! vanishes on the walls), and differentiated with a length-`2 nx` FFT. The
//! highest cosine mode `cos(nx pi x / L)` has a derivative that vanishes on
//! every node, so it is dropped by differentiation and by integration.
//!
//! With this convention the derivative matrix is exactly skew-adjoint for
//! the trapezoid inner product between cosine-type and sine-type data, which
//! the elliptic solver relies on.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{GridFunction1D, TankGeometry};

/// Reflection symmetry of node data about the walls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// Cosine series; zero slope on the walls.
    Even,
    /// Sine series; zero value on the walls.
    Odd,
}

impl Parity {
    pub fn flip(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// FFT plans and wavenumbers for one horizontal resolution.
#[derive(Clone)]
pub struct CosineSpectrum {
    nx: usize,
    length: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Signed wavenumber of each FFT bin, zero on the Nyquist bin.
    wavenumbers: Vec<f64>,
}

impl std::fmt::Debug for CosineSpectrum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CosineSpectrum")
            .field("nx", &self.nx)
            .field("length", &self.length)
            .finish()
    }
}

impl CosineSpectrum {
    pub fn new(nx: usize, length: f64) -> Self {
        assert!(nx >= 2, "need at least two intervals");
        let mut planner = FftPlanner::new();
        let m = 2 * nx;
        let forward = planner.plan_fft_forward(m);
        let inverse = planner.plan_fft_inverse(m);
        let dk = PI / length;
        let wavenumbers = (0..m)
            .map(|b| {
                if b < nx {
                    b as f64 * dk
                } else if b == nx {
                    0.0
                } else {
                    (b as f64 - m as f64) * dk
                }
            })
            .collect();
        Self {
            nx,
            length,
            forward,
            inverse,
            wavenumbers,
        }
    }

    pub fn for_geometry(nx: usize, geo: &TankGeometry) -> Self {
        Self::new(nx, geo.length)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Wavenumber `m pi / L` of cosine mode `m`, `0 <= m <= nx`.
    pub fn mode_wavenumber(&self, m: usize) -> f64 {
        m as f64 * PI / self.length
    }

    /// Scratch buffer sized for the transforms.
    pub fn buffer(&self) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); 2 * self.nx]
    }

    /// Fills `buf` with the periodic extension of `a + i b`.
    fn extend_pair(&self, a: &[f64], b: Option<&[f64]>, parity: Parity, buf: &mut [Complex64]) {
        let n = self.nx;
        let sg = parity.sign();
        for i in 0..=n {
            let im = b.map_or(0.0, |b| b[i]);
            buf[i] = Complex64::new(a[i], im);
        }
        if parity == Parity::Odd {
            buf[0] = Complex64::new(0.0, 0.0);
            buf[n] = Complex64::new(0.0, 0.0);
        }
        for i in 1..n {
            buf[2 * n - i] = buf[i] * sg;
        }
    }

    fn extract_pair(&self, buf: &[Complex64], parity: Parity, a: &mut [f64], b: Option<&mut [f64]>) {
        let n = self.nx;
        let scale = 1.0 / (2 * n) as f64;
        for i in 0..=n {
            a[i] = buf[i].re * scale;
        }
        if let Some(b) = b {
            for i in 0..=n {
                b[i] = buf[i].im * scale;
            }
            if parity == Parity::Odd {
                b[0] = 0.0;
                b[n] = 0.0;
            }
        }
        if parity == Parity::Odd {
            a[0] = 0.0;
            a[n] = 0.0;
        }
    }

    /// Applies the spectral multiplier `symbol(k)` (indexed by signed
    /// wavenumber) to `a` and, optionally, `b` in one complex transform.
    /// The symbol must map real even/odd data to real data.
    fn multiply_pair(
        &self,
        a: &[f64],
        b: Option<&[f64]>,
        parity_in: Parity,
        parity_out: Parity,
        symbol: impl Fn(usize, f64) -> Complex64,
        out_a: &mut [f64],
        out_b: Option<&mut [f64]>,
        buf: &mut [Complex64],
    ) {
        self.extend_pair(a, b, parity_in, buf);
        self.forward.process(buf);
        for (bin, (v, &k)) in buf.iter_mut().zip(&self.wavenumbers).enumerate() {
            *v *= symbol(bin, k);
        }
        self.inverse.process(buf);
        self.extract_pair(buf, parity_out, out_a, out_b);
    }

    /// `d/dx` of `f` with the given parity; the output has the opposite parity.
    pub fn derivative_into(&self, f: &[f64], parity: Parity, out: &mut [f64], buf: &mut [Complex64]) {
        self.multiply_pair(
            f,
            None,
            parity,
            parity.flip(),
            |_, k| Complex64::new(0.0, k),
            out,
            None,
            buf,
        );
    }

    /// Differentiates two arrays of equal parity with a single transform.
    pub fn derivative_pair_into(
        &self,
        a: &[f64],
        b: &[f64],
        parity: Parity,
        out_a: &mut [f64],
        out_b: &mut [f64],
        buf: &mut [Complex64],
    ) {
        self.multiply_pair(
            a,
            Some(b),
            parity,
            parity.flip(),
            |_, k| Complex64::new(0.0, k),
            out_a,
            Some(out_b),
            buf,
        );
    }

    pub fn derivative(&self, f: &[f64], parity: Parity) -> GridFunction1D {
        let mut out = vec![0.0; self.nx + 1];
        let mut buf = self.buffer();
        self.derivative_into(f, parity, &mut out, &mut buf);
        out.into()
    }

    /// Second derivative of cosine-type data.
    pub fn second_derivative(&self, f: &[f64]) -> GridFunction1D {
        let mut out = vec![0.0; self.nx + 1];
        let mut buf = self.buffer();
        self.multiply_pair(
            f,
            None,
            Parity::Even,
            Parity::Even,
            |_, k| Complex64::new(-k * k, 0.0),
            &mut out,
            None,
            &mut buf,
        );
        out.into()
    }

    /// Applies a real, even Fourier symbol `sym(|k|)` to cosine-type data. The
    /// Nyquist mode is multiplied by `sym(nx pi / L)`.
    pub fn even_multiplier(&self, f: &[f64], sym: impl Fn(f64) -> f64) -> GridFunction1D {
        let mut out = vec![0.0; self.nx + 1];
        let mut buf = self.buffer();
        let k_nyquist = self.nx as f64 * PI / self.length;
        let nx = self.nx;
        self.multiply_pair(
            f,
            None,
            Parity::Even,
            Parity::Even,
            |bin, k| {
                let kk = if bin == nx { k_nyquist } else { k.abs() };
                Complex64::new(sym(kk), 0.0)
            },
            &mut out,
            None,
            &mut buf,
        );
        out.into()
    }

    /// Primitive of `f`.
    ///
    /// Even input must have zero trapezoid mean and yields the odd primitive
    /// vanishing at `x = 0`. Odd input must vanish on the walls and yields the
    /// even primitive with zero mean. Both conditions are checked to `1e-8`
    /// relative to `max |f|`, which leaves room for iterative solver error;
    /// the residual mean is discarded.
    pub fn antiderivative(&self, f: &[f64], parity: Parity) -> Result<GridFunction1D> {
        let scale = f.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return Ok(GridFunction1D::zeros(self.nx + 1));
        }
        match parity {
            Parity::Even => {
                let mean = trapezoid_mean(f);
                if mean.abs() > 1e-8 * scale {
                    return Err(Error::NonzeroMean { mean, scale });
                }
            }
            Parity::Odd => {
                let (left, right) = (f[0], f[self.nx]);
                if left.abs().max(right.abs()) > 1e-8 * scale {
                    return Err(Error::WallMismatch { left, right });
                }
            }
        }
        let mut out = vec![0.0; self.nx + 1];
        let mut buf = self.buffer();
        self.multiply_pair(
            f,
            None,
            parity,
            parity.flip(),
            |_, k| {
                if k == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, -1.0 / k)
                }
            },
            &mut out,
            None,
            &mut buf,
        );
        Ok(out.into())
    }

    /// Cosine coefficients of two arrays at once: `ca[m]`, `cb[m]` for
    /// `m = 0..=nx`, unnormalized (the raw FFT of the even extension).
    pub fn cosine_coefficients_pair(
        &self,
        a: &[f64],
        b: &[f64],
        ca: &mut [f64],
        cb: &mut [f64],
        buf: &mut [Complex64],
    ) {
        self.extend_pair(a, Some(b), Parity::Even, buf);
        self.forward.process(buf);
        for m in 0..=self.nx {
            ca[m] = buf[m].re;
            cb[m] = buf[m].im;
        }
    }

    /// Inverse of [`Self::cosine_coefficients_pair`].
    pub fn from_cosine_coefficients_pair(
        &self,
        ca: &[f64],
        cb: &[f64],
        a: &mut [f64],
        b: &mut [f64],
        buf: &mut [Complex64],
    ) {
        let n = self.nx;
        for m in 0..=n {
            buf[m] = Complex64::new(ca[m], cb[m]);
        }
        for m in 1..n {
            buf[2 * n - m] = buf[m];
        }
        self.inverse.process(buf);
        self.extract_pair(buf, Parity::Even, a, Some(b));
    }
}

/// Trapezoid mean on uniform nodes.
fn trapezoid_mean(f: &[f64]) -> f64 {
    let n = f.len() - 1;
    let inner: f64 = f[1..n].iter().sum();
    (inner + 0.5 * (f[0] + f[n])) / n as f64
}

/// Spectral `d/dx` of cosine-type data on the tank grid.
pub fn dct_derivative(f: &GridFunction1D, geo: &TankGeometry) -> GridFunction1D {
    CosineSpectrum::new(f.len() - 1, geo.length).derivative(f, Parity::Even)
}

/// Mean-zero primitive of sine-type data (data vanishing on both walls),
/// as used for the beach pressure.
pub fn dct_antiderivative_meanzero(f: &GridFunction1D, geo: &TankGeometry) -> Result<GridFunction1D> {
    CosineSpectrum::new(f.len() - 1, geo.length).antiderivative(f, Parity::Odd)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nodes(n: usize, l: f64) -> Vec<f64> {
        (0..=n).map(|i| i as f64 * l / n as f64).collect()
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let sp = CosineSpectrum::new(16, 3.0);
        let d = sp.derivative(&[2.5; 17], Parity::Even);
        assert!(d.max_abs() < 1e-13);
    }

    #[test]
    fn cosine_mode_derivative_is_spectral() {
        let l = 7.0;
        let n = 64;
        let sp = CosineSpectrum::new(n, l);
        let x = nodes(n, l);
        for mode in [1, 3, 10] {
            let k = mode as f64 * PI / l;
            let f: Vec<f64> = x.iter().map(|&x| (k * x).cos()).collect();
            let d = sp.derivative(&f, Parity::Even);
            for (xi, di) in x.iter().zip(d.iter()) {
                assert!((di + k * (k * xi).sin()).abs() < 1e-8 * k, "mode {mode}");
            }
        }
    }

    #[test]
    fn sine_primitive_is_mean_zero_cosine() {
        let l = 4.0;
        let n = 32;
        let sp = CosineSpectrum::new(n, l);
        let x = nodes(n, l);
        let k = PI / l;
        let f: Vec<f64> = x.iter().map(|&x| -k * (k * x).sin()).collect();
        let p = sp.antiderivative(&f, Parity::Odd).unwrap();
        for (xi, pi) in x.iter().zip(p.iter()) {
            assert!((pi - (k * xi).cos()).abs() < 1e-12);
        }
        assert!(trapezoid_mean(&p).abs() < 1e-14);
    }

    #[test]
    fn even_primitive_rejects_nonzero_mean() {
        let sp = CosineSpectrum::new(16, 1.0);
        let err = sp.antiderivative(&[1.0; 17], Parity::Even).unwrap_err();
        assert!(matches!(err, Error::NonzeroMean { .. }));
    }

    #[test]
    fn odd_primitive_rejects_wall_values() {
        let sp = CosineSpectrum::new(16, 1.0);
        let mut f = vec![0.0; 17];
        f[0] = 1.0;
        f[5] = 2.0;
        assert!(matches!(
            sp.antiderivative(&f, Parity::Odd),
            Err(Error::WallMismatch { .. })
        ));
    }

    #[test]
    fn derivative_is_skew_adjoint_for_trapezoid() {
        let n = 24;
        let l = 2.0;
        let sp = CosineSpectrum::new(n, l);
        let x = nodes(n, l);
        let u: Vec<f64> = x.iter().map(|&x| (1.3 * x).exp() * (0.2 + x * x)).collect();
        let mut v: Vec<f64> = x.iter().map(|&x| (3.0 * x).sin() + x * x).collect();
        v[0] = 0.0;
        v[n] = 0.0;
        let du = sp.derivative(&u, Parity::Even);
        let dv = sp.derivative(&v, Parity::Odd);
        let w = crate::grid::trapezoid_weights(n, l / n as f64);
        let lhs: f64 = (0..=n).map(|i| w[i] * v[i] * du[i]).sum();
        let rhs: f64 = (0..=n).map(|i| w[i] * dv[i] * u[i]).sum();
        assert!((lhs + rhs).abs() < 1e-11 * lhs.abs().max(1.0));
    }

    #[test]
    fn coefficient_round_trip() {
        let sp = CosineSpectrum::new(10, 1.0);
        let a: Vec<f64> = (0..=10).map(|i| (i as f64).sqrt()).collect();
        let b: Vec<f64> = (0..=10).map(|i| (i as f64 * 0.3).cos()).collect();
        let (mut ca, mut cb) = (vec![0.0; 11], vec![0.0; 11]);
        let mut buf = sp.buffer();
        sp.cosine_coefficients_pair(&a, &b, &mut ca, &mut cb, &mut buf);
        let (mut a2, mut b2) = (vec![0.0; 11], vec![0.0; 11]);
        sp.from_cosine_coefficients_pair(&ca, &cb, &mut a2, &mut b2, &mut buf);
        for i in 0..=10 {
            assert!((a[i] - a2[i]).abs() < 1e-13);
            assert!((b[i] - b2[i]).abs() < 1e-13);
        }
    }
}
