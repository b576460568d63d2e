//! Tank geometry, the uniform `(x, s)` grid and node-sampled fields.
//!
//! The fluid domain `{0 <= x <= L, -h <= y <= eta(x)}` is flattened onto the
//! rectangle `[0, L] x [0, 1]` by the sigma mapping `y = -h + s (h + eta(x))`.
//! Horizontal nodes are `x_i = i L / nx` and vertical levels `s_j = j / ny`,
//! with `s = 0` the bottom and `s = 1` the free surface.

use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical tank: length `L`, rest depth `h` and gravity `g` (SI units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TankGeometry {
    pub length: f64,
    pub depth: f64,
    pub gravity: f64,
}

impl TankGeometry {
    pub fn new(length: f64, depth: f64, gravity: f64) -> Result<Self> {
        let geo = Self {
            length,
            depth,
            gravity,
        };
        geo.validate()?;
        Ok(geo)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("length", self.length),
            ("depth", self.depth),
            ("gravity", self.gravity),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidGeometry(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Linear dispersion relation `omega(k) = sqrt(g k tanh(k h))`.
    pub fn omega(&self, k: f64) -> f64 {
        (self.gravity * k * (k * self.depth).tanh()).sqrt()
    }

    /// Wavenumber of the `n`-th cosine mode of the tank.
    pub fn mode_wavenumber(&self, n: usize) -> f64 {
        n as f64 * std::f64::consts::PI / self.length
    }

    /// Period of the `n`-th standing mode.
    pub fn mode_period(&self, n: usize) -> f64 {
        2.0 * std::f64::consts::PI / self.omega(self.mode_wavenumber(n))
    }
}

/// Uniform grid on the mapped rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimGrid {
    pub nx: usize,
    pub ny: usize,
}

impl SimGrid {
    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        let grid = Self { nx, ny };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 8 {
            return Err(Error::InvalidGrid(format!("nx = {} < 8", self.nx)));
        }
        if self.ny < 4 {
            return Err(Error::InvalidGrid(format!("ny = {} < 4", self.ny)));
        }
        Ok(())
    }

    /// Number of horizontal nodes, walls included.
    pub fn nodes_x(&self) -> usize {
        self.nx + 1
    }

    /// Number of sigma levels, bottom and surface included.
    pub fn levels(&self) -> usize {
        self.ny + 1
    }

    pub fn dx(&self, geo: &TankGeometry) -> f64 {
        geo.length / self.nx as f64
    }

    pub fn ds(&self) -> f64 {
        1.0 / self.ny as f64
    }

    pub fn x(&self, geo: &TankGeometry, i: usize) -> f64 {
        i as f64 * self.dx(geo)
    }

    pub fn s(&self, j: usize) -> f64 {
        j as f64 / self.ny as f64
    }

    pub fn x_nodes(&self, geo: &TankGeometry) -> GridFunction1D {
        GridFunction1D::from_fn(self, geo, |x| x)
    }

    /// Trapezoid weights in `x` (half weight on the walls).
    pub fn x_weights(&self, geo: &TankGeometry) -> Vec<f64> {
        trapezoid_weights(self.nx, self.dx(geo))
    }

    /// Trapezoid weights in `s`.
    pub fn s_weights(&self) -> Vec<f64> {
        trapezoid_weights(self.ny, self.ds())
    }

    /// Largest wavenumber carried by the horizontal grid.
    pub fn max_wavenumber(&self, geo: &TankGeometry) -> f64 {
        self.nx as f64 * std::f64::consts::PI / geo.length
    }

    /// Grid with both counts doubled.
    pub fn refined(&self) -> Self {
        Self {
            nx: 2 * self.nx,
            ny: 2 * self.ny,
        }
    }
}

pub(crate) fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n + 1];
    w[0] = 0.5 * h;
    w[n] = 0.5 * h;
    w
}

/// Samples of a function of `x` on the `nx + 1` horizontal nodes.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GridFunction1D(Vec<f64>);

impl GridFunction1D {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self(vec![c; n])
    }

    pub fn from_fn(grid: &SimGrid, geo: &TankGeometry, f: impl Fn(f64) -> f64) -> Self {
        let dx = grid.dx(geo);
        Self((0..=grid.nx).map(|i| f(i as f64 * dx)).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn check_finite(&self, what: &'static str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite(what))
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self(self.0.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Self(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    /// `self + a * other`
    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        self.zip_map(other, |u, v| u + a * v)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_map(other, |u, v| u * v)
    }
}

impl Deref for GridFunction1D {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for GridFunction1D {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for GridFunction1D {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl FromIterator<f64> for GridFunction1D {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Samples on the mapped rectangle, stored level by level: entry `(i, j)`
/// lives at `j * (nx + 1) + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction2D {
    nodes_x: usize,
    levels: usize,
    data: Vec<f64>,
}

impl GridFunction2D {
    pub fn zeros(grid: &SimGrid) -> Self {
        Self {
            nodes_x: grid.nodes_x(),
            levels: grid.levels(),
            data: vec![0.0; grid.nodes_x() * grid.levels()],
        }
    }

    /// Samples `f(x, s)` on every node.
    pub fn from_fn(grid: &SimGrid, geo: &TankGeometry, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut out = Self::zeros(grid);
        for j in 0..grid.levels() {
            let s = grid.s(j);
            for (i, v) in out.level_mut(j).iter_mut().enumerate() {
                *v = f(grid.x(geo, i), s);
            }
        }
        out
    }

    pub fn nodes_x(&self) -> usize {
        self.nodes_x
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.nodes_x + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.nodes_x + i] = v;
    }

    pub fn level(&self, j: usize) -> &[f64] {
        &self.data[j * self.nodes_x..(j + 1) * self.nodes_x]
    }

    pub fn level_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.nodes_x..(j + 1) * self.nodes_x]
    }

    /// Vertical line at horizontal node `i`.
    pub fn column(&self, i: usize) -> Vec<f64> {
        (0..self.levels).map(|j| self.get(i, j)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.data.len(), other.data.len());
        Self {
            nodes_x: self.nodes_x,
            levels: self.levels,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            nodes_x: self.nodes_x,
            levels: self.levels,
            data: self.data.iter().map(|&a| f(a)).collect(),
        }
    }
}
