#![allow(dead_code)]

use beachlab::dynamics::CosineMode;
use beachlab::{DampingLaw, ExpFilter, InitialCondition, Model, SimConfig, SimGrid, TankGeometry};

pub fn geo() -> TankGeometry {
    TankGeometry::new(20.0, 1.0, 9.81).unwrap()
}

pub fn config(nx: usize, ny: usize, dt: f64, t_final: f64) -> SimConfig {
    SimConfig {
        geo: geo(),
        grid: SimGrid::new(nx, ny).unwrap(),
        beach_delta: Some(8.0),
        dt,
        t_final,
        model: Model::Nonlinear,
        damping: DampingLaw::Off,
        ic: InitialCondition::default(),
        sample_stride: 1,
        filter: Some(ExpFilter::default()),
    }
}

pub fn eta_mode(cfg: SimConfig, n: usize, amplitude: f64) -> SimConfig {
    SimConfig {
        ic: InitialCondition {
            eta_modes: vec![CosineMode { n, amplitude }],
            ..Default::default()
        },
        ..cfg
    }
}

pub fn damped(cfg: SimConfig) -> SimConfig {
    SimConfig {
        damping: DampingLaw::DepthIntegrated,
        ..cfg
    }
}

pub fn linear(cfg: SimConfig) -> SimConfig {
    SimConfig {
        model: Model::LinearTank,
        ..cfg
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}
