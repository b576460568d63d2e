mod common;

use beachlab::damping::{
    cumulative_damping_bound, damping_power, pressure_from_flux, pressure_from_vbar, PressureField,
};
use beachlab::dynamics::CosineMode;
use beachlab::multipliers::{decay_constants, derived_multipliers};
use beachlab::{simulate, trapezoid_1d, BeachProfile, Dynamics, Error, InitialCondition, SimConfig, SurfaceState};
use common::*;
use proptest::prelude::*;

fn state(cfg: &SimConfig, eta: &[(usize, f64)], psi: &[(usize, f64)]) -> SurfaceState {
    let modes = |m: &[(usize, f64)]| m.iter().map(|&(n, amplitude)| CosineMode { n, amplitude }).collect();
    InitialCondition {
        eta_modes: modes(eta),
        psi_modes: modes(psi),
        bump: None,
    }
    .build(&cfg.geo, &cfg.grid)
    .unwrap()
}

#[test]
fn beach_shape() {
    let cfg = config(256, 8, 0.01, 0.0);
    let (geo, grid) = (cfg.geo, cfg.grid);
    let delta = 8.0;
    let b = BeachProfile::build(&geo, &grid, delta).unwrap();
    let n = grid.nodes_x();
    assert_eq!((b.chi[0], b.chi[n - 1], b.m[0], b.m[n - 1]), (0.0, 1.0, 0.0, 0.0));
    // L - delta/2 = 16 is node 204.8; check the plateau nodes on either side
    for i in 0..n {
        let x = grid.x(&geo, i);
        if x <= geo.length - 0.5 * delta {
            assert!((b.m[i] - x).abs() < 1e-12 && (b.m_x[i] - 1.0).abs() < 1e-12, "x = {x}");
        }
        if x <= geo.length - delta || x >= geo.length - 0.5 * delta {
            assert!(b.chi_x[i].abs() < 1e-12, "x = {x}");
        }
        assert!((0.0..=1.0).contains(&b.chi[i]));
    }
    assert_eq!(b.sup_chi(), 1.0);
    assert!(matches!(BeachProfile::build(&geo, &grid, 10.0), Err(Error::BadBeach { .. })));
    assert!(matches!(BeachProfile::build(&geo, &grid, 0.0), Err(Error::BadBeach { .. })));
}

#[test]
fn multipliers_of_rest_vanish() {
    let cfg = config(64, 8, 0.1, 0.0);
    let dy = Dynamics::new(&cfg).unwrap();
    let d = derived_multipliers(dy.spectrum(), &SurfaceState::rest(&cfg.grid), dy.beach().unwrap(), &cfg.geo);
    for f in [&d.zeta, &d.rho, &d.rho_x, &d.psi1, &d.psi2] {
        assert_eq!(max_abs(f), 0.0);
    }
}

#[test]
fn identity_weight_multipliers() {
    let cfg = config(64, 8, 0.1, 0.0);
    let dy = Dynamics::new(&cfg).unwrap();
    let w = BeachProfile::identity_weight(&cfg.geo, &cfg.grid);
    let s = state(&cfg, &[(1, 0.01), (3, 0.004)], &[(2, 0.1)]);
    let d = derived_multipliers(dy.spectrum(), &s, &w, &cfg.geo);
    let expect: Vec<f64> = s.eta.iter().map(|e| 1.75 * e).collect();
    assert!(max_abs_diff(&d.rho, &expect) < 1e-15);
    // C(m) = sup m + (L/2) |1/2 - 1|
    assert!((w.c_m(&cfg.geo) - 1.25 * cfg.geo.length).abs() < 1e-12);
}

#[test]
fn zeta_on_the_plateau() {
    let cfg = config(128, 8, 0.05, 0.0);
    let dy = Dynamics::new(&cfg).unwrap();
    let beach = dy.beach().unwrap();
    let s = state(&cfg, &[(1, 0.01), (2, 0.004)], &[]);
    let d = derived_multipliers(dy.spectrum(), &s, beach, &cfg.geo);
    let k = |n: f64| n * std::f64::consts::PI / cfg.geo.length;
    for i in 0..cfg.grid.nodes_x() {
        let x = cfg.grid.x(&cfg.geo, i);
        if x > cfg.geo.length - 4.0 {
            continue;
        }
        // d/dx (x eta) - eta/4 for eta = 0.01 cos(k1 x) + 0.004 cos(k2 x)
        let eta = 0.01 * (k(1.0) * x).cos() + 0.004 * (k(2.0) * x).cos();
        let eta_x = -0.01 * k(1.0) * (k(1.0) * x).sin() - 0.004 * k(2.0) * (k(2.0) * x).sin();
        let expect = eta + x * eta_x - 0.25 * eta;
        assert!((d.zeta[i] - expect).abs() < 1e-12, "x = {x}");
    }
}

#[test]
fn decay_constants_need_energy() {
    let cfg = config(32, 8, 0.1, 0.0);
    let b = BeachProfile::build(&cfg.geo, &cfg.grid, 8.0).unwrap();
    let rest = SurfaceState::rest(&cfg.grid);
    assert!(matches!(
        decay_constants([&rest], &b, &cfg.geo, &cfg.grid, 0.0, 0.1),
        Err(Error::ZeroEnergy)
    ));
}

#[test]
fn slope_constant_is_linear_in_amplitude() {
    let run = |a: f64| {
        let cfg = linear(damped(eta_mode(config(64, 16, 0.1, 4.0), 1, a)));
        let h = simulate(&cfg).unwrap();
        let b = BeachProfile::build(&cfg.geo, &cfg.grid, 8.0).unwrap();
        decay_constants(&h.states, &b, &cfg.geo, &cfg.grid, h.h0(), 0.1).unwrap()
    };
    let (c1, c2) = (run(0.02), run(0.01));
    assert!((c1.c / c2.c - 2.0).abs() < 0.2, "{} {}", c1.c, c2.c);
    assert!(c1.admissible && c2.admissible);
    // N_1 and N_2 are normalized by sqrt(H(0)), so they do not scale
    assert!((c1.n1t / c2.n1t - 1.0).abs() < 1e-6);
}

#[test]
fn rest_has_no_pressure() {
    let cfg = damped(config(32, 8, 0.1, 0.0));
    let mut dy = Dynamics::new(&cfg).unwrap();
    let k = dy.rhs(&SurfaceState::rest(&cfg.grid)).unwrap();
    let p = pressure_from_vbar(dy.spectrum(), &k.traces, dy.beach().unwrap()).unwrap();
    assert_eq!(p, PressureField::zeros(33));
    assert_eq!(k.pressure, PressureField::zeros(33));
}

#[test]
fn constant_potential_has_no_pressure() {
    let cfg = damped(config(64, 16, 0.1, 0.0));
    let mut dy = Dynamics::new(&cfg).unwrap();
    let s = state(&cfg, &[(1, 0.02)], &[(0, 0.7)]);
    let k = dy.rhs(&s).unwrap();
    let p = pressure_from_flux(dy.spectrum(), &k.traces, dy.beach().unwrap()).unwrap();
    assert!(max_abs(&p.p) < 1e-12 && max_abs(&p.dp) < 1e-12);
}

#[test]
fn pressure_forms_agree() {
    let cfg = damped(config(128, 32, 0.05, 0.0));
    let mut dy = Dynamics::new(&cfg).unwrap();
    let s = state(&cfg, &[(1, 0.03), (4, 0.01)], &[(2, 0.2), (5, 0.05)]);
    let k = dy.rhs(&s).unwrap();
    let beach = dy.beach().unwrap().clone();
    let a = pressure_from_vbar(dy.spectrum(), &k.traces, &beach).unwrap();
    let b = pressure_from_flux(dy.spectrum(), &k.traces, &beach).unwrap();
    let scale = max_abs(&a.dp);
    assert!(max_abs_diff(&a.dp, &b.dp) < 1e-6 * scale);
    assert!(max_abs_diff(&a.p, &b.p) < 1e-6 * scale * cfg.geo.length);
    // the slope vanishes at the far wall by zero net flux
    assert!(b.dp[cfg.grid.nx].abs() < 1e-10 * scale);
    // P has zero mean
    assert!(trapezoid_1d(&a.p, cfg.grid.dx(&cfg.geo)).abs() < 1e-12 * scale * 400.0);
}

#[test]
fn damping_budget_of_silent_and_growing_runs() {
    let cfg = damped(eta_mode(config(64, 16, 0.1, 6.0), 1, 0.02));
    let h = simulate(&cfg).unwrap();
    let dx = cfg.grid.dx(&cfg.geo);
    let dps: Vec<_> = h.pressures.iter().map(|p| p.dp.clone()).collect();
    let mut last = 0.0;
    for end in [2, 10, 30, 61] {
        let b = cumulative_damping_bound(&h.times[..end], &dps[..end], dx, 1.0, h.h0()).unwrap();
        assert!(b.lhs >= last);
        assert!(b.ratio <= 1.0, "{}", b.ratio);
        last = b.lhs;
    }
    let zeros = vec![beachlab::GridFunction1D::zeros(65); 3];
    let b = cumulative_damping_bound(&[0.0, 1.0, 2.0], &zeros, dx, 0.0, 1.0).unwrap();
    assert_eq!((b.lhs, b.ratio), (0.0, 0.0));
    assert!(cumulative_damping_bound(&[0.0], &zeros, dx, 1.0, 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn damping_power_is_weighted_square(
        eta in proptest::collection::vec(-0.01f64..0.01, 4),
        psi in proptest::collection::vec(-0.2f64..0.2, 4),
    ) {
        let cfg = damped(config(64, 16, 0.1, 0.0));
        let mut dy = Dynamics::new(&cfg).unwrap();
        let em: Vec<(usize, f64)> = eta.iter().enumerate().map(|(k, a)| (k + 1, *a)).collect();
        let pm: Vec<(usize, f64)> = psi.iter().enumerate().map(|(k, a)| (k + 1, *a)).collect();
        let s = state(&cfg, &em, &pm);
        let k = dy.rhs(&s).unwrap();
        let beach = dy.beach().unwrap();
        let dx = cfg.grid.dx(&cfg.geo);
        let power = damping_power(&k.pressure.dp, &k.traces.vbar, dx);
        let sq: Vec<f64> = beach.chi.iter().zip(k.traces.vbar.iter()).map(|(c, v)| c * v * v).collect();
        let direct = trapezoid_1d(&sq, dx);
        prop_assert!(power >= 0.0);
        prop_assert!((power - direct).abs() <= 1e-14 * direct.max(1e-300) + 1e-300);
    }
}
