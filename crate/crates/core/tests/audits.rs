mod common;

use std::f64::consts::PI;

use beachlab::diagnostics::{dissipation_check, energy, theta};
use beachlab::dynamics::CosineMode;
use beachlab::{
    audit_run, decay_report, simulate, AuditSamples, Dynamics, Error, InitialCondition, SimConfig, SurfaceState,
};
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
fn energy_of_single_modes() {
    let cfg = config(128, 32, 0.05, 0.0);
    let mut dy = Dynamics::new(&cfg).unwrap();
    let (g, l) = (cfg.geo.gravity, cfg.geo.length);
    let rest = SurfaceState::rest(&cfg.grid);
    let tr = dy.rhs(&rest).unwrap().traces;
    assert_eq!(energy(&rest, &tr, &cfg.geo), (0.0, 0.0, 0.0));

    let a = 0.02;
    let s = state(&cfg, &[(3, a)], &[]);
    let tr = dy.rhs(&s).unwrap().traces;
    let (h, ke, pe) = energy(&s, &tr, &cfg.geo);
    assert!((pe - g * a * a * l / 4.0).abs() < 1e-15);
    assert_eq!(ke, 0.0);
    assert_eq!(h, pe);

    let k = 2.0 * PI / l;
    let s = state(&cfg, &[], &[(2, 1.0)]);
    let tr = dy.rhs(&s).unwrap().traces;
    let (_, ke, pe) = energy(&s, &tr, &cfg.geo);
    assert_eq!(pe, 0.0);
    let exact = 0.25 * l * k * (k * cfg.geo.depth).tanh();
    assert!((ke / exact - 1.0).abs() < 1e-4, "{ke} {exact}");
}

#[test]
fn theta_of_linear_and_nonlinear_flows() {
    let cfg = config(64, 16, 0.1, 0.0);
    let g = cfg.geo.gravity;
    let rest = SurfaceState::rest(&cfg.grid);
    assert_eq!(max_abs(&theta(&rest, &vec![0.0; 65], g)), 0.0);

    let s = state(&cfg, &[(1, 0.02), (2, 0.01)], &[(1, 0.3)]);
    let mut lin = Dynamics::new(&linear(cfg.clone())).unwrap();
    let k = lin.rhs(&s).unwrap();
    let half_g_eta2: Vec<f64> = s.eta.iter().map(|e| 0.5 * g * e * e).collect();
    assert!(max_abs_diff(&theta(&s, &k.dpsi, g), &half_g_eta2) < 1e-15);

    let mut non = Dynamics::new(&cfg).unwrap();
    let k = non.rhs(&s).unwrap();
    let expect: Vec<f64> = (0..65)
        .map(|i| s.eta[i] * k.traces.dk_deta[i] + 0.5 * g * s.eta[i] * s.eta[i])
        .collect();
    assert!(max_abs_diff(&theta(&s, &k.dpsi, g), &expect) < 1e-15);
}

#[test]
fn audits_of_rest_are_exactly_zero() {
    let cfg = damped(config(32, 8, 0.1, 1.0));
    let h = simulate(&cfg).unwrap();
    let samples = AuditSamples::collect(&h).unwrap();
    let suite = audit_run(&samples).unwrap();
    assert!(suite.reports.len() >= 10);
    for r in &suite.reports {
        assert_eq!((r.lhs, r.rhs, r.residual, r.relative_residual), (0.0, 0.0, 0.0, 0.0), "{}", r.name);
    }
    assert_eq!(suite.damping_budget.lhs, 0.0);
    assert!(matches!(decay_report(&samples, &h, None, 4), Err(Error::ZeroEnergy)));
}

#[test]
fn audits_need_every_step_and_a_beach() {
    let cfg = eta_mode(config(32, 8, 0.1, 1.0), 1, 0.01);
    let strided = SimConfig { sample_stride: 2, ..cfg.clone() };
    let h = simulate(&strided).unwrap();
    assert!(matches!(AuditSamples::collect(&h), Err(Error::InsufficientSampling(2))));
    let bare = SimConfig { beach_delta: None, ..cfg };
    let h = simulate(&bare).unwrap();
    assert!(matches!(AuditSamples::collect(&h), Err(Error::InvalidConfig(_))));
}

#[test]
fn undamped_audit_has_no_pressure_work() {
    let cfg = eta_mode(config(128, 32, 0.07, 6.0), 1, 0.05);
    let h = simulate(&cfg).unwrap();
    let samples = AuditSamples::collect(&h).unwrap();
    let suite = audit_run(&samples).unwrap();
    let mi = suite.report("multiplier_identity").unwrap();
    assert_eq!(mi.term("pressure_work"), Some(0.0));
    assert!(suite.worst_relative_residual() < 2e-2, "{}", suite.worst_relative_residual());
    assert_eq!(suite.damping_budget.lhs, 0.0);
}

#[test]
fn linear_equipartition_over_whole_periods() {
    let base = linear(config(128, 32, 0.05, 0.0));
    let k = PI / base.geo.length;
    let period = 2.0 * PI / base.geo.omega(k);
    let cfg = SimConfig {
        t_final: 2.0 * period,
        ..eta_mode(base, 1, 0.02)
    };
    let h = simulate(&cfg).unwrap();
    let samples = AuditSamples::collect(&h).unwrap();
    let suite = audit_run(&samples).unwrap();
    let eq = suite.report("equipartition").unwrap();
    let (ak, ap) = (eq.term("a_k").unwrap(), eq.term("a_p").unwrap());
    assert!(((ak - ap) / ap).abs() < 1e-4, "{ak} {ap}");
    assert!(eq.term("boundary").unwrap().abs() < 1e-4 * ap);
}

#[test]
fn damped_audit_and_decay_report() {
    let cfg = damped(eta_mode(config(128, 32, 0.07, 12.0), 1, 0.05));
    let h = simulate(&cfg).unwrap();
    let samples = AuditSamples::collect(&h).unwrap();
    let suite = audit_run(&samples).unwrap();
    assert!(suite.worst_relative_residual() < 2e-2, "{}", suite.worst_relative_residual());
    assert!(suite.damping_budget.ratio <= 1.0);
    assert!(suite.dissipation.max_increase <= 0.0);
    assert!(suite.pressure_mismatch < 1e-6);
    assert!(suite.poincare_margin >= 0.0);
    let mi = suite.report("multiplier_identity").unwrap();
    assert!(mi.term("pressure_work").unwrap() != 0.0);

    let d = decay_report(&samples, &h, None, 3).unwrap();
    assert!(d.constants.admissible);
    assert!(d.final_energy_bound.holds && d.integrated_bound.holds && d.boundary_bound.holds);
    assert!(d.h_final < d.h0);
    assert_eq!(d.window_ratios.len(), 3);
    assert!(d.window_ratios.iter().all(|r| *r < 1.0));
    assert!(d.rate_second_half > 0.0);
}

#[test]
fn linear_damped_audit() {
    let cfg = linear(damped(eta_mode(config(128, 32, 0.07, 6.0), 1, 0.05)));
    let h = simulate(&cfg).unwrap();
    let suite = audit_run(&AuditSamples::collect(&h).unwrap()).unwrap();
    assert!(suite.worst_relative_residual() < 2e-2, "{}", suite.worst_relative_residual());
    assert_eq!(suite.report("remainder").unwrap().relative_residual, 0.0);
}

#[test]
fn dissipation_check_is_fourth_order() {
    let run = |n: usize| {
        let t: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
        let h: Vec<f64> = t.iter().map(|t| (-t).exp()).collect();
        dissipation_check(&t, &h, &h).max_balance_error
    };
    let (e1, e2) = (run(20), run(40));
    assert!(e1 < 1e-5);
    assert!(e1 / e2 > 12.0, "{e1} {e2}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn virial_boundary_term_is_nonnegative(
        eta in proptest::collection::vec(-0.02f64..0.02, 3),
        psi in proptest::collection::vec(-0.3f64..0.3, 3),
    ) {
        let base = config(64, 16, 0.1, 0.1);
        let em: Vec<(usize, f64)> = eta.iter().enumerate().map(|(k, a)| (k + 1, *a)).collect();
        let pm: Vec<(usize, f64)> = psi.iter().enumerate().map(|(k, a)| (k + 1, *a)).collect();
        let cfg = SimConfig {
            ic: InitialCondition {
                eta_modes: em.iter().map(|&(n, amplitude)| CosineMode { n, amplitude }).collect(),
                psi_modes: pm.iter().map(|&(n, amplitude)| CosineMode { n, amplitude }).collect(),
                bump: None,
            },
            ..base
        };
        let h = simulate(&cfg).unwrap();
        let samples = AuditSamples::collect(&h).unwrap();
        for x in &samples.samples {
            prop_assert!(x.sigma >= 0.0);
        }
    }
}
