use std::f64::consts::PI;

use beachlab::circle::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

fn bump(x: f64) -> f64 {
    // smooth bump supported in (2, 4), even about pi after symmetrization
    let f = |x: f64| {
        let t = (x - 2.0) / 2.0;
        if t <= 0.0 || t >= 1.0 {
            0.0
        } else {
            (-1.0 / (t * (1.0 - t))).exp() * 60.0
        }
    };
    f(x) + f(2.0 * PI - x)
}

fn random_state(rng: &mut ChaCha8Rng, n_max: usize, modes: usize) -> SpectralState {
    let eta: Vec<(usize, f64, f64)> = (1..=modes)
        .map(|n| (n, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let psi: Vec<(usize, f64, f64)> = (0..=modes)
        .map(|n| (n, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    SpectralState::from_real_modes(n_max, &eta, &psi).unwrap()
}

#[test]
fn sqrt_twice_is_abs() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let s = random_state(&mut rng, 16, 16);
    let a = multiplier_state(Multiplier::SqrtAbsD, &multiplier_state(Multiplier::SqrtAbsD, &s));
    let b = multiplier_state(Multiplier::AbsD, &s);
    for (x, y) in a.psi_hat.iter().zip(&b.psi_hat) {
        assert!((x - y).norm() < 1e-13);
    }
}

#[test]
fn zero_cutoff_gives_zero_damping() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let u = random_state(&mut rng, 16, 10).symmetrize();
    let p = damping_operator_P(&u, &vec![0.0; padded_len(16)]).unwrap();
    assert!(p.theta_hat.iter().chain(&p.eta_hat).all(|c| c.norm() == 0.0));
}

#[test]
fn unit_cutoff_is_inverse_abs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n_max = 16;
    let u = random_state(&mut rng, n_max, 16).symmetrize();
    let p = damping_operator_P(&u, &vec![1.0; padded_len(n_max)]).unwrap();
    for (k, (pt, t)) in p.theta_hat.iter().zip(&u.theta_hat).enumerate() {
        let n = k as i64 - n_max as i64;
        let expect = if n == 0 { Complex64::new(0.0, 0.0) } else { t / n.unsigned_abs() as f64 };
        assert!((pt - expect).norm() < 1e-13, "mode {n}");
    }
}

#[test]
fn negative_cutoff_sample_is_reported() {
    let u = SymmetrizedState::zeros(4);
    let mut chi = vec![1.0; padded_len(4)];
    chi[5] = -1e-3;
    assert!(matches!(
        damping_operator_P(&u, &chi),
        Err(beachlab::Error::NegativeCutoff { index: 5, .. })
    ));
}

#[test]
fn undamped_mode_period() {
    let n_max = 32;
    let n = 4;
    let s = SpectralState::from_real_modes(n_max, &[(n, 1.0, 0.0)], &[]).unwrap();
    let period = 2.0 * PI / (n as f64).sqrt();
    let chi = CircleCutoff::zero(n_max);
    let err = |dt: f64| {
        let steps = (period / dt).round();
        let (_, end) = evolve_circle(&s, &chi, period / steps, period, &[0.0], 1000000).unwrap();
        (end.coeff_eta(n as i64) - Complex64::new(0.5, 0.0)).norm()
    };
    let e1 = err(0.1);
    let e2 = err(0.05);
    assert!(e1 < 1e-4, "{e1}");
    // fourth order
    assert!(e1 / e2 > 12.0, "{e1} {e2}");
}

#[test]
fn undamped_flow_rotates_each_mode() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let modes = 12;
    let s = random_state(&mut rng, 32, modes);
    let dt = 0.05;
    let t = 20.0;
    let (h, end) = evolve_circle(&s, &CircleCutoff::zero(32), dt, t, &[0.0, 0.5, 1.0], 1).unwrap();
    // RK4 shrinks a rotation at frequency w by about (w dt)^6 / 144 per step.
    let w_dt = (modes as f64).sqrt() * dt;
    let bound = 2.0 * (t / dt) * w_dt.powi(6) / 144.0;
    for n in 1..=modes as i64 {
        let e = |st: &SpectralState| st.coeff_eta(n).norm_sqr() + n as f64 * st.coeff_psi(n).norm_sqr();
        assert!((e(&end) / e(&s) - 1.0).abs() < bound, "mode {n}");
    }
    let drift = h.l2.iter().fold(0.0_f64, |m, v| m.max((v - h.l2[0]).abs())) / h.l2[0];
    assert!(drift < bound, "{drift}");
}

#[test]
fn damped_norm_nonincreasing() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let n_max = 32;
    let s = random_state(&mut rng, n_max, 12);
    let chi = CircleCutoff::from_fn(n_max, bump).unwrap();
    let (h, _) = evolve_circle(&s, &chi, 0.1, 50.0, &[0.0], 1).unwrap();
    for w in h.l2.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12));
    }
    for w in h.rate_norm.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-9));
    }
    assert!(h.l2.last().unwrap() < &h.l2[0]);
}

#[test]
fn energy_law_is_fourth_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n_max = 32;
    let s = random_state(&mut rng, n_max, 8);
    let chi = CircleCutoff::from_fn(n_max, bump).unwrap();
    let r = |dt: f64| {
        let (h, _) = evolve_circle(&s, &chi, dt, 10.0, &[], 1).unwrap();
        energy_law_residual(&h)
    };
    let e1 = r(0.1);
    let e2 = r(0.05);
    assert!(e2 < 1e-10 || e1 / e2 > 10.0, "{e1} {e2}");
}

#[test]
fn step_restriction_enforced() {
    let s = SpectralState::zeros(100);
    assert!(evolve_circle(&s, &CircleCutoff::zero(100), 0.2, 1.0, &[], 1).is_err());
}

#[test]
fn symmetrize_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let s = random_state(&mut rng, 8, 8);
    let back = SpectralState::from_symmetrized(&s.symmetrize(), s.psi_hat[8]);
    for (a, b) in back.psi_hat.iter().zip(&s.psi_hat) {
        assert!((a - b).norm() < 1e-14);
    }
    // ||psi||_{H^{1/2}-dot} = ||theta||
    let th: f64 = s.symmetrize().theta_hat.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let direct: f64 = s
        .psi_hat
        .iter()
        .enumerate()
        .map(|(k, c)| (k as f64 - 8.0).abs() * c.norm_sqr())
        .sum::<f64>()
        .sqrt();
    assert!((th - direct).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn l_is_skew(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_state(&mut rng, 24, 24).symmetrize();
        let op = CircleOperator::new(CircleCutoff::zero(24));
        let lu = op.apply_l(&u);
        prop_assert!(inner(&lu, &u).abs() < 1e-12 * inner(&u, &u));
    }

    #[test]
    fn damping_form_nonnegative(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_state(&mut rng, 24, 24).symmetrize();
        let op = CircleOperator::new(CircleCutoff::from_fn(24, bump).unwrap());
        prop_assert!(inner(&op.apply_p(&u), &u) >= -1e-14 * inner(&u, &u));
    }
}
