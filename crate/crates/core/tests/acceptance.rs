//! One PASS/FAIL line per acceptance criterion. Exits nonzero if any fails.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use beachlab::circle::{
    energy_law_residual, evolve_circle, inner, uniform_bound_from_history, CircleCutoff, CircleOperator,
    SpectralState,
};
use beachlab::cutoff::SmoothStep;
use beachlab::{
    audit_run, decay_report, simulate, AuditSamples, AuditSuite, EllipticSolver, GridFunction1D, RunHistory,
    SimConfig, SimGrid, SurfaceState,
};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Pinned tolerances.
const DTN_TOL: f64 = 1e-4;
const DTN_RATIO: (f64, f64) = (3.0, 5.0);
const DRIFT_TOL: f64 = 1e-6;
const BALANCE_FRACTION: f64 = 1e-3;
const BUDGET_TOL: f64 = 1.01;
const IDENTITY_TOL: f64 = 2e-2;
const SHRINK: f64 = 2.0;
const ROUNDOFF_FLOOR: f64 = 1e-10;
const RATE_SPREAD: f64 = 0.2;
const SKEW_TOL: f64 = 1e-12;
const ENERGY_LAW_FLOOR: f64 = 1e-10;
const ENERGY_LAW_ORDER_RATIO: f64 = 12.0;
const HORIZON_CHANGE: f64 = 0.05;
const PRESSURE_TOL: f64 = 1e-6;

// Reference setup; the beach length is the 8 m of `common::config`.
const NX: usize = 256;
const NY: usize = 64;
const AMPLITUDE: f64 = 0.05;
const T_DAMPED: f64 = 60.0;
const WINDOWS: usize = 4;
// Audit matrix: (128, 32, DT_COARSE) against (256, 64, DT_COARSE / 2).
const DT_COARSE: f64 = 0.07;
const T_MATRIX: f64 = 12.0;

struct Line {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn reference_dt() -> f64 {
    SimConfig::max_stable_dt(&geo(), &SimGrid::new(NX, NY).unwrap())
}

fn wave_period(n: usize) -> f64 {
    let g = geo();
    2.0 * PI / g.omega(g.mode_wavenumber(n))
}

fn audited(cfg: &SimConfig) -> (RunHistory, AuditSamples, AuditSuite) {
    let h = simulate(cfg).unwrap();
    let s = AuditSamples::collect(&h).unwrap();
    let suite = audit_run(&s).unwrap();
    (h, s, suite)
}

fn dtn_error(nx: usize, ny: usize) -> f64 {
    let g = geo();
    let grid = SimGrid::new(nx, ny).unwrap();
    let solver = EllipticSolver::new(&g, &grid).unwrap();
    let mut worst = 0.0_f64;
    for n in 1..=8 {
        let k = g.mode_wavenumber(n);
        let psi = GridFunction1D::from_fn(&grid, &g, |x| (n as f64 * PI * x / g.length).cos());
        let sol = solver
            .solve(&SurfaceState::new(GridFunction1D::zeros(nx + 1), psi.clone()), None)
            .unwrap();
        let exact = k * (k * g.depth).tanh();
        let err = sol.gpsi.iter().zip(psi.iter()).fold(0.0_f64, |m, (a, p)| m.max((a - exact * p).abs()));
        worst = worst.max(err / exact);
    }
    worst
}

fn criterion_1() -> Line {
    let (coarse, fine) = (dtn_error(NX / 2, NY / 2), dtn_error(NX, NY));
    let ratio = coarse / fine;
    Line {
        name: "1 elliptic DtN",
        pass: fine < DTN_TOL && ratio >= DTN_RATIO.0 && ratio <= DTN_RATIO.1,
        detail: format!("rel err {fine:.3e} (< {DTN_TOL:e}), refinement ratio {ratio:.2}"),
    }
}

fn criterion_2() -> Line {
    let t = 20.0 * wave_period(2);
    let cfg = eta_mode(config(NX, NY, reference_dt(), t), 2, 0.01);
    let h = simulate(&cfg).unwrap();
    let drift = ((h.records.last().unwrap().h - h.h0()) / h.h0()).abs();
    Line {
        name: "2 conservation",
        pass: drift <= DRIFT_TOL,
        detail: format!("|H(T)-H(0)|/H(0) = {drift:.3e} over 20 periods, {} steps", h.times.len() - 1),
    }
}

fn criteria_5(pairs: &[(AuditSuite, AuditSuite)]) -> Line {
    let mut worst_fine = 0.0_f64;
    let mut worst_factor = f64::INFINITY;
    let mut failing = Vec::new();
    for (label, (coarse, fine)) in ["undamped", "damped"].iter().zip(pairs) {
        for (c, f) in coarse.reports.iter().zip(&fine.reports) {
            let factor = c.relative_residual / f.relative_residual;
            let shrinks = f.relative_residual < ROUNDOFF_FLOOR || factor >= SHRINK;
            worst_fine = worst_fine.max(f.relative_residual);
            if f.relative_residual >= ROUNDOFF_FLOOR {
                worst_factor = worst_factor.min(factor);
            }
            if f.relative_residual > IDENTITY_TOL || !shrinks {
                failing.push(format!("{label}:{} ({:.2e}, x{factor:.2})", f.name, f.relative_residual));
            }
        }
    }
    Line {
        name: "5 identity audits",
        pass: failing.is_empty(),
        detail: format!(
            "{} identities x 2 runs, worst residual {worst_fine:.3e}, smallest shrink factor {worst_factor:.2}{}",
            pairs[0].1.reports.len(),
            if failing.is_empty() { String::new() } else { format!(", failing: {}", failing.join(" ")) }
        ),
    }
}

fn circle_bump(n_max: usize) -> CircleCutoff {
    let (center, half) = (PI, 1.0);
    let rise = SmoothStep::new(center - half, center).unwrap();
    let fall = SmoothStep::new(center, center + half).unwrap();
    CircleCutoff::from_fn(n_max, |x| rise.value(x).min(1.0 - fall.value(x))).unwrap()
}

fn random_circle_state(rng: &mut ChaCha8Rng, n_max: usize, modes: usize) -> SpectralState {
    let mut draw = |lo: usize| -> Vec<(usize, f64, f64)> {
        (lo..=modes)
            .map(|n| (n, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    };
    let eta = draw(1);
    let psi = draw(0);
    SpectralState::from_real_modes(n_max, &eta, &psi).unwrap()
}

fn criterion_7() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n_max = 32;
    let undamped = CircleOperator::new(CircleCutoff::zero(n_max));
    let damped = CircleOperator::new(circle_bump(n_max));
    let (mut skew, mut min_form) = (0.0_f64, f64::INFINITY);
    for _ in 0..100 {
        let u = random_circle_state(&mut rng, n_max, n_max).symmetrize();
        let norm2 = inner(&u, &u);
        skew = skew.max(inner(&undamped.apply_l(&u), &u).abs() / norm2);
        skew = skew.max(inner(&damped.apply_l(&u), &u).abs() / norm2);
        min_form = min_form.min(inner(&damped.apply_p(&u), &u) / norm2);
    }
    let s = random_circle_state(&mut rng, n_max, 8);
    let law = |dt: f64| {
        let (h, _) = evolve_circle(&s, &circle_bump(n_max), dt, 10.0, &[], 1).unwrap();
        energy_law_residual(&h) / (h.l2[0] * h.l2[0])
    };
    let (e1, e2) = (law(0.05), law(0.025));
    let law_ok = e2 < ENERGY_LAW_FLOOR || e1 / e2 >= ENERGY_LAW_ORDER_RATIO;

    let n_max = 128;
    let state = SpectralState::from_real_modes(
        n_max,
        &[(1, 0.5, 0.0), (3, 0.0, 0.2), (7, 0.1, 0.0)],
        &[(2, 0.3, 0.0), (5, 0.0, 0.1)],
    )
    .unwrap();
    let t_long = 1000.0;
    let s_list = [0.0, 0.5, 1.0];
    let dt = 1.0 / (n_max as f64).sqrt();
    let (hist, _) = evolve_circle(&state, &circle_bump(n_max), dt, 2.0 * t_long, &s_list, 1).unwrap();
    let report = uniform_bound_from_history(&hist, &state, t_long).unwrap();
    let change = report.ratios.iter().fold(0.0_f64, |m, r| m.max(r.relative_change));
    let pass = skew <= SKEW_TOL && min_form >= 0.0 && law_ok && change < HORIZON_CHANGE;
    Line {
        name: "7 circle suite",
        pass,
        detail: format!(
            "(i) |(Lu,u)|/|u|^2 {skew:.1e} (ii) min (Pu,u)/|u|^2 {min_form:.3e} (iii) relative energy-law residual {e1:.2e} -> {e2:.2e} on halving dt \
             (iv) sup-ratio change {change:.2e} at N={n_max}, T_long={t_long}"
        ),
    }
}

fn criterion_9() -> Line {
    let cfg = damped(eta_mode(config(64, 16, 0.1, 10.0), 1, AMPLITUDE));
    let run = || {
        let (h, _, suite) = audited(&cfg);
        let mut bits: Vec<u64> = Vec::new();
        for (t, s) in h.times.iter().zip(&h.states) {
            bits.push(t.to_bits());
            bits.extend(s.eta.iter().chain(s.psi.iter()).map(|v| v.to_bits()));
        }
        bits.extend(h.records.iter().flat_map(|r| [r.h.to_bits(), r.damping_power.to_bits()]));
        bits.extend(suite.reports.iter().map(|r| r.residual.to_bits()));
        bits
    };
    let (a, b) = (run(), run());
    Line {
        name: "9 determinism",
        pass: a == b,
        detail: format!("{} words compared", a.len()),
    }
}

fn main() {
    let start = Instant::now();
    let dt_ref = reference_dt();
    let reference = damped(eta_mode(config(NX, NY, dt_ref, T_DAMPED), 1, AMPLITUDE));
    let matrix: Vec<SimConfig> = [false, true]
        .into_iter()
        .flat_map(|d| {
            [(NX / 2, NY / 2, DT_COARSE), (NX, NY, DT_COARSE / 2.0)].map(|(nx, ny, dt)| {
                let c = eta_mode(config(nx, ny, dt, T_MATRIX), 1, AMPLITUDE);
                if d {
                    damped(c)
                } else {
                    c
                }
            })
        })
        .collect();

    let (mut lines, (h, samples, suite), matrix) = std::thread::scope(|sc| {
        let reference = sc.spawn(|| audited(&reference));
        let matrix: Vec<_> = matrix.iter().map(|c| sc.spawn(move || audited(c).2)).collect();
        let c2 = sc.spawn(criterion_2);
        let c7 = sc.spawn(criterion_7);
        let mut lines = vec![criterion_1()];
        lines.push(c2.join().unwrap());
        let matrix: Vec<AuditSuite> = matrix.into_iter().map(|j| j.join().unwrap()).collect();
        lines.push(c7.join().unwrap());
        (lines, reference.join().unwrap(), matrix)
    });

    let t_wave = wave_period(1);
    let d = suite.dissipation;
    let limit = BALANCE_FRACTION * d.h0 / t_wave;
    lines.insert(
        2,
        Line {
            name: "3 dissipation law",
            pass: d.max_balance_error <= limit && d.max_increase <= 0.0,
            detail: format!(
                "max |dH/dt + int chi Vbar^2| {:.3e} (limit {limit:.3e}), largest step increase {:.3e}",
                d.max_balance_error, d.max_increase
            ),
        },
    );
    let budgets = [&suite, &matrix[2], &matrix[3]].map(|s| s.damping_budget.ratio);
    let worst_budget = budgets.iter().fold(0.0_f64, |m, r| m.max(*r));
    lines.insert(
        3,
        Line {
            name: "4 damping budget",
            pass: worst_budget <= BUDGET_TOL,
            detail: format!("int int (dP)^2 / (sup chi H(0)) = {budgets:.4?}"),
        },
    );
    let pairs = [(matrix[0].clone(), matrix[1].clone()), (matrix[2].clone(), matrix[3].clone())];
    let mut c5 = criteria_5(&pairs);
    let reference_worst = suite.worst_relative_residual();
    c5.pass &= reference_worst <= IDENTITY_TOL;
    c5.detail += &format!(", damped T={T_DAMPED} run worst {reference_worst:.3e}");
    lines.insert(4, c5);

    let report = decay_report(&samples, &h, None, WINDOWS).unwrap();
    let [r1, r2] = report.rate_windows;
    let spread = (r1 / r2 - 1.0).abs();
    let ratios_ok = report.window_ratios.iter().all(|r| *r < 1.0);
    let ineq = report.final_energy_bound;
    lines.insert(
        5,
        Line {
            name: "6 decay inequality",
            pass: report.constants.admissible
                && ineq.holds
                && ratios_ok
                && report.rate_second_half > 0.0
                && r1 > 0.0
                && r2 > 0.0
                && spread <= RATE_SPREAD,
            detail: format!(
                "admissible {}, (1/2-c-alpha) T H(T) = {:.4e} <= bound {:.4e}, window ratios {:.3?}, log-slopes {:.4} {:.4} (spread {:.1}%)",
                report.constants.admissible,
                ineq.lhs,
                ineq.rhs,
                report.window_ratios,
                -r1,
                -r2,
                100.0 * spread
            ),
        },
    );
    lines.push(Line {
        name: "8 pressure equivalence",
        pass: suite.pressure_mismatch <= PRESSURE_TOL,
        detail: format!("max_t |dP_vbar - dP_flux| / max|dP| = {:.3e}", suite.pressure_mismatch),
    });
    lines.push(criterion_9());

    let mut failed = 0;
    for l in &lines {
        println!("{} [{}] {}", if l.pass { "PASS" } else { "FAIL" }, l.name, l.detail);
        failed += usize::from(!l.pass);
    }
    println!("{} of {} criteria passed in {:.0} s", lines.len() - failed, lines.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
