use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use beachlab::circle::{
    evolve_circle, uniform_bound_from_history, CircleCutoff, SpectralState, UniformBoundReport,
};
use beachlab::cutoff::SmoothStep;
use beachlab::diagnostics::log_linear_rate;
use beachlab::multipliers::decay_constants;
use beachlab::{
    audit_run, decay_report, simulate_observed, AuditSamples, AuditSuite, BeachProfile, DecayReport, Error,
    IdentityReport, RunHistory, SimConfig,
};
use serde::Serialize;

use crate::config::{load_circle, load_run, RunConfig};
use crate::output::{fmt, read_states, unix_now, Files, RunManifest};
use crate::CliError;

const VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct Options<'a> {
    pub config: &'a Path,
    pub out: &'a Path,
    pub tolerance: Option<f64>,
    pub threads: usize,
    pub run: Option<&'a Path>,
}

fn core_error(e: Error) -> CliError {
    if e.is_physics_failure() {
        CliError::Physics(e.to_string())
    } else {
        CliError::Input(e.to_string())
    }
}

fn opt(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

#[derive(Debug, Serialize)]
pub struct Snapshot {
    pub file: String,
    pub t: f64,
}

#[derive(Debug, Serialize)]
pub struct Admissibility {
    /// `min rho >= -h` over the stored samples.
    pub rho_above_minus_h: bool,
    /// `c = sup |rho_x| < 1/2`.
    pub c_below_half: bool,
    pub admissible: bool,
}

#[derive(Debug, Serialize)]
pub struct Constants {
    pub c: f64,
    pub c_m: f64,
    pub n1t: f64,
    pub n2t: f64,
    pub rho_min: f64,
}

#[derive(Debug, Serialize)]
pub struct SimulationSummary {
    pub t_final: f64,
    pub steps: usize,
    pub dt: f64,
    pub h0: f64,
    pub h_final: f64,
    pub relative_energy_change: Option<f64>,
    /// `r` in `H ~ exp(-r t)` fitted over `[T/2, T]`.
    pub decay_rate: Option<f64>,
    pub max_eta: f64,
    pub constants: Option<Constants>,
    pub admissibility: Option<Admissibility>,
    pub snapshots: Vec<Snapshot>,
}

struct SnapshotData {
    t: f64,
    rows: Vec<Vec<String>>,
}

/// Runs one configuration into `files`; returns the history and summary.
fn run_simulation(cfg: &SimConfig, files: &mut Files, snapshot_times: &[f64]) -> Result<(RunHistory, SimulationSummary), CliError> {
    let (steps, dt) = cfg.steps();
    let wanted: Vec<usize> = snapshot_times
        .iter()
        .map(|t| ((t / dt).round().max(0.0) as usize).min(steps))
        .collect();
    let x = cfg.grid.x_nodes(&cfg.geo);
    let mut snaps: Vec<SnapshotData> = Vec::new();
    let history = simulate_observed(cfg, |k, t, state, rhs| {
        if wanted.contains(&k) {
            let rows = (0..x.len())
                .map(|i| vec![fmt(x[i]), fmt(state.eta[i]), fmt(state.psi[i]), fmt(rhs.pressure.p[i])])
                .collect();
            snaps.push(SnapshotData { t, rows });
        }
        Ok(())
    })
    .map_err(core_error)?;

    let mut cumulative = 0.0;
    let recs = &history.records;
    let rows: Vec<Vec<String>> = recs
        .iter()
        .enumerate()
        .map(|(k, r)| {
            if k > 0 {
                let p = &recs[k - 1];
                cumulative += 0.5 * (r.t - p.t) * (r.damping_power + p.damping_power);
            }
            vec![
                fmt(r.t),
                fmt(r.h),
                fmt(r.ke),
                fmt(r.pe),
                fmt(r.damping_power),
                fmt(r.sigma),
                fmt(r.boundary_b),
                fmt(r.max_eta),
                fmt(cumulative),
            ]
        })
        .collect();
    files.csv(
        "timeseries.csv",
        &["t", "H", "KE", "PE", "damping_power", "sigma", "boundary_B", "max_eta", "cumulative_damping"],
        rows,
    )?;
    let mut snapshots = Vec::new();
    for (k, s) in snaps.into_iter().enumerate() {
        let name = format!("snapshot_{k:03}.csv");
        files.csv(&name, &["x", "eta", "psi", "P_ext"], s.rows)?;
        snapshots.push(Snapshot { file: name, t: s.t });
    }
    files.states("states.bin", &history.times, &history.states)?;

    let h0 = history.h0();
    let last = recs.last().copied();
    let h_final = last.map_or(h0, |r| r.h);
    let times: Vec<f64> = recs.iter().map(|r| r.t).collect();
    let hs: Vec<f64> = recs.iter().map(|r| r.h).collect();
    let t_final = *times.last().unwrap_or(&0.0);
    let (constants, admissibility) = match cfg.beach_delta {
        Some(delta) if h0 > 0.0 => {
            let beach = BeachProfile::build(&cfg.geo, &cfg.grid, delta).map_err(core_error)?;
            let c = decay_constants(&history.states, &beach, &cfg.geo, &cfg.grid, h0, 0.0).map_err(core_error)?;
            let rho_ok = c.rho_min >= -cfg.geo.depth;
            let c_ok = c.c < 0.5;
            (
                Some(Constants {
                    c: c.c,
                    c_m: c.cm,
                    n1t: c.n1t,
                    n2t: c.n2t,
                    rho_min: c.rho_min,
                }),
                Some(Admissibility {
                    rho_above_minus_h: rho_ok,
                    c_below_half: c_ok,
                    admissible: rho_ok && c_ok,
                }),
            )
        }
        _ => (None, None),
    };
    let summary = SimulationSummary {
        t_final,
        steps,
        dt,
        h0,
        h_final,
        relative_energy_change: (h0 > 0.0).then(|| (h_final - h0) / h0),
        decay_rate: if h0 > 0.0 && t_final > 0.0 {
            opt(log_linear_rate(&times, &hs, 0.5 * t_final, t_final))
        } else {
            None
        },
        max_eta: recs.iter().fold(0.0_f64, |m, r| m.max(r.max_eta)),
        constants,
        admissibility,
        snapshots,
    };
    files.json("summary.json", &summary)?;
    Ok((history, summary))
}

fn manifest<C: Serialize>(files: &mut Files, command: &str, config: &C, started: f64, clock: Instant) -> Result<(), CliError> {
    let mut outputs = files.written.clone();
    outputs.push("manifest.json".into());
    let m = RunManifest {
        command,
        artifact_version: VERSION,
        config,
        started_unix: started,
        wall_seconds: clock.elapsed().as_secs_f64(),
        outputs,
    };
    files.json("manifest.json", &m)
}

pub fn simulate(o: &Options) -> Result<(), CliError> {
    let (started, clock) = (unix_now(), Instant::now());
    let cfg = load_run(o.config)?;
    let sim = cfg.sim_config(None)?;
    let mut files = Files::new(o.out)?;
    run_simulation(&sim, &mut files, &cfg.output.snapshot_times)?;
    manifest(&mut files, "simulate", &cfg, started, clock)
}

#[derive(Debug, Serialize)]
pub struct Consistency {
    pub pressure_mismatch: f64,
    pub flux_spectral_mismatch: f64,
    pub flux_trapezoid_mismatch: f64,
    pub dissipation_max_balance_error: f64,
    pub dissipation_max_increase: f64,
    pub damping_budget_lhs: f64,
    pub damping_budget_bound: f64,
    pub damping_budget_ratio: f64,
    pub poincare_margin: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct AuditFile {
    pub tolerance: f64,
    pub all_within_tolerance: bool,
    pub identities: Vec<IdentityReport>,
    pub consistency: Consistency,
}

fn audit_file(suite: &AuditSuite, tolerance: f64) -> AuditFile {
    AuditFile {
        tolerance,
        all_within_tolerance: suite.reports.iter().all(|r| r.relative_residual <= tolerance),
        identities: suite.reports.clone(),
        consistency: Consistency {
            pressure_mismatch: suite.pressure_mismatch,
            flux_spectral_mismatch: suite.flux_spectral_mismatch,
            flux_trapezoid_mismatch: suite.flux_trapezoid_mismatch,
            dissipation_max_balance_error: suite.dissipation.max_balance_error,
            dissipation_max_increase: suite.dissipation.max_increase,
            damping_budget_lhs: suite.damping_budget.lhs,
            damping_budget_bound: suite.damping_budget.bound,
            damping_budget_ratio: suite.damping_budget.ratio,
            poincare_margin: opt(suite.poincare_margin),
        },
    }
}

fn audit_history(history: &RunHistory, cfg: &RunConfig) -> Result<(AuditSuite, Option<DecayReport>), CliError> {
    let samples = AuditSamples::collect(history).map_err(core_error)?;
    let suite = audit_run(&samples).map_err(core_error)?;
    let decay = if samples.h0() > 0.0 {
        Some(decay_report(&samples, history, cfg.audit.alpha, cfg.audit.windows).map_err(core_error)?)
    } else {
        None
    };
    Ok((suite, decay))
}

pub fn audit(o: &Options) -> Result<(), CliError> {
    let (started, clock) = (unix_now(), Instant::now());
    let cfg = load_run(o.config)?;
    let sim = cfg.sim_config(None)?;
    if sim.sample_stride != 1 {
        return Err(core_error(Error::InsufficientSampling(sim.sample_stride)));
    }
    let run_dir = o.run.unwrap_or(o.out);
    let (times, states) = read_states(&run_dir.join("states.bin"))?;
    let (steps, dt) = sim.steps();
    if states.len() != steps + 1 {
        return Err(CliError::Input(format!(
            "{} holds {} samples, the configuration has {} steps",
            run_dir.display(),
            states.len(),
            steps
        )));
    }
    let history = RunHistory {
        config: sim,
        dt,
        times,
        states,
        pressures: Vec::new(),
        records: Vec::new(),
    };
    let tolerance = o.tolerance.unwrap_or(cfg.audit.tolerance);
    let (suite, decay) = audit_history(&history, &cfg)?;
    let mut files = Files::new(o.out)?;
    let report = audit_file(&suite, tolerance);
    files.json("identity_reports.json", &report)?;
    if let Some(d) = &decay {
        files.json("decay_report.json", d)?;
    }
    manifest(&mut files, "audit", &cfg, started, clock)?;
    if report.all_within_tolerance {
        Ok(())
    } else {
        let worst = suite
            .reports
            .iter()
            .filter(|r| r.relative_residual > tolerance)
            .map(|r| format!("{} ({:.3e})", r.name, r.relative_residual))
            .collect::<Vec<_>>()
            .join(", ");
        Err(CliError::Audit(format!("relative residuals above {tolerance:.3e}: {worst}")))
    }
}

/// Relative residuals below this are treated as converged to roundoff.
const ROUNDOFF_FLOOR: f64 = 1e-10;

#[derive(Debug, Serialize)]
pub struct ConvergenceEntry {
    pub identity: String,
    pub relative_residuals: Vec<f64>,
    /// Ratio of successive residuals.
    pub factors: Vec<f64>,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct ConvergenceReport {
    pub levels: Vec<usize>,
    pub required_factor: f64,
    pub roundoff_floor: f64,
    pub entries: Vec<ConvergenceEntry>,
    pub all_passed: bool,
}

pub fn convergence(o: &Options) -> Result<(), CliError> {
    let (started, clock) = (unix_now(), Instant::now());
    let base = load_run(o.config)?;
    let levels = [1usize, 2, 4];
    let mut configs = Vec::new();
    for &l in &levels {
        let mut c = base.refined(l);
        c.time.sample_stride = 1;
        configs.push((l, c.sim_config(None)?));
    }
    let run = |(_, sim): &(usize, SimConfig)| -> Result<AuditSuite, CliError> {
        let mut history = simulate_observed(sim, |_, _, _, _| Ok(())).map_err(core_error)?;
        history.records.clear();
        let samples = AuditSamples::collect(&history).map_err(core_error)?;
        audit_run(&samples).map_err(core_error)
    };
    let threads = o.threads.max(1);
    let mut suites: Vec<Option<Result<AuditSuite, CliError>>> = (0..configs.len()).map(|_| None).collect();
    for chunk in (0..configs.len()).collect::<Vec<_>>().chunks(threads) {
        let (configs, run) = (&configs, &run);
        std::thread::scope(|scope| {
            let handles: Vec<_> = chunk.iter().map(|&i| (i, scope.spawn(move || run(&configs[i])))).collect();
            for (i, h) in handles {
                suites[i] = Some(h.join().unwrap_or_else(|_| Err(CliError::Input("worker panicked".into()))));
            }
        });
    }
    let suites: Vec<AuditSuite> = suites.into_iter().map(|s| s.expect("every level ran")).collect::<Result<_, _>>()?;

    let mut files = Files::new(o.out)?;
    let mut rows = Vec::new();
    for ((l, sim), suite) in configs.iter().zip(&suites) {
        for r in &suite.reports {
            rows.push(vec![
                r.name.clone(),
                l.to_string(),
                sim.grid.nx.to_string(),
                sim.grid.ny.to_string(),
                fmt(sim.steps().1),
                fmt(r.residual),
                fmt(r.relative_residual),
            ]);
        }
    }
    files.csv(
        "convergence.csv",
        &["identity", "level", "nx", "ny", "dt", "residual", "relative_residual"],
        rows,
    )?;
    let required = 2.0;
    let entries: Vec<ConvergenceEntry> = suites[0]
        .reports
        .iter()
        .map(|r0| {
            let res: Vec<f64> = suites
                .iter()
                .map(|s| s.report(&r0.name).map_or(f64::NAN, |r| r.relative_residual))
                .collect();
            let factors: Vec<f64> = res.windows(2).map(|w| w[0] / w[1]).collect();
            let passed = res
                .windows(2)
                .all(|w| w[1] <= ROUNDOFF_FLOOR || w[0] / w[1] >= required);
            ConvergenceEntry {
                identity: r0.name.clone(),
                relative_residuals: res,
                factors,
                passed,
            }
        })
        .collect();
    let report = ConvergenceReport {
        levels: levels.to_vec(),
        required_factor: required,
        roundoff_floor: ROUNDOFF_FLOOR,
        all_passed: entries.iter().all(|e| e.passed),
        entries,
    };
    files.json("convergence.json", &report)?;
    manifest(&mut files, "convergence", &base, started, clock)?;
    if report.all_passed {
        Ok(())
    } else {
        Err(CliError::Audit("some identity residual shrank by less than 2x".into()))
    }
}

pub fn circle(o: &Options) -> Result<(), CliError> {
    let (started, clock) = (unix_now(), Instant::now());
    let cfg = load_circle(o.config)?;
    let c = &cfg.circle;
    let modes = |m: &[crate::config::RealMode]| m.iter().map(|m| (m.n, m.a, m.b)).collect::<Vec<_>>();
    let state = SpectralState::from_real_modes(c.n_max, &modes(&c.eta_modes), &modes(&c.psi_modes)).map_err(core_error)?;
    let chi = match c.chi {
        None => CircleCutoff::zero(c.n_max),
        Some(spec) => {
            if !(spec.amplitude >= 0.0) {
                return Err(core_error(Error::NegativeCutoff {
                    index: 0,
                    value: spec.amplitude,
                }));
            }
            let (a, b) = (spec.center - spec.half_width, spec.center + spec.half_width);
            let rise = SmoothStep::new(a, spec.center).map_err(core_error)?;
            let fall = SmoothStep::new(spec.center, b).map_err(core_error)?;
            CircleCutoff::from_fn(c.n_max, |x| {
                // distance to the centre measured around the circle
                let mut y = x;
                while y < spec.center - PI {
                    y += 2.0 * PI;
                }
                while y > spec.center + PI {
                    y -= 2.0 * PI;
                }
                spec.amplitude * rise.value(y).min(1.0 - fall.value(y))
            })
            .map_err(core_error)?
        }
    };
    let dt = c.dt.unwrap_or(1.0 / (c.n_max as f64).sqrt());
    if c.stride == 0 {
        return Err(CliError::Input("circle.stride must be at least 1".into()));
    }
    let (hist, _) = evolve_circle(&state, &chi, dt, 2.0 * c.t_long, &c.s_list, 1).map_err(core_error)?;
    let report: UniformBoundReport = uniform_bound_from_history(&hist, &state, c.t_long).map_err(core_error)?;
    let mut files = Files::new(o.out)?;
    let mut header = vec!["t".to_string(), "l2".to_string()];
    header.extend(c.s_list.iter().map(|s| format!("hs_{s}")));
    header.extend(["pu_u".to_string(), "rate_norm".to_string()]);
    let last = hist.times.len() - 1;
    let rows = (0..hist.times.len())
        .filter(|k| k % c.stride == 0 || *k == last)
        .map(|k| {
            let mut row = vec![fmt(hist.times[k]), fmt(hist.l2[k])];
            row.extend(hist.sobolev.iter().map(|col| fmt(col[k])));
            row.push(fmt(hist.damping_form[k]));
            row.push(fmt(hist.rate_norm[k]));
            row
        });
    let header_ref: Vec<&str> = header.iter().map(String::as_str).collect();
    files.csv("circle_norms.csv", &header_ref, rows)?;
    files.json("circle_report.json", &report)?;
    manifest(&mut files, "circle", &cfg, started, clock)
}

#[derive(Debug, Serialize)]
pub struct SweepRow {
    pub delta: f64,
    pub dir: String,
    pub h_final: f64,
    pub decay_rate: Option<f64>,
    pub admissible: Option<bool>,
}

pub fn sweep(o: &Options) -> Result<(), CliError> {
    let (started, clock) = (unix_now(), Instant::now());
    let cfg = load_run(o.config)?;
    let deltas = cfg
        .sweep
        .as_ref()
        .map(|s| s.deltas.clone())
        .ok_or_else(|| CliError::Input(format!("{}: missing required key `sweep.deltas`", o.config.display())))?;
    if deltas.is_empty() {
        return Err(CliError::Input("sweep.deltas is empty".into()));
    }
    let sims: Vec<SimConfig> = deltas.iter().map(|d| cfg.sim_config(Some(*d))).collect::<Result<_, _>>()?;
    let mut files = Files::new(o.out)?;
    let mut rows = Vec::new();
    for (k, (d, sim)) in deltas.iter().zip(&sims).enumerate() {
        let dir = format!("delta_{k:03}");
        let mut sub = Files::new(&o.out.join(&dir))?;
        let (_, summary) = run_simulation(sim, &mut sub, &cfg.output.snapshot_times)?;
        let mut one = cfg.clone();
        one.beach = Some(crate::config::Beach { delta: *d });
        one.sweep = None;
        manifest(&mut sub, "simulate", &one, started, clock)?;
        rows.push(SweepRow {
            delta: *d,
            dir,
            h_final: summary.h_final,
            decay_rate: summary.decay_rate,
            admissible: summary.admissibility.map(|a| a.admissible),
        });
    }
    files.csv(
        "sweep.csv",
        &["delta", "dir", "h_final", "decay_rate", "admissible"],
        rows.iter().map(|r| {
            vec![
                fmt(r.delta),
                r.dir.clone(),
                fmt(r.h_final),
                r.decay_rate.map_or(String::new(), fmt),
                r.admissible.map_or(String::new(), |a| a.to_string()),
            ]
        }),
    )?;
    files.json("sweep.json", &rows)?;
    manifest(&mut files, "sweep", &cfg, started, clock)
}
