//! Godunov-based scenarios: simulate, threshold-scan, entropy-check, l1-check.

use std::f64::consts::PI;
use std::fmt::Write as _;

use fwlab_core::diagnostics::{
    default_test_functions, default_threshold, entropy_residual, extrema_series, first_detection,
    jump_monotonicity, l1_stability, lambda_grid, rankine_hugoniot, track_shock, L1_SLACK,
    SPEED_WINDOW,
};
use fwlab_core::godunov::{run, GodunovConfig};
use fwlab_core::grid::{InitialData, StateField};
use fwlab_core::io;
use fwlab_core::trajectory::uniform_output_times;
use fwlab_core::waves::Disturbance;
use rayon::prelude::*;

use super::{contains_time, grid, initial_data, merge_times, Output, AMPLITUDE, CFL, DATA, N, NONLOCAL, Q};
use crate::error::CliError;
use crate::manifest::Check;
use crate::params::{Bound, Kind, ParamSpec, Params};

/// Allowed drift of the total mass.
const MASS_TOL: f64 = 1e-10;

/// The reversed trajectory must miss the entropy threshold by this factor.
const ENTROPY_REVERSAL_FACTOR: f64 = 10.0;

/// Amplitudes at or above this must form a shock within the horizon.
const STRONG_AMPLITUDE: f64 = 0.02;
/// Amplitudes at or below this must not.
const WEAK_AMPLITUDE: f64 = 0.005;

const THRESHOLD: ParamSpec = ParamSpec::new(
    "threshold",
    Kind::FloatOrAuto,
    "auto",
    "minimum shock jump; auto: a quarter of the initial oscillation",
)
.bounded(Bound::Positive);

pub const SIMULATE: &[ParamSpec] = &[
    N,
    DATA,
    AMPLITUDE,
    Q,
    CFL,
    NONLOCAL,
    THRESHOLD,
    ParamSpec::new("t_end", Kind::Float, "0.65", "final time").bounded(Bound::Positive),
    ParamSpec::new("output_dt", Kind::Float, "0.05", "snapshot file cadence").bounded(Bound::Positive),
    ParamSpec::new("track_dt", Kind::Float, "0.01", "shock tracking cadence").bounded(Bound::Positive),
];

pub const THRESHOLD_SCAN: &[ParamSpec] = &[
    N,
    CFL,
    NONLOCAL,
    ParamSpec::new(
        "amplitudes",
        Kind::FloatList,
        "0.005,0.0075,0.01,0.0125,0.015,0.02",
        "cosine amplitudes to scan",
    )
    .bounded(Bound::Positive),
    ParamSpec::new("t_max", Kind::Float, "50", "time horizon").bounded(Bound::Positive),
    ParamSpec::new("scan_dt", Kind::Float, "0.1", "detection cadence").bounded(Bound::Positive),
];

pub const ENTROPY_CHECK: &[ParamSpec] = &[
    N,
    DATA,
    AMPLITUDE,
    Q,
    CFL,
    NONLOCAL,
    ParamSpec::new("t_end", Kind::Float, "0.65", "final time").bounded(Bound::Positive),
    ParamSpec::new("snapshot_dt", Kind::Float, "0.001", "snapshot spacing for the time quadrature")
        .bounded(Bound::Positive),
    ParamSpec::new("lambdas", Kind::Int, "9", "number of Kruzhkov constants").bounded(Bound::AtLeast(2.0)),
];

pub const L1_CHECK: &[ParamSpec] = &[
    N,
    DATA,
    AMPLITUDE,
    Q,
    CFL,
    NONLOCAL,
    ParamSpec::new("t_end", Kind::Float, "0.5", "final time").bounded(Bound::Positive),
    ParamSpec::new("output_dt", Kind::Float, "0.05", "comparison cadence").bounded(Bound::Positive),
    ParamSpec::new(
        "shape",
        Kind::Choice(&["all", "cos4pi", "sin2pi", "asym"]),
        "all",
        "perturbation shape",
    ),
    ParamSpec::new("size", Kind::Float, "0.01", "perturbation amplitude").bounded(Bound::Positive),
];

fn godunov_config(p: &Params, q: f64, t_end: f64, times: Vec<f64>) -> Result<GodunovConfig, CliError> {
    let cfg = GodunovConfig::new(q, t_end)?
        .with_cfl_factor(p.f64("cfl"))?
        .with_output_times(times)?;
    Ok(if p.bool("nonlocal") { cfg } else { cfg.burgers_only() })
}

fn sci(out: &mut String, v: f64) {
    write!(out, "{v:.10e}").expect("writing to a String");
}

pub fn simulate(p: &Params, out: &mut Output) -> Result<(), CliError> {
    let grid = grid(p)?;
    let (init, q) = initial_data(p)?;
    let u0 = init.sample(grid)?;
    let t_end = p.f64("t_end");
    let written = uniform_output_times(t_end, p.f64("output_dt"));
    let times = merge_times(&written, &uniform_output_times(t_end, p.f64("track_dt")));
    let cfg = godunov_config(p, q, t_end, times.clone())?;
    let traj = run(&u0, &cfg)?;

    for (t, snap) in times.iter().zip(&traj.snapshots) {
        if contains_time(&written, *t) {
            out.snapshot(snap)?;
        }
    }
    let threshold = p.auto_f64("threshold").unwrap_or_else(|| default_threshold(&u0));
    let tracks = track_shock(&traj, threshold, SPEED_WINDOW)?;
    out.write("shocks.csv", &io::shocks_csv(&tracks))?;
    out.extrema(&extrema_series(&traj))?;

    let h = grid.h();
    let m = &mut out.manifest;
    m.diag("q", q);
    m.diag("h", h);
    m.diag("tau_initial", traj.tau_initial);
    m.diag("tau_min", traj.tau_min);
    m.diag("tau_max", traj.tau_max);
    m.diag("steps", traj.steps as i64);
    m.diag("cfl_halvings", traj.halvings as i64);
    m.series("shock_count_t", tracks.counts.iter().map(|c| c.0));
    m.series("shock_count", tracks.counts.iter().map(|c| c.1 as f64));
    if let Some(first) = first_detection(&traj, threshold) {
        m.diag("first_shock_t", first.t);
    }
    if let Some(track) = tracks.longest() {
        if let Ok(rh) = rankine_hugoniot(track, SPEED_WINDOW) {
            m.diag("rh_mean_defect_cells", rh.mean_defect / h);
            m.diag("rh_max_defect_cells", rh.max_defect / h);
        }
        if let Ok(mono) = jump_monotonicity(&track.records) {
            m.diag("jump_decreasing_fraction", mono.fraction);
        }
    }
    m.record_shocks(None, &tracks);

    let mass0 = traj.diagnostics[0].mass;
    let drift = traj
        .diagnostics
        .iter()
        .map(|d| (d.mass - mass0).abs())
        .fold(0.0, f64::max);
    m.diag("mass_drift", drift);
    m.check(Check::at_most("mass_conservation", drift, MASS_TOL));
    Ok(())
}

#[derive(Debug, Clone, Copy)]
struct ScanRow {
    q: f64,
    detected: Option<(f64, f64)>,
}

pub fn threshold_scan(p: &Params, out: &mut Output) -> Result<(), CliError> {
    let grid = grid(p)?;
    let amplitudes = p.floats("amplitudes").to_vec();
    let t_max = p.f64("t_max");
    let times = uniform_output_times(t_max, p.f64("scan_dt"));
    let configs: Vec<GodunovConfig> = amplitudes
        .iter()
        .map(|&q| godunov_config(p, q, t_max, times.clone()))
        .collect::<Result<_, _>>()?;

    let rows: Vec<ScanRow> = amplitudes
        .par_iter()
        .zip(&configs)
        .map(|(&q, cfg)| -> Result<ScanRow, CliError> {
            let u0 = InitialData::Cosine { q }.sample(grid)?;
            let traj = run(&u0, cfg)?;
            let detected = first_detection(&traj, default_threshold(&u0)).map(|r| (r.t, r.jump));
            Ok(ScanRow { q, detected })
        })
        .collect::<Result<_, _>>()?;

    let mut csv = String::from("q,shock,t_detect,jump\n");
    for r in &rows {
        sci(&mut csv, r.q);
        match r.detected {
            Some((t, jump)) => {
                csv.push_str(",1,");
                sci(&mut csv, t);
                csv.push(',');
                sci(&mut csv, jump);
            }
            None => csv.push_str(",0,,"),
        }
        csv.push('\n');
    }
    out.write("threshold_scan.csv", &csv)?;

    let m = &mut out.manifest;
    m.diag("horizon", t_max);
    m.diag(
        "no_shock_means",
        format!("no shock detected for t <= {t_max}; formation after the horizon is not excluded"),
    );
    m.series("scan_q", rows.iter().map(|r| r.q));
    m.series("scan_t_detect", rows.iter().map(|r| r.detected.map_or(f64::NAN, |d| d.0)));
    for r in &rows {
        let verdict = match r.detected {
            Some((t, _)) => format!("shock at t = {t}"),
            None => format!("no shock up to t = {t_max}"),
        };
        m.diag(&format!("verdict_q_{}", r.q), verdict);
        if r.q >= STRONG_AMPLITUDE {
            m.check(Check::holds(&format!("shock_for_q_{}", r.q), r.detected.is_some()));
        } else if r.q <= WEAK_AMPLITUDE {
            m.check(Check::holds(&format!("no_shock_for_q_{}", r.q), r.detected.is_none()));
        }
    }
    Ok(())
}

pub fn entropy_check(p: &Params, out: &mut Output) -> Result<(), CliError> {
    let grid = grid(p)?;
    let (init, q) = initial_data(p)?;
    let u0 = init.sample(grid)?;
    let t_end = p.f64("t_end");
    let cfg = godunov_config(p, q, t_end, uniform_output_times(t_end, p.f64("snapshot_dt")))?;
    let traj = run(&u0, &cfg)?;
    let lambdas = lambda_grid(&traj, p.usize("lambdas"));
    let phis = default_test_functions(0.0, t_end);
    let forward = entropy_residual(&traj, &lambdas, &phis)?;
    let reversed = entropy_residual(&traj.time_reversed(), &lambdas, &phis)?;

    let mut csv = String::from("direction,lambda,x0,t0,integral\n");
    for (name, rep) in [("forward", &forward), ("reversed", &reversed)] {
        for (i, lambda) in rep.lambdas.iter().enumerate() {
            for (j, phi) in rep.test_functions.iter().enumerate() {
                csv.push_str(name);
                for v in [*lambda, phi.x0, phi.t0, rep.integrals[i][j]] {
                    csv.push(',');
                    sci(&mut csv, v);
                }
                csv.push('\n');
            }
        }
    }
    out.write("entropy.csv", &csv)?;

    let tol = forward.tolerance;
    let m = &mut out.manifest;
    m.diag("q", q);
    m.diag("c_ent", forward.c_ent);
    m.diag("tolerance", tol);
    m.diag("tau_initial", traj.tau_initial);
    m.diag("forward_min_integral", forward.min_integral);
    m.diag("reversed_min_integral", reversed.min_integral);
    m.series("lambdas", lambdas.iter().copied());
    m.check(Check::at_least("entropy_forward", forward.min_integral, -tol));
    m.check(Check::at_most(
        "entropy_reversed_fails",
        reversed.min_integral,
        -ENTROPY_REVERSAL_FACTOR * tol,
    ));
    Ok(())
}

fn shape(name: &str) -> fn(f64) -> f64 {
    match name {
        "cos4pi" => |x| (4.0 * PI * x).cos(),
        "sin2pi" => |x| (2.0 * PI * x).sin(),
        "asym" => |x| Disturbance::Asymmetric.eval(x),
        other => unreachable!("shape `{other}` is rejected by the parameter table"),
    }
}

pub fn l1_check(p: &Params, out: &mut Output) -> Result<(), CliError> {
    let grid = grid(p)?;
    let (init, q) = initial_data(p)?;
    let u0 = init.sample(grid)?;
    let t_end = p.f64("t_end");
    let size = p.f64("size");
    let cfg = godunov_config(p, q, t_end, uniform_output_times(t_end, p.f64("output_dt")))?;
    let names: Vec<&str> = match p.text("shape") {
        "all" => vec!["cos4pi", "sin2pi", "asym"],
        one => vec![one],
    };
    let perturbed: Vec<StateField> = names
        .iter()
        .map(|name| {
            let d = shape(name);
            StateField::from_fn(grid, |x| init.eval(x) + size * d(x))
        })
        .collect::<Result<_, _>>()?;
    let reports = perturbed
        .par_iter()
        .map(|v0| l1_stability(&u0, v0, &cfg))
        .collect::<Result<Vec<_>, _>>()?;

    let mut csv = String::from("shape,t,distance,ratio\n");
    for (name, rep) in names.iter().zip(&reports) {
        for i in 0..rep.times.len() {
            csv.push_str(name);
            for v in [rep.times[i], rep.distances[i], rep.ratios[i]] {
                csv.push(',');
                sci(&mut csv, v);
            }
            csv.push('\n');
        }
    }
    out.write("l1.csv", &csv)?;

    let m = &mut out.manifest;
    m.diag("q", q);
    m.diag("exponent", reports[0].exponent);
    for (name, rep) in names.iter().zip(&reports) {
        m.diag(&format!("initial_distance_{name}"), rep.initial_distance);
        m.diag(&format!("max_ratio_{name}"), rep.max_ratio);
        m.check(Check::at_most(&format!("l1_bound_{name}"), rep.max_ratio, 1.0 + L1_SLACK));
    }
    Ok(())
}
