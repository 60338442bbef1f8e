//! Traveling-wave scenarios: wave-branch, wave-evolve, perturb.

use std::fmt::Write as _;

use fwlab_core::io;
use fwlab_core::waves::{
    bifurcation_speed, continue_branch, discrete_bifurcation_speed, evolve_wave_as_initial_data,
    orbit_deviation, orbit_return_gap, solve_from_cosine, solve_wave, translation_error,
    ContinuationOptions, Disturbance, Perturbation, WaveProfile, WaveSeed,
};

use super::{grid, Output, N};
use crate::error::CliError;
use crate::manifest::Check;
use crate::params::{Bound, Kind, ParamSpec, Params};

/// Profiles must solve the discrete wave equation to this residual.
const PROFILE_RESIDUAL_TOL: f64 = 1e-12;

/// Orbit points of the disturbed run must stay this many `δ` from the
/// undisturbed orbit.
const ORBIT_DELTAS: f64 = 3.0;

const SPEED: ParamSpec = ParamSpec::new("c", Kind::Float, "0.0255", "wave speed").bounded(Bound::Positive);
const DELTA_PCT: ParamSpec = ParamSpec::new(
    "delta_pct",
    Kind::Float,
    "5",
    "disturbance size in percent of the wave amplitude",
)
.bounded(Bound::NonNegative);

pub const BRANCH: &[ParamSpec] = &[
    N,
    ParamSpec::new("c_start", Kind::Float, "0.025", "first speed").bounded(Bound::Positive),
    ParamSpec::new("c_stop", Kind::Float, "0.0269", "last speed").bounded(Bound::Positive),
    ParamSpec::new("steps", Kind::Int, "20", "equally spaced speeds").bounded(Bound::AtLeast(1.0)),
    ParamSpec::new("find_endpoints", Kind::Bool, "true", "search past the interval for the branch ends"),
    ParamSpec::new(
        "profile_speeds",
        Kind::FloatList,
        "0.025,0.0255,0.026,0.0269",
        "speeds whose profiles are written",
    )
    .bounded(Bound::Positive),
];

pub const EVOLVE: &[ParamSpec] = &[
    N,
    SPEED,
    DELTA_PCT,
    ParamSpec::new("t_end", Kind::Float, "300", "final time").bounded(Bound::Positive),
    ParamSpec::new("output_dt", Kind::Float, "1", "snapshot file cadence").bounded(Bound::Positive),
    ParamSpec::new(
        "perturb",
        Kind::Choice(&["none", "cos2", "cos3", "cos4", "asym"]),
        "none",
        "disturbance added to the wave",
    ),
];

pub const PERTURB: &[ParamSpec] = &[
    N,
    SPEED,
    DELTA_PCT,
    ParamSpec::new("t_end", Kind::Float, "300", "final time").bounded(Bound::Positive),
    ParamSpec::new("output_dt", Kind::Float, "50", "snapshot file cadence").bounded(Bound::Positive),
    ParamSpec::new(
        "perturb",
        Kind::Choice(&["cos2", "cos3", "cos4", "asym"]),
        "asym",
        "disturbance added to the wave",
    ),
];

fn profile_file(c: f64) -> String {
    format!("profile_c{c:.5}.csv")
}

fn disturbance(name: &str) -> Option<Disturbance> {
    match name {
        "none" => None,
        other => Some(other.parse().expect("choices are valid disturbances")),
    }
}

fn record_profile(out: &mut Output, profile: &WaveProfile) {
    let m = &mut out.manifest;
    m.diag("c", profile.c);
    m.diag("amplitude", profile.amplitude());
    m.diag("profile_residual", profile.residual);
    m.diag("newton_iterations", profile.iterations as i64);
    m.diag("discriminant_ratio", profile.discriminant_ratio());
}

pub fn branch(p: &Params, out: &mut Output) -> Result<(), CliError> {
    let grid = grid(p)?;
    let opts = ContinuationOptions {
        find_endpoints: p.bool("find_endpoints"),
        ..ContinuationOptions::default()
    };
    let branch = continue_branch(grid, p.f64("c_start"), p.f64("c_stop"), p.usize("steps"), opts)?;

    let mut csv = String::from("c,amplitude,discriminant_ratio,residual\n");
    for prof in &branch.profiles {
        let cells = [prof.c, prof.amplitude(), prof.discriminant_ratio(), prof.residual];
        let cells: Vec<String> = cells.iter().map(|v| format!("{v:.10e}")).collect();
        writeln!(csv, "{}", cells.join(",")).expect("writing to a String");
    }
    out.write("branch.csv", &csv)?;

    let mut residual: f64 = branch.profiles.iter().map(|p| p.residual).fold(0.0, f64::max);
    for &c in p.floats("profile_speeds") {
        let nearest = branch
            .profiles
            .iter()
            .min_by(|a, b| (a.c - c).abs().total_cmp(&(b.c - c).abs()))
            .expect("a branch has at least one profile");
        let profile = if nearest.c == c {
            nearest.clone()
        } else {
            solve_wave(c, WaveSeed::Profile(nearest))?
        };
        residual = residual.max(profile.residual);
        out.write(&profile_file(c), &io::profile_csv(&profile))?;
    }

    let m = &mut out.manifest;
    m.diag("bifurcation_speed", bifurcation_speed(1));
    m.diag("discrete_bifurcation_speed", discrete_bifurcation_speed(1, &grid));
    m.series("branch_c", branch.profiles.iter().map(|p| p.c));
    m.series("branch_amplitude", branch.profiles.iter().map(|p| p.amplitude()));
    if let Some(c) = branch.lower_endpoint {
        m.diag("lower_endpoint", c);
    }
    if let Some(c) = branch.upper_endpoint {
        m.diag("upper_endpoint", c);
        m.diag("upper_reached_peakon", branch.upper_reached_peakon);
    }
    m.check(Check::at_most("profile_residual", residual, PROFILE_RESIDUAL_TOL));
    if opts.find_endpoints {
        m.check(Check::holds("peakon_endpoint_found", branch.upper_reached_peakon));
    }
    Ok(())
}

pub fn evolve(p: &Params, out: &mut Output) -> Result<(), CliError> {
    let grid = grid(p)?;
    let profile = solve_from_cosine(grid, p.f64("c"))?;
    let pert = disturbance(p.text("perturb"))
        .map(|d| Perturbation::percent_of_amplitude(d, p.f64("delta_pct"), &profile));
    let t_end = p.f64("t_end");
    let ev = evolve_wave_as_initial_data(&profile, t_end, pert, p.f64("output_dt"))?;

    out.write("profile.csv", &io::profile_csv(&profile))?;
    out.write("orbit.csv", &io::orbit_csv(&ev.orbit))?;
    for snap in &ev.trajectory.snapshots {
        out.snapshot(snap)?;
    }
    record_profile(out, &profile);
    let m = &mut out.manifest;
    m.diag("delta", ev.delta);
    m.diag("probe_a", ev.probe_cells.0 as i64);
    m.diag("probe_b", ev.probe_cells.1 as i64);
    m.diag("tau_initial", ev.trajectory.tau_initial);
    m.diag("steps", ev.trajectory.steps as i64);
    let last = ev.trajectory.last().expect("final state");
    m.diag("translation_error", translation_error(&profile, last));
    if let Some(gap) = orbit_return_gap(&ev.orbit, profile.c) {
        m.diag("orbit_return_gap", gap);
    }
    Ok(())
}

pub fn perturb(p: &Params, out: &mut Output) -> Result<(), CliError> {
    let grid = grid(p)?;
    let profile = solve_from_cosine(grid, p.f64("c"))?;
    let d = disturbance(p.text("perturb")).expect("`none` is not offered");
    let pert = Perturbation::percent_of_amplitude(d, p.f64("delta_pct"), &profile);
    let t_end = p.f64("t_end");
    let output_dt = p.f64("output_dt");
    let (base, disturbed) = rayon::join(
        || evolve_wave_as_initial_data(&profile, t_end, None, output_dt),
        || evolve_wave_as_initial_data(&profile, t_end, Some(pert), output_dt),
    );
    let (base, disturbed) = (base?, disturbed?);

    out.write("profile.csv", &io::profile_csv(&profile))?;
    out.write("orbit_base.csv", &io::orbit_csv(&base.orbit))?;
    out.write("orbit_perturbed.csv", &io::orbit_csv(&disturbed.orbit))?;
    for snap in &disturbed.trajectory.snapshots {
        out.snapshot(snap)?;
    }
    let deviation = orbit_deviation(&base.orbit, &disturbed.orbit);
    record_profile(out, &profile);
    let m = &mut out.manifest;
    m.diag("delta", pert.delta);
    m.diag("orbit_deviation", deviation);
    m.diag("orbit_deviation_in_delta", deviation / pert.delta);
    m.diag("orbit_points", disturbed.orbit.len() as i64);
    m.check(Check::at_most("orbit_within_3_delta", deviation, ORBIT_DELTAS * pert.delta));
    Ok(())
}
