use std::fmt::Write as _;

use fwlab_core::io;
use fwlab_core::phase::{phase_scan, phase_shoot, scan_initial_conditions};

use super::Output;
use crate::error::CliError;
use crate::manifest::Check;
use crate::params::{Bound, Kind, ParamSpec, Params};

/// No shooting start may close the single-shock problem better than this.
const MIN_RESIDUAL: f64 = 1e-2;

/// Trajectories started at an equilibrium must stay within this distance.
const EQUILIBRIUM_TOL: f64 = 1e-10;

pub const PARAMS: &[ParamSpec] = &[
    ParamSpec::new("betas", Kind::FloatList, "-1,-0.4,0,0.5,1", "values of beta"),
    ParamSpec::new("ny", Kind::Int, "21", "start values of y over [-3, 3]").bounded(Bound::AtLeast(2.0)),
    ParamSpec::new("nz", Kind::Int, "12", "start values of z over [-2, 2]").bounded(Bound::AtLeast(2.0)),
    ParamSpec::new("y_gap", Kind::Float, "0.1", "skip starts with |y| below this").bounded(Bound::NonNegative),
];

pub fn run(p: &Params, out: &mut Output) -> Result<(), CliError> {
    let starts = scan_initial_conditions(p.usize("ny"), p.usize("nz"), p.f64("y_gap"));
    let report = phase_scan(p.floats("betas"), &starts);

    let mut csv = String::from("beta,attempted,completed,no_return,singular,min_residual,y0,z0\n");
    for b in &report.betas {
        write!(csv, "{:.10e},{},{},{},{},{:.10e}", b.beta, b.attempted, b.completed, b.no_return, b.singular, b.min_residual)
            .expect("writing to a String");
        match b.argmin {
            Some((y0, z0)) => writeln!(csv, ",{y0:.10e},{z0:.10e}"),
            None => writeln!(csv, ",,"),
        }
        .expect("writing to a String");
    }
    out.write("phase_scan.csv", &csv)?;

    // Closest miss per beta, for plotting.
    for b in &report.betas {
        if let Some((y0, z0)) = b.argmin {
            if let Ok(shot) = phase_shoot(b.beta, y0, z0) {
                out.write(&format!("phase_beta{:.3}.csv", b.beta), &io::phase_csv(&shot.trajectory))?;
            }
        }
    }

    let drift = report
        .betas
        .iter()
        .filter_map(|b| b.equilibrium_drift)
        .fold(0.0, f64::max);
    let min = report.min_residual();
    let m = &mut out.manifest;
    m.diag("starts_per_beta", starts.len() as i64);
    m.diag("min_residual", min);
    m.diag("equilibrium_drift", drift);
    m.series("beta", report.betas.iter().map(|b| b.beta));
    m.series("beta_min_residual", report.betas.iter().map(|b| b.min_residual));
    m.series("beta_completed", report.betas.iter().map(|b| b.completed as f64));
    let completed: usize = report.betas.iter().map(|b| b.completed).sum();
    m.check(Check::at_least("completed_shots", completed as f64, 1.0));
    m.check(Check::greater("min_residual", min, MIN_RESIDUAL));
    m.check(Check::at_most("equilibria_stationary", drift, EQUILIBRIUM_TOL));
    Ok(())
}
