use std::fmt::Write as _;

use fwlab_core::diagnostics::extrema_series;
use fwlab_core::godunov::{run as run_godunov, GodunovConfig};
use fwlab_core::io;
use fwlab_core::trajectory::uniform_output_times;
use fwlab_core::viscous::{run_viscous, ViscousConfig, ViscousTerms};
use rayon::prelude::*;

use super::{grid, initial_data, Output, AMPLITUDE, DATA, N, NONLOCAL, Q};
use crate::error::CliError;
use crate::manifest::Check;
use crate::params::{Bound, Kind, ParamSpec, Params};

/// Largest relative one-step growth of `||u||²` accepted.
const ENERGY_STEP_TOL: f64 = 1e-8;

/// Constant in `max|u(t)| <= ||u0||∞ + C t ||u0||₂`.
const MAX_PRINCIPLE_C: f64 = 1.0;

pub const PARAMS: &[ParamSpec] = &[
    N,
    DATA,
    AMPLITUDE,
    Q,
    NONLOCAL,
    ParamSpec::new("epsilons", Kind::FloatList, "0.01,0.003,0.001", "viscosities, one run each")
        .bounded(Bound::Positive),
    ParamSpec::new("t_end", Kind::Float, "0.5", "final time").bounded(Bound::Positive),
    ParamSpec::new("output_dt", Kind::Float, "0.05", "snapshot file cadence").bounded(Bound::Positive),
    ParamSpec::new("tau", Kind::FloatOrAuto, "auto", "time step; auto: 0.4 h / max|u0|").bounded(Bound::Positive),
];

fn eps_dir(eps: f64) -> String {
    format!("eps_{eps:e}")
}

pub fn run(p: &Params, out: &mut Output) -> Result<(), CliError> {
    let grid = grid(p)?;
    let (init, q) = initial_data(p)?;
    let u0 = init.sample(grid)?;
    let t_end = p.f64("t_end");
    let times = uniform_output_times(t_end, p.f64("output_dt"));
    let terms = ViscousTerms {
        advection: true,
        nonlocal: p.bool("nonlocal"),
    };
    let tau = p.auto_f64("tau");
    let epsilons = p.floats("epsilons").to_vec();
    let configs: Vec<ViscousConfig> = epsilons
        .iter()
        .map(|&eps| {
            let cfg = match tau {
                Some(tau) => ViscousConfig::new(eps, t_end, tau)?,
                None => ViscousConfig::for_initial_data(&u0, eps, t_end)?,
            };
            Ok(cfg.with_output_times(times.clone()).with_terms(terms))
        })
        .collect::<Result<_, CliError>>()?;
    let mut godunov = GodunovConfig::new(q, t_end)?;
    if !terms.nonlocal {
        godunov = godunov.burgers_only();
    }

    let (runs, reference) = rayon::join(
        || {
            configs
                .par_iter()
                .map(|cfg| run_viscous(&u0, cfg))
                .collect::<Result<Vec<_>, _>>()
        },
        || run_godunov(&u0, &godunov),
    );
    let (runs, reference) = (runs?, reference?);
    let reference = reference.last().expect("runs record the final state");

    let sup0 = u0.sup_norm();
    let l2_0 = u0.l2_norm();
    let mut distances = Vec::with_capacity(runs.len());
    for (i, (traj, ledger)) in runs.iter().enumerate() {
        let dir = eps_dir(epsilons[i]);
        for snap in &traj.snapshots {
            out.write(
                &format!("{dir}/{}", io::snapshot_file_name(snap.time())),
                &io::snapshot_csv(snap),
            )?;
        }
        let mut csv = String::from("t,l2_half,dissipation,residual\n");
        for j in 0..ledger.times.len() {
            let row = [ledger.times[j], ledger.l2_half[j], ledger.dissipation[j], ledger.residual[j]];
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.10e}")).collect();
            writeln!(csv, "{}", cells.join(",")).expect("writing to a String");
        }
        out.write(&format!("{dir}/energy.csv"), &csv)?;
        out.write(&format!("{dir}/extrema.csv"), &io::extrema_csv(&extrema_series(traj)))?;

        let increase = ledger.max_relative_increase();
        let worst_c = traj
            .diagnostics
            .iter()
            .filter(|d| d.t > 0.0)
            .map(|d| (d.max.abs().max(d.min.abs()) - sup0) / (d.t * l2_0))
            .fold(f64::NEG_INFINITY, f64::max);
        let distance = traj.last().expect("final state").l1_distance(reference)?;
        distances.push(distance);

        let m = &mut out.manifest;
        m.diag(&format!("{dir}_tau"), configs[i].tau);
        m.diag(&format!("{dir}_max_energy_increase"), increase);
        m.diag(&format!("{dir}_max_principle_constant"), worst_c);
        m.diag(&format!("{dir}_l1_to_godunov"), distance);
        m.check(Check::at_most(&format!("{dir}_energy_nonincreasing"), increase, ENERGY_STEP_TOL));
        m.check(Check::at_most(&format!("{dir}_max_principle"), worst_c, MAX_PRINCIPLE_C));
    }
    let m = &mut out.manifest;
    m.diag("q", q);
    m.series("l1_to_godunov", distances.iter().copied());
    let decreasing_eps = epsilons.windows(2).all(|w| w[1] < w[0]);
    if epsilons.len() >= 2 && decreasing_eps {
        let shrinking = distances.windows(2).all(|w| w[1] < w[0]);
        m.check(Check::holds("l1_to_godunov_decreasing", shrinking));
    }
    Ok(())
}
