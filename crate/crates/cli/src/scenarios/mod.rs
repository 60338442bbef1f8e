//! The nine experiment scenarios and their parameter tables.

mod phase;
mod shocks;
mod viscous;
mod waves;

use std::path::PathBuf;

use fwlab_core::diagnostics::ExtremaSeries;
use fwlab_core::grid::{InitialData, PeriodicGrid, StateField};
use fwlab_core::io;

use crate::error::CliError;
use crate::manifest::Manifest;
use crate::params::{Bound, Kind, ParamSpec, Params};

pub struct Scenario {
    pub name: &'static str,
    pub about: &'static str,
    pub params: &'static [ParamSpec],
    pub run: fn(&Params, &mut Output) -> Result<(), CliError>,
}

pub const SCENARIOS: &[Scenario] = &[
    Scenario {
        name: "simulate",
        about: "Godunov run from a preset with snapshots, shock tracks and extrema",
        params: shocks::SIMULATE,
        run: shocks::simulate,
    },
    Scenario {
        name: "viscous",
        about: "Viscous IMEX run with the L2 energy ledger",
        params: viscous::PARAMS,
        run: viscous::run,
    },
    Scenario {
        name: "wave-branch",
        about: "Continue the first traveling-wave branch and locate its endpoints",
        params: waves::BRANCH,
        run: waves::branch,
    },
    Scenario {
        name: "wave-evolve",
        about: "Evolve a traveling wave, optionally disturbed, and record the orbit probe",
        params: waves::EVOLVE,
        run: waves::evolve,
    },
    Scenario {
        name: "perturb",
        about: "Compare the orbit of a disturbed traveling wave with the undisturbed one",
        params: waves::PERTURB,
        run: waves::perturb,
    },
    Scenario {
        name: "threshold-scan",
        about: "Shock detection over cosine amplitudes up to a time horizon",
        params: shocks::THRESHOLD_SCAN,
        run: shocks::threshold_scan,
    },
    Scenario {
        name: "entropy-check",
        about: "Discrete entropy inequality on a run and on its time reversal",
        params: shocks::ENTROPY_CHECK,
        run: shocks::entropy_check,
    },
    Scenario {
        name: "l1-check",
        about: "L1 distance of perturbed pairs against the growth bound",
        params: shocks::L1_CHECK,
        run: shocks::l1_check,
    },
    Scenario {
        name: "phase-scan",
        about: "Shooting scan of the single-shock phase-plane problem",
        params: phase::PARAMS,
        run: phase::run,
    },
];

pub fn find(name: &str) -> Option<&'static Scenario> {
    SCENARIOS.iter().find(|s| s.name == name)
}

/// Output directory plus the manifest being assembled.
pub struct Output {
    pub dir: PathBuf,
    pub manifest: Manifest,
}

impl Output {
    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        io::write_text(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.manifest.files.push(name.to_string());
        Ok(())
    }

    pub fn snapshot(&mut self, field: &StateField) -> Result<(), CliError> {
        self.write(&io::snapshot_file_name(field.time()), &io::snapshot_csv(field))
    }

    pub fn extrema(&mut self, series: &ExtremaSeries) -> Result<(), CliError> {
        self.write("extrema.csv", &io::extrema_csv(series))?;
        let m = &mut self.manifest;
        m.series("extrema_t", series.times.iter().copied());
        m.series("extrema_max", series.max.iter().copied());
        m.series("extrema_min", series.min.iter().copied());
        m.series("extrema_peaks", series.peaks.iter().map(|&p| p as f64));
        Ok(())
    }
}

// Parameters shared by several scenarios.

const N: ParamSpec = ParamSpec::new("n", Kind::Int, "1000", "number of grid cells").bounded(Bound::AtLeast(4.0));
const DATA: ParamSpec = ParamSpec::new(
    "data",
    Kind::Choice(&["data1", "data2", "cosine"]),
    "data1",
    "initial-data preset",
);
const AMPLITUDE: ParamSpec = ParamSpec::new("amplitude", Kind::Float, "0.02", "amplitude of the cosine preset");
const Q: ParamSpec = ParamSpec::new(
    "q",
    Kind::FloatOrAuto,
    "auto",
    "typical size in tau = cfl h / q; auto: 2 for data1, 0.5 for data2, |amplitude| for cosine",
)
.bounded(Bound::Positive);
const CFL: ParamSpec = ParamSpec::new("cfl", Kind::Float, "0.4", "CFL factor").bounded(Bound::Positive);
const NONLOCAL: ParamSpec = ParamSpec::new("nonlocal", Kind::Bool, "true", "include the nonlocal term");

fn grid(p: &Params) -> Result<PeriodicGrid, CliError> {
    Ok(PeriodicGrid::new(p.usize("n"))?)
}

/// Preset and the resolved step scale `q`.
fn initial_data(p: &Params) -> Result<(InitialData, f64), CliError> {
    let init = InitialData::from_preset(p.text("data"), p.f64("amplitude"))?;
    let typical = match &init {
        InitialData::Data1 => 2.0,
        InitialData::Data2 => 0.5,
        InitialData::Cosine { q } => q.abs(),
        InitialData::Fourier { .. } => unreachable!("not offered as a preset"),
    };
    Ok((init, p.auto_f64("q").unwrap_or(typical)))
}

/// Sorted union of two time lists, merging entries closer than `1e-9`.
fn merge_times(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = a.iter().chain(b).copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup_by(|x, y| (*x - *y).abs() < 1e-9);
    all
}

fn contains_time(times: &[f64], t: f64) -> bool {
    times.iter().any(|&s| (s - t).abs() < 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_names_are_unique_and_complete() {
        let names: Vec<&str> = SCENARIOS.iter().map(|s| s.name).collect();
        assert_eq!(
            names,
            [
                "simulate",
                "viscous",
                "wave-branch",
                "wave-evolve",
                "perturb",
                "threshold-scan",
                "entropy-check",
                "l1-check",
                "phase-scan"
            ]
        );
    }

    #[test]
    fn defaults_parse() {
        for s in SCENARIOS {
            for spec in s.params {
                spec.parse_str(spec.default)
                    .unwrap_or_else(|e| panic!("{}: {e}", s.name));
            }
            let mut keys: Vec<&str> = s.params.iter().map(|p| p.key).collect();
            keys.sort_unstable();
            keys.dedup();
            assert_eq!(keys.len(), s.params.len(), "{}", s.name);
        }
    }

    #[test]
    fn merged_times() {
        let t = merge_times(&[0.0, 0.05, 0.1], &[0.0, 0.01, 0.05, 0.1]);
        assert_eq!(t, vec![0.0, 0.01, 0.05, 0.1]);
    }
}
