//! CSV output. Numbers use Rust's `{:e}` formatting with 10 fractional
//! digits, so files are locale-independent and byte-stable across runs.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use crate::diagnostics::{ExtremaSeries, ShockTracks};
use crate::grid::StateField;
use crate::phase::PhaseTrajectory;
use crate::waves::{OrbitSample, WaveProfile};

fn num(out: &mut String, v: f64) {
    write!(out, "{v:.10e}").expect("writing to a String");
}

/// `snap_t0.0500.csv`
pub fn snapshot_file_name(t: f64) -> String {
    format!("snap_t{t:.4}.csv")
}

/// Header `x,u`, one row per cell.
pub fn snapshot_csv(field: &StateField) -> String {
    let grid = field.grid();
    let mut out = String::with_capacity(32 * grid.n() + 8);
    out.push_str("x,u\n");
    for (k, &u) in field.values().iter().enumerate() {
        num(&mut out, grid.x(k));
        out.push(',');
        num(&mut out, u);
        out.push('\n');
    }
    out
}

/// Header `step,u_a,u_b`.
pub fn orbit_csv(orbit: &[OrbitSample]) -> String {
    let mut out = String::with_capacity(40 * orbit.len() + 16);
    out.push_str("step,u_a,u_b\n");
    for s in orbit {
        write!(out, "{},", s.step).expect("writing to a String");
        num(&mut out, s.a);
        out.push(',');
        num(&mut out, s.b);
        out.push('\n');
    }
    out
}

/// Header `x,u,v`.
pub fn profile_csv(profile: &WaveProfile) -> String {
    let mut out = String::with_capacity(48 * profile.u.len() + 8);
    out.push_str("x,u,v\n");
    for (k, (&u, &v)) in profile.u.iter().zip(&profile.v).enumerate() {
        num(&mut out, profile.grid.x(k));
        out.push(',');
        num(&mut out, u);
        out.push(',');
        num(&mut out, v);
        out.push('\n');
    }
    out
}

/// Header `t,max,min,peaks`.
pub fn extrema_csv(series: &ExtremaSeries) -> String {
    let mut out = String::from("t,max,min,peaks\n");
    for i in 0..series.times.len() {
        num(&mut out, series.times[i]);
        out.push(',');
        num(&mut out, series.max[i]);
        out.push(',');
        num(&mut out, series.min[i]);
        writeln!(out, ",{}", series.peaks[i]).expect("writing to a String");
    }
    out
}

/// Header `track,t,position,u_minus,u_plus,jump,speed_fit`; a missing speed
/// is written as an empty field.
pub fn shocks_csv(tracks: &ShockTracks) -> String {
    let mut out = String::from("track,t,position,u_minus,u_plus,jump,speed_fit\n");
    for (id, track) in tracks.tracks.iter().enumerate() {
        for r in &track.records {
            write!(out, "{id},").expect("writing to a String");
            for v in [r.t, r.position, r.u_minus, r.u_plus, r.jump] {
                num(&mut out, v);
                out.push(',');
            }
            if let Some(s) = r.speed_fit {
                num(&mut out, s);
            }
            out.push('\n');
        }
    }
    out
}

/// Header `x,y,z`.
pub fn phase_csv(traj: &PhaseTrajectory) -> String {
    let mut out = String::from("x,y,z\n");
    for s in &traj.samples {
        num(&mut out, s.x);
        out.push(',');
        num(&mut out, s.y);
        out.push(',');
        num(&mut out, s.z);
        out.push('\n');
    }
    out
}

pub fn write_text(path: &Path, contents: &str) -> io::Result<()> {
    fs::write(path, contents)
}

/// Writes one snapshot file per field into `dir` and returns the file names.
pub fn write_snapshots(dir: &Path, snapshots: &[StateField]) -> io::Result<Vec<String>> {
    let mut names = Vec::with_capacity(snapshots.len());
    for s in snapshots {
        let name = snapshot_file_name(s.time());
        write_text(&dir.join(&name), &snapshot_csv(s))?;
        names.push(name);
    }
    Ok(names)
}
