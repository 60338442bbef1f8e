use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn fwlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fwlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn manifest(dir: &Path) -> toml::Table {
    fs::read_to_string(dir.join("manifest.toml"))
        .unwrap()
        .parse()
        .unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const SMALL_SIMULATE: &[&str] = &["simulate", "--n", "200", "--t-end", "0.2"];

#[test]
fn simulate_writes_snapshots_shocks_and_manifest() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().join("run");
    let out = fwlab(&[SMALL_SIMULATE, &["--out", dir.to_str().unwrap()]].concat());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let names: Vec<String> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    let snaps = names.iter().filter(|n| n.starts_with("snap_t")).count();
    assert_eq!(snaps, 5, "{names:?}");
    for file in ["snap_t0.0500.csv", "shocks.csv", "extrema.csv", "manifest.toml"] {
        assert!(names.iter().any(|n| n == file), "missing {file}");
    }
    let snap = fs::read_to_string(dir.join("snap_t0.0500.csv")).unwrap();
    assert!(snap.starts_with("x,u\n"));
    assert_eq!(snap.lines().count(), 201);
    assert!(!snap.contains('\r'));
    let shocks = fs::read_to_string(dir.join("shocks.csv")).unwrap();
    assert!(shocks.starts_with("track,t,position,u_minus,u_plus,jump,speed_fit\n"));
    let extrema = fs::read_to_string(dir.join("extrema.csv")).unwrap();
    assert!(extrema.starts_with("t,max,min,peaks\n"));

    let m = manifest(&dir);
    for section in ["params", "diagnostics", "shocks", "checks"] {
        assert!(m[section].is_table(), "section {section}");
    }
    assert_eq!(m["scenario"].as_str(), Some("simulate"));
    assert_eq!(m["checks"]["all_pass"].as_bool(), Some(true));
}

#[test]
fn identical_runs_give_identical_files() {
    let tmp = TempDir::new().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for dir in [&a, &b] {
        let out = fwlab(&[SMALL_SIMULATE, &["--out", dir.to_str().unwrap()]].concat());
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    let mut compared = 0;
    for entry in fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        let left = fs::read(a.join(&name)).unwrap();
        let right = fs::read(b.join(&name)).unwrap();
        assert!(left == right, "{name:?} differs");
        compared += 1;
    }
    assert_eq!(compared, fs::read_dir(&b).unwrap().count());
}

#[test]
fn worker_count_does_not_change_output() {
    let tmp = TempDir::new().unwrap();
    let scan = ["threshold-scan", "--n", "100", "--amplitudes", "0.02,0.05", "--t-max", "2"];
    let one = tmp.path().join("one");
    let four = tmp.path().join("four");
    fwlab(&[&scan[..], &["--jobs", "1", "--out", one.to_str().unwrap()]].concat());
    fwlab(&[&scan[..], &["--jobs", "4", "--out", four.to_str().unwrap()]].concat());
    for file in ["threshold_scan.csv", "manifest.toml"] {
        assert_eq!(fs::read(one.join(file)).unwrap(), fs::read(four.join(file)).unwrap(), "{file}");
    }
}

#[test]
fn flags_override_the_config_file() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, "[params]\nn = 500\nt_end = 0.1\n").unwrap();
    let dir = tmp.path().join("out");
    let out = fwlab(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--n",
        "1000",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let m = manifest(&dir);
    assert_eq!(m["params"]["n"].as_integer(), Some(1000));
    assert_eq!(m["params"]["t_end"].as_float(), Some(0.1));
    assert_eq!(m["params"]["data"].as_str(), Some("data1"));
}

#[test]
fn empty_config_gives_all_defaults() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("empty.toml");
    fs::write(&cfg, "").unwrap();
    let dir = tmp.path().join("out");
    let out = fwlab(&["simulate", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let m = manifest(&dir);
    let p = &m["params"];
    assert_eq!(p["n"].as_integer(), Some(1000));
    assert_eq!(p["cfl"].as_float(), Some(0.4));
    assert_eq!(p["t_end"].as_float(), Some(0.65));
    assert_eq!(p["q"].as_str(), Some("auto"));
    assert_eq!(m["diagnostics"]["q"].as_float(), Some(2.0));
    let snaps = fs::read_dir(&dir)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("snap_t"))
        .count();
    assert_eq!(snaps, 14);
}

#[test]
fn unknown_config_key_is_named() {
    let tmp = TempDir::new().unwrap();
    for body in ["dat1 = true\n", "[params]\ndat1 = true\n"] {
        let cfg = tmp.path().join("bad.toml");
        fs::write(&cfg, body).unwrap();
        let out = fwlab(&["simulate", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2));
        assert!(stderr(&out).contains("dat1"), "{}", stderr(&out));
    }
}

#[test]
fn config_errors_report_line_and_type() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "[params]\nn = 100\nt_end = = 2\n").unwrap();
    let out = fwlab(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    fs::write(&cfg, "[params]\nn = \"many\"\n").unwrap();
    let out = fwlab(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("`n`") && stderr(&out).contains("type mismatch"), "{}", stderr(&out));

    fs::write(&cfg, "scenario = \"viscous\"\n").unwrap();
    let out = fwlab(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().to_str().unwrap();

    let out = fwlab(&["simulate", "--n", "2", "--out", dir]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("`n`"), "{}", stderr(&out));
    assert_eq!(fwlab(&["simulate", "--no-such-flag", "1"]).status.code(), Some(2));
    assert_eq!(fwlab(&["no-such-scenario"]).status.code(), Some(2));
    assert_eq!(fwlab(&[]).status.code(), Some(2));

    // q = 0.02 cannot form a shock by t = 1, so the embedded check fails.
    let out = fwlab(&["threshold-scan", "--n", "100", "--amplitudes", "0.02", "--t-max", "1", "--out", dir]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    let m = manifest(tmp.path());
    assert_eq!(m["checks"]["all_pass"].as_bool(), Some(false));

    // u²/2 overflows on the first step.
    let out = fwlab(&[
        "simulate",
        "--data",
        "cosine",
        "--amplitude",
        "1e200",
        "--t-end",
        "1e-203",
        "--out",
        dir,
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("t = "), "{}", stderr(&out));
}

#[test]
fn every_scenario_has_help() {
    let names = [
        "simulate",
        "viscous",
        "wave-branch",
        "wave-evolve",
        "perturb",
        "threshold-scan",
        "entropy-check",
        "l1-check",
        "phase-scan",
    ];
    for name in names {
        let out = fwlab(&[name, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(text.contains("--config") && text.contains("[default:"), "{name}: {text}");
    }
}

#[test]
fn threshold_scan_states_its_horizon() {
    let tmp = TempDir::new().unwrap();
    let out = fwlab(&[
        "threshold-scan",
        "--n",
        "100",
        "--amplitudes",
        "0.005",
        "--t-max",
        "2",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let m = manifest(tmp.path());
    assert_eq!(m["diagnostics"]["horizon"].as_float(), Some(2.0));
    assert!(m["diagnostics"]["no_shock_means"].as_str().unwrap().contains("t <= 2"));
    let csv = fs::read_to_string(tmp.path().join("threshold_scan.csv")).unwrap();
    assert_eq!(csv, "q,shock,t_detect,jump\n5.0000000000e-3,0,,\n");
}

#[test]
fn negative_list_values_parse() {
    let tmp = TempDir::new().unwrap();
    let out = fwlab(&[
        "phase-scan",
        "--betas",
        "-0.4,0.5",
        "--ny",
        "5",
        "--nz",
        "4",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = fs::read_to_string(tmp.path().join("phase_scan.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("-4.0000000000e-1,"), "{csv}");
}

fn header(path: &Path) -> String {
    let text = fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(text.ends_with('\n') && !text.contains('\r'));
    text.lines().next().unwrap().to_string()
}

#[test]
fn wave_outputs_follow_the_csv_contract() {
    let tmp = TempDir::new().unwrap();
    let branch = tmp.path().join("branch");
    let out = fwlab(&[
        "wave-branch",
        "--n",
        "200",
        "--steps",
        "4",
        "--find-endpoints",
        "false",
        "--out",
        branch.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(header(&branch.join("branch.csv")), "c,amplitude,discriminant_ratio,residual");
    for c in ["0.02500", "0.02550", "0.02600", "0.02690"] {
        assert_eq!(header(&branch.join(format!("profile_c{c}.csv"))), "x,u,v");
    }

    let evolve = tmp.path().join("evolve");
    let out = fwlab(&["wave-evolve", "--n", "200", "--t-end", "2", "--out", evolve.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(header(&evolve.join("orbit.csv")), "step,u_a,u_b");
    assert_eq!(header(&evolve.join("profile.csv")), "x,u,v");
    // Snapshots sit on the step nearest each output time; a small wave has a
    // long step, so the file names carry the actual step times.
    let snaps: Vec<_> = fs::read_dir(&evolve)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap().to_string_lossy().starts_with("snap_t"))
        .collect();
    assert_eq!(snaps.len(), 3);
    for snap in snaps {
        assert_eq!(header(&snap), "x,u");
    }

    let perturb = tmp.path().join("perturb");
    let out = fwlab(&["perturb", "--n", "200", "--t-end", "2", "--output-dt", "1", "--out", perturb.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    for file in ["orbit_base.csv", "orbit_perturbed.csv"] {
        assert_eq!(header(&perturb.join(file)), "step,u_a,u_b");
    }
    let m = manifest(&perturb);
    for file in m["files"].as_array().unwrap() {
        assert!(perturb.join(file.as_str().unwrap()).is_file());
    }
}
