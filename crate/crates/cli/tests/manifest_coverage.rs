//! Every declared parameter must be consumed by its scenario and echoed in
//! the manifest. Scenarios run at reduced size.

use std::collections::BTreeSet;

use fwlab_cli::scenarios::SCENARIOS;
use fwlab_cli::{command, execute, prepare};
use tempfile::TempDir;

fn small_args(name: &str) -> &'static [&'static str] {
    match name {
        "simulate" => &["--n", "200", "--t-end", "0.1"],
        "viscous" => &["--n", "200", "--t-end", "0.05", "--epsilons", "0.01"],
        "wave-branch" => &[
            "--n",
            "64",
            "--c-start",
            "0.025",
            "--c-stop",
            "0.0255",
            "--steps",
            "3",
            "--find-endpoints",
            "false",
            "--profile-speeds",
            "0.0252",
        ],
        "wave-evolve" => &["--n", "64", "--t-end", "1", "--output-dt", "0.5", "--perturb", "asym"],
        "perturb" => &["--n", "64", "--t-end", "1", "--output-dt", "0.5"],
        "threshold-scan" => &["--n", "100", "--amplitudes", "0.02", "--t-max", "1", "--scan-dt", "0.5"],
        "entropy-check" => &["--n", "200", "--t-end", "0.3"],
        "l1-check" => &["--n", "200", "--t-end", "0.1"],
        "phase-scan" => &["--ny", "3", "--nz", "2", "--betas", "0.5"],
        other => panic!("no reduced settings for `{other}`"),
    }
}

#[test]
fn every_parameter_is_read_and_recorded() {
    let tmp = TempDir::new().unwrap();
    for scenario in SCENARIOS {
        let dir = tmp.path().join(scenario.name);
        let mut args = vec!["fwlab", scenario.name, "--out", dir.to_str().unwrap()];
        args.extend_from_slice(small_args(scenario.name));
        let matches = command().try_get_matches_from(&args).unwrap();
        let prepared = prepare(&matches).unwrap();
        let manifest = execute(&prepared).unwrap_or_else(|e| panic!("{}: {e}", scenario.name));

        let declared: BTreeSet<&str> = scenario.params.iter().map(|p| p.key).collect();
        let read = prepared.params.read_keys();
        let unused: Vec<_> = declared.difference(&read).collect();
        assert!(unused.is_empty(), "{}: declared but never read: {unused:?}", scenario.name);

        let text = std::fs::read_to_string(dir.join("manifest.toml")).unwrap();
        let table: toml::Table = text.parse().unwrap();
        let recorded: BTreeSet<&str> = table["params"].as_table().unwrap().keys().map(String::as_str).collect();
        assert_eq!(recorded, declared, "{}", scenario.name);
        for section in ["diagnostics", "shocks", "checks"] {
            assert!(table[section].is_table(), "{}: {section}", scenario.name);
        }
        assert!(!manifest.files.is_empty(), "{}", scenario.name);
        for file in &manifest.files {
            assert!(dir.join(file).is_file(), "{}: {file}", scenario.name);
        }
    }
}

#[test]
fn manifest_keys_are_sorted_within_sections() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().join("m");
    let mut args = vec!["fwlab", "simulate", "--out", dir.to_str().unwrap()];
    args.extend_from_slice(small_args("simulate"));
    execute(&prepare(&command().try_get_matches_from(&args).unwrap()).unwrap()).unwrap();
    let text = std::fs::read_to_string(dir.join("manifest.toml")).unwrap();
    let mut section_keys: Vec<Vec<String>> = vec![Vec::new()];
    for line in text.lines() {
        if line.starts_with('[') {
            section_keys.push(Vec::new());
        } else if let Some((key, _)) = line.split_once(" = ") {
            section_keys.last_mut().unwrap().push(key.trim_matches('"').to_string());
        }
    }
    for keys in section_keys {
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }
}
