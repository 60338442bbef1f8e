//! `fwlab` command-line runner.
//!
//! Every scenario declares a parameter table. Values resolve in the order
//! defaults, then `--config` file, then command-line flags, and the resolved
//! set is echoed into `manifest.toml` next to the CSV outputs.

pub mod config;
pub mod error;
pub mod manifest;
pub mod params;
pub mod scenarios;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{value_parser, Arg, ArgMatches, Command};

use crate::config::ConfigFile;
use crate::error::{CliError, EXIT_CHECK_FAILED, EXIT_PASS, EXIT_USAGE};
use crate::manifest::Manifest;
use crate::params::Params;
use crate::scenarios::{Output, Scenario, SCENARIOS};

pub const MANIFEST_FILE: &str = "manifest.toml";

pub fn command() -> Command {
    let mut cmd = Command::new("fwlab")
        .about("Experiments for a nonlocal Burgers-type balance law on the unit torus")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(
            Arg::new("config")
                .long("config")
                .global(true)
                .value_name("FILE")
                .value_parser(value_parser!(PathBuf))
                .help("TOML file with a [params] table; flags override it"),
        )
        .arg(
            Arg::new("out")
                .long("out")
                .global(true)
                .value_name("DIR")
                .default_value("fwlab-out")
                .value_parser(value_parser!(PathBuf))
                .help("output directory"),
        )
        .arg(
            Arg::new("jobs")
                .long("jobs")
                .global(true)
                .value_name("N")
                .value_parser(value_parser!(u64).range(1..))
                .help("worker threads for independent runs [default: all cores]"),
        );
    for s in SCENARIOS {
        cmd = cmd.subcommand(scenario_command(s));
    }
    cmd
}

fn scenario_command(s: &Scenario) -> Command {
    let mut sub = Command::new(s.name).about(s.about);
    for spec in s.params {
        sub = sub.arg(
            Arg::new(spec.key)
                .long(spec.flag())
                .value_name("VALUE")
                .allow_hyphen_values(true)
                .help(format!("{} [default: {}]", spec.help, spec.default)),
        );
    }
    sub
}

/// Resolved scenario ready to run.
pub struct Prepared {
    pub scenario: &'static Scenario,
    pub params: Params,
    pub out_dir: PathBuf,
    pub jobs: Option<usize>,
}

pub fn prepare(matches: &ArgMatches) -> Result<Prepared, CliError> {
    let (name, sub) = matches
        .subcommand()
        .ok_or_else(|| CliError::Usage("no scenario given".into()))?;
    let scenario = scenarios::find(name).ok_or_else(|| CliError::Usage(format!("unknown scenario `{name}`")))?;
    let file = match sub.get_one::<PathBuf>("config") {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    if let Some(declared) = &file.scenario {
        if declared != name {
            return Err(CliError::Usage(format!(
                "config file is for scenario `{declared}`, not `{name}`"
            )));
        }
    }
    let mut flags = BTreeMap::new();
    for spec in scenario.params {
        if let Some(v) = sub.get_one::<String>(spec.key) {
            flags.insert(spec.key, v.clone());
        }
    }
    Ok(Prepared {
        scenario,
        params: Params::resolve(scenario.params, &file.params, &flags)?,
        out_dir: sub.get_one::<PathBuf>("out").cloned().unwrap_or_else(|| "fwlab-out".into()),
        jobs: sub.get_one::<u64>("jobs").map(|&n| n as usize),
    })
}

/// Runs the scenario and writes the manifest.
pub fn execute(prepared: &Prepared) -> Result<Manifest, CliError> {
    let dir = &prepared.out_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut output = Output {
        dir: dir.clone(),
        manifest: Manifest::new(prepared.scenario.name, &prepared.params),
    };
    let mut body = || (prepared.scenario.run)(&prepared.params, &mut output);
    match prepared.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {n} worker threads: {e}")))?
            .install(body)?,
        None => body()?,
    }
    write_manifest(dir, &output.manifest)?;
    Ok(output.manifest)
}

fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<(), CliError> {
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, manifest.to_toml_string()).map_err(|e| CliError::io(&path, e))
}

/// Parses `args`, runs, prints a summary and returns the exit code.
pub fn main_with<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    let outcome = prepare(&matches).and_then(|p| execute(&p).map(|m| (p, m)));
    match outcome {
        Ok((prepared, manifest)) => {
            for c in &manifest.checks {
                let tag = if c.pass { "PASS" } else { "FAIL" };
                println!("[{tag}] {}: {:e} {} {:e}", c.name, c.value, c.relation, c.limit);
            }
            println!(
                "{}: wrote {} files and {MANIFEST_FILE} to {}",
                prepared.scenario.name,
                manifest.files.len(),
                prepared.out_dir.display()
            );
            if manifest.all_pass() {
                EXIT_PASS
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
