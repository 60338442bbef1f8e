//! Run manifest: a TOML document with sections `[params]`, `[diagnostics]`,
//! `[shocks]` and `[checks]`. Keys are written in sorted order.

use fwlab_core::diagnostics::ShockTracks;
use toml::{Table, Value};

use crate::params::Params;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub limit: f64,
    /// How `value` is compared with `limit`, e.g. `<=`.
    pub relation: &'static str,
}

impl Check {
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            pass: value <= limit,
            value,
            limit,
            relation: "<=",
        }
    }

    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            pass: value >= limit,
            value,
            limit,
            relation: ">=",
        }
    }

    pub fn greater(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            pass: value > limit,
            value,
            limit,
            relation: ">",
        }
    }

    /// A yes/no check; `value` is 1 for yes.
    pub fn holds(name: &str, pass: bool) -> Self {
        Self {
            name: name.into(),
            pass,
            value: if pass { 1.0 } else { 0.0 },
            limit: 1.0,
            relation: "==",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Manifest {
    pub scenario: String,
    pub params: Table,
    pub diagnostics: Table,
    pub shocks: Table,
    pub checks: Vec<Check>,
    pub files: Vec<String>,
}

impl Manifest {
    pub fn new(scenario: &str, params: &Params) -> Self {
        Self {
            scenario: scenario.into(),
            params: params.iter().map(|(k, v)| (k.to_string(), v.to_toml())).collect(),
            ..Self::default()
        }
    }

    pub fn diag(&mut self, key: &str, value: impl Into<Value>) {
        self.diagnostics.insert(key.into(), value.into());
    }

    pub fn series(&mut self, key: &str, values: impl IntoIterator<Item = f64>) {
        let arr = values.into_iter().map(Value::Float).collect();
        self.diagnostics.insert(key.into(), Value::Array(arr));
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Stores tracks under `[shocks]`; `prefix` separates several runs.
    pub fn record_shocks(&mut self, prefix: Option<&str>, tracks: &ShockTracks) {
        let mut t = Table::new();
        t.insert("threshold".into(), tracks.threshold.into());
        t.insert("window".into(), (tracks.window as i64).into());
        t.insert("tracks".into(), (tracks.tracks.len() as i64).into());
        t.insert("merges".into(), (tracks.merges() as i64).into());
        t.insert("max_open".into(), (tracks.max_open() as i64).into());
        let mut records = Vec::new();
        for (id, track) in tracks.tracks.iter().enumerate() {
            for r in &track.records {
                let mut row = Table::new();
                row.insert("track".into(), (id as i64).into());
                row.insert("t".into(), r.t.into());
                row.insert("position".into(), r.position.into());
                row.insert("u_minus".into(), r.u_minus.into());
                row.insert("u_plus".into(), r.u_plus.into());
                row.insert("jump".into(), r.jump.into());
                row.insert("offset".into(), (r.offset as i64).into());
                if let Some(s) = r.speed_fit {
                    row.insert("speed_fit".into(), s.into());
                }
                records.push(Value::Table(row));
            }
        }
        let ends: Vec<Value> = tracks
            .tracks
            .iter()
            .enumerate()
            .filter_map(|(id, track)| {
                let (t, end) = track.closed?;
                let mut row = Table::new();
                row.insert("track".into(), (id as i64).into());
                row.insert("t".into(), t.into());
                row.insert("end".into(), format!("{end:?}").to_lowercase().into());
                Some(Value::Table(row))
            })
            .collect();
        t.insert("records".into(), Value::Array(records));
        t.insert("closed".into(), Value::Array(ends));
        match prefix {
            Some(p) => {
                self.shocks.insert(p.into(), Value::Table(t));
            }
            None => self.shocks.extend(t),
        }
    }

    pub fn to_toml_string(&self) -> String {
        let mut root = Table::new();
        root.insert("scenario".into(), self.scenario.clone().into());
        root.insert(
            "files".into(),
            Value::Array(self.files.iter().cloned().map(Value::String).collect()),
        );
        root.insert("params".into(), Value::Table(self.params.clone()));
        root.insert("diagnostics".into(), Value::Table(self.diagnostics.clone()));
        root.insert("shocks".into(), Value::Table(self.shocks.clone()));
        let mut checks = Table::new();
        checks.insert("all_pass".into(), self.all_pass().into());
        for c in &self.checks {
            let mut row = Table::new();
            row.insert("pass".into(), c.pass.into());
            row.insert("value".into(), c.value.into());
            row.insert("limit".into(), c.limit.into());
            row.insert("relation".into(), c.relation.into());
            checks.insert(c.name.clone(), Value::Table(row));
        }
        root.insert("checks".into(), Value::Table(checks));
        toml::to_string(&root).expect("manifest tables serialize")
    }
}
