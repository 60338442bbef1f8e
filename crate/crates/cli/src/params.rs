//! Scenario parameters: declaration, parsing and precedence resolution.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Mutex;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Float,
    /// A float or the word `auto`.
    FloatOrAuto,
    Int,
    Bool,
    /// One of a fixed set of words.
    Choice(&'static [&'static str]),
    FloatList,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Any,
    Positive,
    NonNegative,
    AtLeast(f64),
}

impl Bound {
    fn admits(self, v: f64) -> bool {
        v.is_finite()
            && match self {
                Bound::Any => true,
                Bound::Positive => v > 0.0,
                Bound::NonNegative => v >= 0.0,
                Bound::AtLeast(m) => v >= m,
            }
    }

    fn describe(self) -> String {
        match self {
            Bound::Any => "finite".into(),
            Bound::Positive => "positive".into(),
            Bound::NonNegative => "non-negative".into(),
            Bound::AtLeast(m) => format!("at least {m}"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    /// snake_case key; the flag is the kebab-case form.
    pub key: &'static str,
    pub kind: Kind,
    pub bound: Bound,
    pub default: &'static str,
    pub help: &'static str,
}

impl ParamSpec {
    pub const fn new(key: &'static str, kind: Kind, default: &'static str, help: &'static str) -> Self {
        Self {
            key,
            kind,
            bound: Bound::Any,
            default,
            help,
        }
    }

    pub const fn bounded(mut self, bound: Bound) -> Self {
        self.bound = bound;
        self
    }

    pub fn flag(&self) -> String {
        self.key.replace('_', "-")
    }

    fn check(&self, v: f64) -> Result<f64, CliError> {
        if self.bound.admits(v) {
            Ok(v)
        } else {
            Err(CliError::param(self.key, format!("must be {}, got {v}", self.bound.describe())))
        }
    }

    /// Parses a command-line or default string.
    pub fn parse_str(&self, raw: &str) -> Result<Value, CliError> {
        let raw = raw.trim();
        let float = |s: &str| -> Result<f64, CliError> {
            let v = s
                .trim()
                .parse::<f64>()
                .map_err(|_| CliError::param(self.key, format!("expected a number, got `{s}`")))?;
            self.check(v)
        };
        match self.kind {
            Kind::Float => float(raw).map(Value::Float),
            Kind::FloatOrAuto if raw == "auto" => Ok(Value::Auto),
            Kind::FloatOrAuto => float(raw).map(Value::Float),
            Kind::Int => {
                let v = raw
                    .parse::<i64>()
                    .map_err(|_| CliError::param(self.key, format!("expected an integer, got `{raw}`")))?;
                self.check(v as f64)?;
                Ok(Value::Int(v))
            }
            Kind::Bool => match raw {
                "true" => Ok(Value::Bool(true)),
                "false" => Ok(Value::Bool(false)),
                _ => Err(CliError::param(self.key, format!("expected true or false, got `{raw}`"))),
            },
            Kind::Choice(options) => {
                if options.contains(&raw) {
                    Ok(Value::Text(raw.to_string()))
                } else {
                    Err(CliError::param(
                        self.key,
                        format!("expected one of {}, got `{raw}`", options.join(", ")),
                    ))
                }
            }
            Kind::FloatList => {
                if raw.is_empty() {
                    return Err(CliError::param(self.key, "list is empty".into()));
                }
                raw.split(',').map(float).collect::<Result<_, _>>().map(Value::FloatList)
            }
        }
    }

    /// Parses a value read from a config file.
    pub fn parse_toml(&self, raw: &toml::Value) -> Result<Value, CliError> {
        let mismatch = || {
            CliError::param(
                self.key,
                format!("type mismatch: expected {}, got {}", self.kind_name(), raw.type_str()),
            )
        };
        let number = |v: &toml::Value| -> Result<f64, CliError> {
            match v {
                toml::Value::Float(f) => self.check(*f),
                toml::Value::Integer(i) => self.check(*i as f64),
                _ => Err(mismatch()),
            }
        };
        match (self.kind, raw) {
            (Kind::Float, v) => number(v).map(Value::Float),
            (Kind::FloatOrAuto, toml::Value::String(s)) if s == "auto" => Ok(Value::Auto),
            (Kind::FloatOrAuto, v) => number(v).map(Value::Float),
            (Kind::Int, toml::Value::Integer(i)) => {
                self.check(*i as f64)?;
                Ok(Value::Int(*i))
            }
            (Kind::Bool, toml::Value::Boolean(b)) => Ok(Value::Bool(*b)),
            (Kind::Choice(_), toml::Value::String(s)) => self.parse_str(s),
            (Kind::FloatList, toml::Value::Array(items)) if !items.is_empty() => {
                items.iter().map(number).collect::<Result<_, _>>().map(Value::FloatList)
            }
            _ => Err(mismatch()),
        }
    }

    fn kind_name(&self) -> &'static str {
        match self.kind {
            Kind::Float => "a number",
            Kind::FloatOrAuto => "a number or \"auto\"",
            Kind::Int => "an integer",
            Kind::Bool => "a boolean",
            Kind::Choice(_) => "a string",
            Kind::FloatList => "a non-empty array of numbers",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Auto,
    Int(i64),
    Bool(bool),
    Text(String),
    FloatList(Vec<f64>),
}

impl Value {
    pub fn to_toml(&self) -> toml::Value {
        match self {
            Value::Float(v) => toml::Value::Float(*v),
            Value::Auto => toml::Value::String("auto".into()),
            Value::Int(v) => toml::Value::Integer(*v),
            Value::Bool(v) => toml::Value::Boolean(*v),
            Value::Text(v) => toml::Value::String(v.clone()),
            Value::FloatList(v) => toml::Value::Array(v.iter().map(|x| toml::Value::Float(*x)).collect()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Float(v) => write!(f, "{v}"),
            Value::Auto => f.write_str("auto"),
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(v) => write!(f, "{v}"),
            Value::Text(v) => f.write_str(v),
            Value::FloatList(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

/// Where a resolved value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Default,
    File,
    Flag,
}

/// Resolved parameters of one scenario. Reading a key that was not
/// declared is a programming error and panics; reads are recorded so tests
/// can check that every declared key is consumed.
#[derive(Debug)]
pub struct Params {
    values: BTreeMap<&'static str, (Value, Source)>,
    read: Mutex<BTreeSet<&'static str>>,
}

impl Params {
    /// Layers defaults, then `file`, then `flags`.
    pub fn resolve(
        specs: &[ParamSpec],
        file: &BTreeMap<String, toml::Value>,
        flags: &BTreeMap<&'static str, String>,
    ) -> Result<Self, CliError> {
        for key in file.keys() {
            if !specs.iter().any(|s| s.key == key) {
                return Err(CliError::UnknownKey(key.clone()));
            }
        }
        let mut values = BTreeMap::new();
        for spec in specs {
            let resolved = if let Some(raw) = flags.get(spec.key) {
                (spec.parse_str(raw)?, Source::Flag)
            } else if let Some(raw) = file.get(spec.key) {
                (spec.parse_toml(raw)?, Source::File)
            } else {
                (spec.parse_str(spec.default)?, Source::Default)
            };
            values.insert(spec.key, resolved);
        }
        Ok(Self {
            values,
            read: Mutex::new(BTreeSet::new()),
        })
    }

    fn get(&self, key: &'static str) -> &Value {
        self.read.lock().expect("read log").insert(key);
        match self.values.get(key) {
            Some((v, _)) => v,
            None => panic!("parameter `{key}` is not declared for this scenario"),
        }
    }

    pub fn f64(&self, key: &'static str) -> f64 {
        match self.get(key) {
            Value::Float(v) => *v,
            Value::Int(v) => *v as f64,
            other => panic!("parameter `{key}` is not a number: {other:?}"),
        }
    }

    /// `None` for `auto`.
    pub fn auto_f64(&self, key: &'static str) -> Option<f64> {
        match self.get(key) {
            Value::Auto => None,
            Value::Float(v) => Some(*v),
            other => panic!("parameter `{key}` is not a number: {other:?}"),
        }
    }

    pub fn usize(&self, key: &'static str) -> usize {
        match self.get(key) {
            Value::Int(v) => usize::try_from(*v).unwrap_or_else(|_| panic!("parameter `{key}` is negative")),
            other => panic!("parameter `{key}` is not an integer: {other:?}"),
        }
    }

    pub fn bool(&self, key: &'static str) -> bool {
        match self.get(key) {
            Value::Bool(v) => *v,
            other => panic!("parameter `{key}` is not a boolean: {other:?}"),
        }
    }

    pub fn text(&self, key: &'static str) -> &str {
        match self.get(key) {
            Value::Text(v) => v,
            other => panic!("parameter `{key}` is not a string: {other:?}"),
        }
    }

    pub fn floats(&self, key: &'static str) -> &[f64] {
        match self.get(key) {
            Value::FloatList(v) => v,
            other => panic!("parameter `{key}` is not a list: {other:?}"),
        }
    }

    pub fn source(&self, key: &str) -> Option<Source> {
        self.values.get(key).map(|(_, s)| *s)
    }

    /// All resolved values in key order.
    pub fn iter(&self) -> impl Iterator<Item = (&'static str, &Value)> {
        self.values.iter().map(|(k, (v, _))| (*k, v))
    }

    pub fn read_keys(&self) -> BTreeSet<&'static str> {
        self.read.lock().expect("read log").clone()
    }
}
