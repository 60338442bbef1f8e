//! Experiment files: TOML with an optional `scenario` key and a `[params]`
//! table.
//!
//! ```toml
//! scenario = "simulate"
//!
//! [params]
//! data = "data2"
//! t_end = 3.0
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub scenario: Option<String>,
    pub params: BTreeMap<String, toml::Value>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Usage(message) => CliError::Config {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    /// Parse errors come back as [`CliError::Usage`] with the line number.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            let msg = e.message().to_string();
            CliError::Usage(match line {
                Some(l) => format!("parse error at line {l}: {msg}"),
                None => format!("parse error: {msg}"),
            })
        })?;
        let mut out = ConfigFile::default();
        for (key, value) in table {
            match (key.as_str(), value) {
                ("scenario", toml::Value::String(s)) => out.scenario = Some(s),
                ("scenario", other) => {
                    return Err(CliError::param(
                        "scenario",
                        format!("type mismatch: expected a string, got {}", other.type_str()),
                    ))
                }
                ("params", toml::Value::Table(t)) => out.params = t.into_iter().collect(),
                ("params", other) => {
                    return Err(CliError::param(
                        "params",
                        format!("type mismatch: expected a table, got {}", other.type_str()),
                    ))
                }
                _ => return Err(CliError::UnknownKey(key)),
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_all_defaults() {
        assert_eq!(ConfigFile::parse("").unwrap(), ConfigFile::default());
    }

    #[test]
    fn reads_scenario_and_params() {
        let c = ConfigFile::parse("scenario = \"viscous\"\n[params]\nn = 500\n").unwrap();
        assert_eq!(c.scenario.as_deref(), Some("viscous"));
        assert_eq!(c.params["n"], toml::Value::Integer(500));
    }

    #[test]
    fn parse_error_names_the_line() {
        let err = ConfigFile::parse("[params]\nn = 500\nt_end = = 1\n").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn unknown_top_level_key() {
        let err = ConfigFile::parse("dat1 = true\n").unwrap_err();
        assert!(err.to_string().contains("`dat1`"), "{err}");
    }
}
