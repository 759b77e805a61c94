use std::collections::BTreeMap;
use std::path::Path;

use clap::parser::ValueSource;
use clap::ArgMatches;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub params: BTreeMap<String, Value>,
    pub seed: u64,
    pub outputs: Value,
    pub wall_time: f64,
}

/// Rounds to 9 significant digits; the shortest representation of the
/// result then prints with at most 9 digits.
pub fn round9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

pub fn fmt9(x: f64) -> String {
    format!("{}", round9(x))
}

/// Applies `round9` to every non-integer number in a JSON tree.
pub fn canonical(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round9(n.as_f64().unwrap_or(f64::NAN));
            serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(canonical).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, canonical(v))).collect()),
        other => other,
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

#[derive(Debug, Default)]
pub struct Config {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    table: toml::Table,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Invalid(format!("cannot read config {}: {e}", path.display())))?;
        let mut table: toml::Table =
            toml::from_str(&text).map_err(|e| CliError::Invalid(format!("config {}: {e}", path.display())))?;
        let int = |v: toml::Value, key: &str| -> Result<u64, CliError> {
            v.as_integer()
                .and_then(|i| u64::try_from(i).ok())
                .ok_or_else(|| CliError::Invalid(format!("config key `{key}` must be a non-negative integer")))
        };
        let seed = table.remove("seed").map(|v| int(v, "seed")).transpose()?;
        let threads = table.remove("threads").map(|v| int(v, "threads").map(|t| t as usize)).transpose()?;
        Ok(Config { seed, threads, table })
    }

    /// Table for a command path such as `bounds opt-type2`.
    fn section(&self, command: &str) -> Option<&toml::Table> {
        let mut t = &self.table;
        for part in command.split(' ') {
            t = t.get(part)?.as_table()?;
        }
        Some(t)
    }

    /// Fills every argument not given on the command line from the config.
    pub fn merge(&self, command: &str, params: &mut Value, matches: &ArgMatches) -> Result<(), CliError> {
        let Some(section) = self.section(command) else { return Ok(()) };
        let Value::Object(obj) = params else { return Ok(()) };
        for (key, value) in section {
            if value.is_table() {
                continue;
            }
            if !obj.contains_key(key) {
                return Err(CliError::Invalid(format!("unknown key `{key}` in config section [{command}]")));
            }
            if matches.value_source(key) != Some(ValueSource::CommandLine) {
                let v = serde_json::to_value(value).map_err(|e| CliError::Invalid(e.to_string()))?;
                obj.insert(key.clone(), v);
            }
        }
        Ok(())
    }
}

/// Matches of the innermost subcommand.
pub fn leaf_matches(m: &ArgMatches) -> &ArgMatches {
    match m.subcommand() {
        Some((_, sub)) => leaf_matches(sub),
        None => m,
    }
}
