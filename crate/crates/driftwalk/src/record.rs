//! Run records on stdout and tabular rows on disk.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), which
//! round-trips every `f64`. Non-finite values become the strings `"inf"`,
//! `"-inf"` and `"nan"`.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A float as a JSON value.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(format!("{x:.16e}").parse::<Number>().expect("formatted float is valid JSON"))
    } else {
        Value::String(float_text(x))
    }
}

/// A float as text, for CSV cells.
pub fn float_text(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// Reads a float written by [`num`].
pub fn read_float(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => match s.as_str() {
            "inf" => Some(f64::INFINITY),
            "-inf" => Some(f64::NEG_INFINITY),
            "nan" => Some(f64::NAN),
            _ => None,
        },
        _ => None,
    }
}

/// Serializes flag values and rewrites every non-integer number in the
/// 17-digit form.
pub fn params_of<T: Serialize>(args: &T) -> Map<String, Value> {
    match canonical(serde_json::to_value(args).expect("flag structs serialize")) {
        Value::Object(map) => map,
        _ => unreachable!("flag structs serialize to objects"),
    }
}

fn canonical(v: Value) -> Value {
    match v {
        Value::Number(n) if n.as_u64().is_none() && n.as_i64().is_none() => num(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(items) => Value::Array(items.into_iter().map(canonical).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, canonical(v))).collect()),
        other => other,
    }
}

/// Header plus rows, written as CSV by `--out`.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let context = || format!("writing {}", path.display());
        let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(context(), e.into()))?;
        w.write_record(&self.columns).map_err(|e| CliError::io(context(), e.into()))?;
        for row in &self.rows {
            w.write_record(row).map_err(|e| CliError::io(context(), e.into()))?;
        }
        w.flush().map_err(|e| CliError::io(context(), e))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub command: String,
    pub params: Map<String, Value>,
    pub result: Value,
    pub seed: u64,
    pub version: &'static str,
    pub wall_time: f64,
}

impl RunRecord {
    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        map.insert("command".into(), Value::String(self.command.clone()));
        map.insert("params".into(), Value::Object(self.params.clone()));
        map.insert("result".into(), self.result.clone());
        map.insert("seed".into(), Value::from(self.seed));
        map.insert("version".into(), Value::String(self.version.into()));
        map.insert("wall_time".into(), num(self.wall_time));
        Value::Object(map)
    }

    pub fn write_to(&self, out: &mut dyn Write) -> Result<(), CliError> {
        let context = "writing the run record";
        serde_json::to_writer_pretty(&mut *out, &self.to_json()).map_err(|e| CliError::io(context, e.into()))?;
        writeln!(out).map_err(|e| CliError::io(context, e))
    }
}

/// Flags reproducing a set of parameters: `true` becomes a bare switch,
/// arrays are comma-joined, `false` and `null` are dropped. Values are
/// attached as `--flag=value` so negative numbers in exponent form are not
/// read as flags.
pub fn flags_from(params: &Map<String, Value>) -> Result<Vec<String>, CliError> {
    let mut argv = Vec::new();
    for (key, value) in params {
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            Value::Bool(true) => argv.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Number(n) => argv.push(format!("{flag}={n}")),
            Value::String(s) => argv.push(format!("{flag}={s}")),
            Value::Array(items) => {
                let parts: Result<Vec<String>, CliError> = items
                    .iter()
                    .map(|item| match item {
                        Value::Number(n) => Ok(n.to_string()),
                        Value::String(s) => Ok(s.clone()),
                        _ => Err(CliError::Usage(format!("unsupported list entry for {key}"))),
                    })
                    .collect();
                argv.push(format!("{flag}={}", parts?.join(",")));
            }
            Value::Object(_) => return Err(CliError::Usage(format!("nested object for {key} has no flag form"))),
        }
    }
    Ok(argv)
}

/// Argument vector (without the program name) that replays a record.
pub fn to_argv(record: &Value) -> Result<Vec<String>, CliError> {
    let command = record
        .get("command")
        .and_then(Value::as_str)
        .ok_or_else(|| CliError::Usage("record has no command".into()))?;
    let params = record
        .get("params")
        .and_then(Value::as_object)
        .ok_or_else(|| CliError::Usage("record has no params".into()))?;
    let mut argv = vec![command.to_string()];
    argv.extend(flags_from(params)?);
    Ok(argv)
}
