//! Deterministic report emission.
//!
//! CSV floats use `{:.16e}` (17 significant digits), columns have a fixed
//! order and lines end in LF. JSON floats use the shortest round-trip form;
//! non-finite values are written as the strings `"inf"`, `"-inf"`, `"NaN"`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::checks::CheckReport;
use crate::error::CliError;

pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// JSON value for a float, keeping non-finite values representable.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else {
        Value::from(fmt_f64(x))
    }
}

/// Serde adapter for floats that may be infinite or NaN.
pub mod extended_f64 {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_str(&super::fmt_f64(*x))
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "NaN" => Ok(f64::NAN),
                other => Err(de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}

/// A row of a CSV table.
pub trait TableRow {
    const HEADER: &'static [&'static str];
    fn cells(&self) -> Vec<String>;
}

pub fn render_csv<R: TableRow>(rows: &[R]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(R::HEADER)?;
    for r in rows {
        let cells = r.cells();
        debug_assert_eq!(cells.len(), R::HEADER.len());
        w.write_record(&cells)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Csv(csv::Error::from(e.into_error())))
}

pub fn render_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut out = serde_json::to_vec_pretty(value).map_err(CliError::Json)?;
    out.push(b'\n');
    Ok(out)
}

/// Files written for one command.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Written {
    pub data: PathBuf,
    pub checks: PathBuf,
}

/// Writes `<stem>.<ext>` and `<stem>.checks.json` under `dir`.
pub fn write_outputs(
    dir: &Path,
    stem: &str,
    extension: &str,
    data: &[u8],
    checks: &CheckReport,
) -> Result<Written, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let data_path = dir.join(format!("{stem}.{extension}"));
    let checks_path = dir.join(format!("{stem}.checks.json"));
    fs::write(&data_path, data).map_err(|e| CliError::io(&data_path, e))?;
    fs::write(&checks_path, render_json(checks)?).map_err(|e| CliError::io(&checks_path, e))?;
    Ok(Written {
        data: data_path,
        checks: checks_path,
    })
}
