//! CSV and JSON emitters.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use bf_core::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

pub const SCHEMA: &str = "bf-output/1";

/// Fixed-width scientific notation with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

/// Finite numbers pass through; anything else becomes `null`.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

pub fn cnum(z: Complex64) -> Value {
    json!({ "re": num(z.re), "im": num(z.im) })
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Envelope {
    pub schema: &'static str,
    pub command: String,
    pub status: &'static str,
    pub error: Option<ErrorInfo>,
    pub data: Value,
}

impl Envelope {
    pub fn ok(command: &str, data: Value) -> Self {
        Envelope {
            schema: SCHEMA,
            command: command.into(),
            status: "ok",
            error: None,
            data,
        }
    }

    pub fn failed(command: &str, status: &'static str, error: ErrorInfo, data: Value) -> Self {
        Envelope {
            schema: SCHEMA,
            command: command.into(),
            status,
            error: Some(error),
            data,
        }
    }
}

/// Rows of string cells with a header.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, w: W) -> io::Result<()> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        out.write_record(&self.header)?;
        for row in &self.rows {
            out.write_record(row)?;
        }
        out.flush()
    }
}

/// Opens `path` for writing, or stdout when absent.
pub fn sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Fails early when the parent directory of `path` is missing.
pub fn check_writable(path: Option<&Path>) -> io::Result<()> {
    let Some(p) = path else { return Ok(()) };
    match p.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(io::Error::new(
            io::ErrorKind::NotFound,
            format!("output directory {} does not exist", dir.display()),
        )),
        _ => Ok(()),
    }
}

pub fn write_json<W: Write>(mut w: W, env: &Envelope) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut w, env)?;
    w.write_all(b"\n")?;
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(f64::NAN), "");
        assert_eq!(num(f64::INFINITY), Value::Null);
    }

    #[test]
    fn csv_uses_newlines() {
        let mut t = Table::new(vec!["a", "b"]);
        t.push(vec!["1".into(), "x,y".into()]);
        let mut buf = vec![];
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n1,\"x,y\"\n");
    }
}
