//! CSV traces and JSON summaries. Floats are written with 17 significant
//! digits so that they parse back to the same value.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use crate::trace::{ChainTrace, TraceRecord};

pub const TRACE_HEADER: &str = "iter,N,U,H,pressure,jump_attempts,jump_accepts,elapsed_s";

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> OutputError + '_ {
    move |source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn trace_to_csv(trace: &ChainTrace) -> String {
    let mut out = String::with_capacity(64 * (trace.records.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in &trace.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.iter,
            r.count,
            fmt_f64(r.energy),
            opt(r.hamiltonian),
            opt(r.pressure),
            r.jump_attempts,
            r.jump_accepts,
            opt(r.elapsed_s)
        );
    }
    out
}

pub fn trace_from_csv(text: &str) -> Result<ChainTrace, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == TRACE_HEADER => {}
        other => return Err(format!("unexpected header {other:?}")),
    }
    let mut trace = ChainTrace::default();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 2;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(format!("line {lineno}: expected 8 fields, got {}", f.len()));
        }
        let bad = |col: &str| format!("line {lineno}: bad `{col}` value");
        let opt_f = |s: &str, col: &str| -> Result<Option<f64>, String> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad(col))
            }
        };
        trace.records.push(TraceRecord {
            iter: f[0].parse().map_err(|_| bad("iter"))?,
            count: f[1].parse().map_err(|_| bad("N"))?,
            energy: f[2].parse().map_err(|_| bad("U"))?,
            hamiltonian: opt_f(f[3], "H")?,
            pressure: opt_f(f[4], "pressure")?,
            jump_attempts: f[5].parse().map_err(|_| bad("jump_attempts"))?,
            jump_accepts: f[6].parse().map_err(|_| bad("jump_accepts"))?,
            elapsed_s: opt_f(f[7], "elapsed_s")?,
        });
    }
    Ok(trace)
}

/// JSON formatter printing every float as `d.dddddddddddddddde±x`.
struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> serde_json::Result<T> {
    serde_json::from_str(text)
}

pub fn emit_trace(trace: &ChainTrace, path: &Path) -> Result<(), OutputError> {
    std::fs::write(path, trace_to_csv(trace)).map_err(io_err(path))
}

pub fn read_trace(path: &Path) -> Result<ChainTrace, OutputError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    trace_from_csv(&text).map_err(|message| OutputError::Format {
        path: path.to_path_buf(),
        message,
    })
}

pub fn emit_summary<T: Serialize>(summary: &T, path: &Path) -> Result<(), OutputError> {
    let text = to_json(summary).map_err(|e| OutputError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    std::fs::write(path, text).map_err(io_err(path))
}
