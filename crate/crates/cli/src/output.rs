//! Artifact writers. Every file carries the command and resolved settings;
//! nothing time- or host-dependent goes in, so reruns are byte-identical.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use masonry_core::{Error, Result};

use crate::{Command, Optimised, RunConfig, TwoRobot};

/// Canonical command line, without output or parallelism flags.
pub fn describe(command: &Command) -> String {
    match command {
        Command::Calibrate { grid: None } => "calibrate".into(),
        Command::Calibrate { grid: Some(n) } => format!("calibrate --grid {n}"),
        Command::Simulate { method } => format!(
            "simulate --method {}",
            match method {
                TwoRobot::Sequential => "sequential",
                TwoRobot::Cantilever => "cantilever",
            }
        ),
        Command::Optimize { method } => format!(
            "optimize --method {}",
            match method {
                Optimised::Modified => "modified",
                Optimised::Full3 => "full3",
            }
        ),
        Command::Compare => "compare".into(),
        Command::Budget => "budget".into(),
    }
}

/// Plain-text provenance block: the command, then the settings as TOML.
pub fn provenance(run: &RunConfig) -> String {
    format!("command = \"{}\"\n{}", describe(&run.command), run.settings.to_toml())
}

fn provenance_json(run: &RunConfig) -> Value {
    json!({ "command": describe(&run.command), "settings": run.settings })
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

/// Pretty JSON object with a `provenance` member merged into the body.
pub fn write_json<T: Serialize>(run: &RunConfig, name: &str, body: &T) -> Result<()> {
    let mut obj = serde_json::Map::new();
    obj.insert("provenance".into(), provenance_json(run));
    match serde_json::to_value(body)? {
        Value::Object(m) => obj.extend(m),
        other => {
            obj.insert("data".into(), other);
        }
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(obj))?;
    text.push('\n');
    let path = run.out.join(name);
    write_file(&path, text.as_bytes())?;
    run.log(1, format!("wrote {}", path.display()));
    Ok(())
}

/// `# ` provenance lines followed by a header row and records.
pub fn write_csv(run: &RunConfig, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut buf = Vec::new();
    for line in provenance(run).lines() {
        buf.extend_from_slice(format!("# {line}").trim_end().as_bytes());
        buf.push(b'\n');
    }
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))?;
    }
    let path = run.out.join(name);
    write_file(&path, &buf)?;
    run.log(1, format!("wrote {}", path.display()));
    Ok(())
}

/// Fixed-precision number, empty for missing values.
pub fn num(v: Option<f64>, digits: usize) -> String {
    v.map(|x| format!("{x:.digits$}")).unwrap_or_default()
}
