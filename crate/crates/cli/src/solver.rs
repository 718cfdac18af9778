//! External solver handoff through a shell command template.

use std::path::Path;
use std::process::Command;

use anyhow::{bail, Context, Result};

pub struct Handoff<'a> {
    pub model: &'a Path,
    /// `None` substitutes an empty string.
    pub warmstart: Option<&'a Path>,
    pub solution: &'a Path,
    pub gap: f64,
    /// Seconds; 0 means no limit.
    pub time_limit: f64,
    pub options: &'a str,
}

/// Single-quotes `s` for `sh`.
fn quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', r"'\''"))
}

pub fn render(template: &str, h: &Handoff<'_>) -> String {
    let path = |p: &Path| quote(&p.display().to_string());
    template
        .replace("{model}", &path(h.model))
        .replace("{warmstart}", &h.warmstart.map_or_else(|| quote(""), path))
        .replace("{solution}", &path(h.solution))
        .replace("{gap}", &h.gap.to_string())
        .replace("{timelimit}", &h.time_limit.to_string())
        .replace("{options}", &quote(h.options))
}

/// Runs the rendered command under `sh -c`. Errors carry the command line.
pub fn run(command: &str) -> Result<()> {
    let status = Command::new("sh")
        .arg("-c")
        .arg(command)
        .status()
        .with_context(|| format!("cannot start solver command: {command}"))?;
    match status.code() {
        Some(0) => Ok(()),
        Some(127) => bail!("solver binary not found (exit 127): {command}"),
        Some(code) => bail!("solver exited with status {code}: {command}"),
        None => bail!("solver killed by a signal: {command}"),
    }
}
