//! Run manifests: `key = value` lines sorted by key. Keys naming command-line
//! flags are replayable; `command` names the subcommand and keys containing a
//! dot (`result.*`) or listed in [`META_KEYS`] are informational.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Duration;

use clap::Parser;

use crate::{Cli, CliError, CliResult};

const META_KEYS: [&str; 4] = ["command", "tool_version", "wall_time", "out"];

#[derive(Debug, Default)]
pub struct Manifest(BTreeMap<String, String>);

impl Manifest {
    pub fn new(command: &str) -> Self {
        let mut m = Manifest::default();
        m.set("command", command);
        m.set("tool_version", env!("CARGO_PKG_VERSION"));
        m
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.0.insert(key.to_string(), value.to_string());
    }

    /// Exact round-trip representation of a real.
    pub fn set_real(&mut self, key: &str, value: f64) {
        self.set(key, format!("{value:?}"));
    }

    pub fn set_wall_time(&mut self, elapsed: Duration) {
        self.set("wall_time", format!("{:.3}", elapsed.as_secs_f64()));
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut text = Vec::new();
        for (k, v) in &self.0 {
            writeln!(text, "{k} = {v}").expect("writing to memory");
        }
        fs::write(path, text).map_err(CliError::io(path))
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
        let mut m = Manifest::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line.split_once(" = ").ok_or_else(|| {
                CliError::Invalid(format!(
                    "{}:{}: expected `key = value`",
                    path.display(),
                    i + 1
                ))
            })?;
            m.0.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(m)
    }
}

/// Rebuilds the command line recorded in a manifest, writing to `out`.
pub fn replay_command(path: &Path, out: &Path) -> CliResult<Cli> {
    let m = Manifest::read(path)?;
    let command =
        m.0.get("command")
            .ok_or_else(|| CliError::Invalid(format!("{}: no command recorded", path.display())))?;
    let mut argv = vec!["ibp".to_string(), command.clone()];
    for (k, v) in &m.0 {
        if META_KEYS.contains(&k.as_str()) || k.contains('.') {
            continue;
        }
        argv.push(format!("--{}={v}", k.replace('_', "-")));
    }
    argv.push(format!("--out={}", out.display()));
    Cli::try_parse_from(&argv)
        .map_err(|e| CliError::Invalid(format!("manifest does not replay: {e}")))
}
