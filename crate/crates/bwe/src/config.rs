//! Line-based `key = value` configuration with one section per subcommand.
//! Unknown keys are rejected outright; command-line flags override file
//! values; the `BWE_SEED` environment variable overrides the seed last.
//! The effective configuration is echoed to `run.lock` in each output
//! directory for provenance.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// `(section, key)` pairs accepted in config files. The empty section holds
/// keys that appear before any section header.
const ALLOWED: &[(&str, &str)] = &[
    ("", "seed"),
    ("", "workers"),
    ("degrade", "input_dir"),
    ("degrade", "output_dir"),
    ("degrade", "manifest"),
    ("degrade", "encoding"),
    ("extend", "input_dir"),
    ("extend", "output_dir"),
    ("extend", "manifest"),
    ("extend", "predictor"),
    ("extend", "references_dir"),
    ("extend", "exciter"),
    ("extend", "exciter_seed"),
    ("extend", "flat_level"),
    ("extend", "ltv_mode"),
    ("extend", "gain_ceiling_db"),
    ("extend", "encoding"),
    ("train-predictor", "manifest"),
    ("train-predictor", "input_dir"),
    ("train-predictor", "references_dir"),
    ("train-predictor", "out"),
    ("train-predictor", "context"),
    ("train-predictor", "ridge"),
    ("train-predictor", "sweep"),
    ("evaluate", "manifest"),
    ("evaluate", "estimates_dir"),
    ("evaluate", "references_dir"),
    ("evaluate", "report"),
    ("evaluate", "csv"),
    ("features", "input"),
    ("features", "out"),
    ("features", "csv"),
    ("features", "spectrogram"),
];

#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    values: BTreeMap<(String, String), String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.trim().to_string();
                if !ALLOWED.iter().any(|(s, _)| *s == section) {
                    bail!("line {}: unknown section [{section}]", lineno + 1);
                }
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected `key = value`, got `{line}`", lineno + 1);
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !ALLOWED.iter().any(|(s, k)| *s == section && *k == key) {
                bail!("line {}: unknown key `{key}` in section [{section}]", lineno + 1);
            }
            if values.insert((section.clone(), key.clone()), value).is_some() {
                bail!("line {}: duplicate key `{key}` in section [{section}]", lineno + 1);
            }
        }
        Ok(ConfigFile { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.values.get(&(section.to_string(), key.to_string())).map(String::as_str)
    }

    pub fn get_parsed<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(section, key) {
            None => Ok(None),
            Some(raw) => match raw.parse::<T>() {
                Ok(v) => Ok(Some(v)),
                Err(e) => bail!("config key [{section}] {key} = `{raw}`: {e}"),
            },
        }
    }
}

/// Effective-configuration echo written next to each command's outputs.
#[derive(Debug, Default)]
pub struct RunLock {
    entries: Vec<(String, String)>,
}

impl RunLock {
    pub fn new(command: &str) -> Self {
        let mut lock = RunLock::default();
        lock.set("command", command);
        lock
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        let path = dir.join("run.lock");
        std::fs::write(&path, self.render())
            .with_context(|| format!("writing {}", path.display()))
    }
}

/// Seed resolution order: BWE_SEED env var, then CLI flag, then config
/// file, then the default.
pub fn resolve_seed(cli: Option<u64>, file: Option<u64>, default: u64) -> Result<u64> {
    if let Ok(raw) = std::env::var("BWE_SEED") {
        return raw
            .parse::<u64>()
            .with_context(|| format!("BWE_SEED must be an unsigned integer, got `{raw}`"));
    }
    Ok(cli.or(file).unwrap_or(default))
}
