//! Per-invocation state: global flags, the optional TOML config file, path
//! resolution and output plumbing.
//!
//! Every subcommand has a settings struct that doubles as its clap argument
//! set and as its TOML section. Values given on the command line win over
//! the file; the merged result is what ends up in the output header.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

pub const DATA_DIR_ENV: &str = "AVQA_DATA_DIR";

pub struct Ctx {
    pub command: &'static str,
    pub seed: u64,
    pub csv: bool,
    pub output: Option<PathBuf>,
    data_dir: Option<PathBuf>,
    config: toml::Table,
}

impl Ctx {
    pub fn new(
        command: &'static str,
        config_path: Option<&Path>,
        seed: Option<u64>,
        csv: bool,
        output: Option<PathBuf>,
    ) -> CliResult<Self> {
        let data_dir = std::env::var_os(DATA_DIR_ENV).map(PathBuf::from);
        let config = match config_path {
            None => toml::Table::new(),
            Some(p) => {
                let p = resolve_with(data_dir.as_deref(), p);
                let text = std::fs::read_to_string(&p)
                    .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
                text.parse::<toml::Table>()
                    .map_err(|e| CliError::invalid(format!("{}: {e}", p.display())))?
            }
        };
        let config_seed = match config.get("seed") {
            None => None,
            Some(v) => Some(
                v.as_integer()
                    .and_then(|i| u64::try_from(i).ok())
                    .ok_or_else(|| {
                        CliError::invalid("config: seed must be a non-negative integer")
                    })?,
            ),
        };
        Ok(Self {
            command,
            seed: seed.or(config_seed).unwrap_or(0),
            csv,
            output,
            data_dir,
            config,
        })
    }

    /// Top-level `jobs` from the config file, if any.
    pub fn config_jobs(&self) -> CliResult<Option<usize>> {
        match self.config.get("jobs") {
            None => Ok(None),
            Some(v) => v
                .as_integer()
                .and_then(|i| usize::try_from(i).ok())
                .filter(|&j| j > 0)
                .map(Some)
                .ok_or_else(|| CliError::invalid("config: jobs must be a positive integer")),
        }
    }

    /// Raw access to a config table outside the per-command sections.
    pub fn config_table(&self, key: &str) -> Option<&toml::Value> {
        self.config.get(key)
    }

    /// Merges command-line settings over the config section `section`.
    /// Unset options (`None`, `false`, empty lists) do not override.
    pub fn resolve<T: Serialize + DeserializeOwned>(&self, cli: &T, section: &str) -> CliResult<T> {
        let mut base = match self.config.get(section) {
            None => json!({}),
            Some(v) => serde_json::to_value(v).expect("TOML converts to JSON"),
        };
        // checks the section against the settings schema
        serde_json::from_value::<T>(base.clone())
            .map_err(|e| CliError::invalid(format!("config [{section}]: {e}")))?;
        let over = serde_json::to_value(cli).expect("settings serialize");
        if let (Some(b), Value::Object(o)) = (base.as_object_mut(), over) {
            for (k, v) in o {
                let unset = match &v {
                    Value::Null | Value::Bool(false) => true,
                    Value::Array(a) => a.is_empty(),
                    _ => false,
                };
                if !unset {
                    b.insert(k, v);
                }
            }
        }
        serde_json::from_value(base).map_err(|e| CliError::invalid(format!("settings: {e}")))
    }

    /// Relative input paths are taken from the data directory when
    /// `AVQA_DATA_DIR` is set.
    pub fn input(&self, p: &Path) -> PathBuf {
        resolve_with(self.data_dir.as_deref(), p)
    }

    pub fn resolve_inputs(&self, paths: &mut [&mut Option<PathBuf>]) {
        for p in paths.iter_mut() {
            if let Some(x) = p.as_ref() {
                **p = Some(self.input(x));
            }
        }
    }

    pub fn header<S: Serialize>(&self, settings: &S) -> Value {
        json!({
            "command": self.command,
            "seed": self.seed,
            "settings": settings,
        })
    }

    /// Writes the machine-readable result to `--output` or stdout.
    pub fn emit(&self, text: &str) -> CliResult<()> {
        match &self.output {
            Some(p) => {
                std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
            }
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(|e| CliError::Io(format!("stdout: {e}")))
            }
        }
    }

    /// A JSON document `{config, ...result}`.
    pub fn emit_json<S: Serialize, R: Serialize>(&self, settings: &S, result: R) -> CliResult<()> {
        let mut doc = json!({ "config": self.header(settings) });
        match serde_json::to_value(result).expect("results serialize") {
            Value::Object(m) => doc.as_object_mut().unwrap().extend(m),
            other => doc["result"] = other,
        }
        let mut text = serde_json::to_string_pretty(&doc).expect("serializes");
        text.push('\n');
        self.emit(&text)
    }

    /// CSV with the resolved config as a leading comment line.
    pub fn emit_csv<S: Serialize>(
        &self,
        settings: &S,
        header: &[&str],
        rows: &[Vec<String>],
    ) -> CliResult<()> {
        let mut text = format!("# config: {}\n", self.header(settings));
        text.push_str(&header.join(","));
        text.push('\n');
        for r in rows {
            let cells: Vec<String> = r.iter().map(|c| csv_cell(c)).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        self.emit(&text)
    }
}

fn resolve_with(dir: Option<&Path>, p: &Path) -> PathBuf {
    match dir {
        Some(d) if p.is_relative() => d.join(p),
        _ => p.to_path_buf(),
    }
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Table cells are printed with one decimal; the JSON output keeps full
/// precision.
pub fn pct(x: f64) -> String {
    format!("{x:.1}")
}

pub fn require<T>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::usage(format!("--{flag} is required")))
}

pub fn read_text(p: &Path) -> CliResult<String> {
    std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
}

/// Fails with an I/O error (exit 2) when `p` is not a readable file, so
/// loaders' own errors can be treated as content problems.
pub fn require_file(p: &Path) -> CliResult<()> {
    std::fs::File::open(p)
        .map(drop)
        .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
}

/// Parses a kebab-case enum value through its serde representation.
pub fn kebab<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(Value::String(s.to_owned())).map_err(|_| format!("unknown value {s:?}"))
}

pub fn say(msg: impl AsRef<str>) {
    eprintln!("{}", msg.as_ref());
}
