use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

/// Provenance written at the top of every artifact.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
    pub cli_version: &'static str,
    pub core_version: &'static str,
}

impl Meta {
    pub fn new(command: &str, digest: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            config_sha256: digest.to_string(),
            seed,
            cli_version: env!("CARGO_PKG_VERSION"),
            core_version: cantorwave::VERSION,
        }
    }

    fn header(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# command={}", self.command);
        let _ = writeln!(s, "# config_sha256={}", self.config_sha256);
        let _ = writeln!(s, "# seed={}", self.seed);
        let _ = writeln!(s, "# cantorwave_cli={}", self.cli_version);
        let _ = writeln!(s, "# cantorwave={}", self.core_version);
        s
    }
}

/// Collects artifacts for one command and writes them under a directory.
pub struct Sink {
    pub dir: PathBuf,
    pub meta: Meta,
    pub written: Vec<PathBuf>,
}

impl Sink {
    pub fn new(dir: &Path, meta: Meta) -> Self {
        Self {
            dir: dir.to_path_buf(),
            meta,
            written: Vec::new(),
        }
    }

    fn put(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        std::fs::create_dir_all(&self.dir)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", self.dir.display())))?;
        let path = self.dir.join(name);
        std::fs::write(&path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(path);
        Ok(())
    }

    /// CSV preceded by the provenance header and `extra` as `# key=value` lines.
    pub fn csv<R, I>(&mut self, name: &str, extra: &[(String, String)], columns: &[&str], rows: R) -> Result<(), CliError>
    where
        R: IntoIterator<Item = I>,
        I: IntoIterator<Item = String>,
    {
        let mut s = self.meta.header();
        for (k, v) in extra {
            let _ = writeln!(s, "# {k}={v}");
        }
        s.push_str(&columns.join(","));
        s.push('\n');
        for row in rows {
            let cells: Vec<String> = row.into_iter().collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        self.put(name, &s)
    }

    /// Text that already carries `#` metadata, prefixed with the provenance header.
    pub fn annotated(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        let s = self.meta.header() + body;
        self.put(name, &s)
    }

    /// JSON object with a `meta` field followed by the fields of `body`.
    pub fn json<B: Serialize>(&mut self, name: &str, body: &B) -> Result<(), CliError> {
        #[derive(Serialize)]
        struct Doc<'a, B> {
            meta: &'a Meta,
            #[serde(flatten)]
            body: &'a B,
        }
        let mut s = serde_json::to_string_pretty(&Doc {
            meta: &self.meta,
            body,
        })
        .map_err(|e| CliError::Io(format!("cannot serialize {name}: {e}")))?;
        s.push('\n');
        self.put(name, &s)
    }
}

pub fn kv(k: &str, v: impl std::fmt::Display) -> (String, String) {
    (k.to_string(), v.to_string())
}

/// Shortest round-trip text, in exponent form outside `[1e-4, 1e16)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e16).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}
