//! Where results, manifests and human-readable messages go.
//!
//! Data goes to `--output` or stdout. Messages go to stderr so that
//! stdout stays machine-readable. The manifest is written to
//! `--manifest`, else next to `--output` as `<output>.manifest.json`, else
//! to stderr.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;

#[derive(Debug, Clone)]
pub struct Sink {
    pub output: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub quiet: bool,
}

impl Sink {
    pub fn emit(&self, bytes: &[u8]) -> CliResult<()> {
        match &self.output {
            Some(path) => write_file(path, bytes),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(bytes)?;
                out.flush()?;
                Ok(())
            }
        }
    }

    pub fn emit_str(&self, s: &str) -> CliResult<()> {
        self.emit(s.as_bytes())
    }

    pub fn manifest_path(&self) -> Option<PathBuf> {
        self.manifest.clone().or_else(|| {
            self.output.as_ref().map(|p| {
                let mut name = p.as_os_str().to_owned();
                name.push(".manifest.json");
                PathBuf::from(name)
            })
        })
    }

    pub fn write_manifest(&self, manifest: &RunManifest) -> CliResult<()> {
        let text = manifest.to_json_pretty();
        match self.manifest_path() {
            Some(path) => write_file(&path, text.as_bytes()),
            None => {
                if !self.quiet {
                    eprint!("{text}");
                }
                Ok(())
            }
        }
    }

    pub fn info(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    /// Warnings are printed even with `--quiet`.
    pub fn warn(&self, msg: impl AsRef<str>) {
        eprintln!("warning: {}", msg.as_ref());
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::input(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}
