use std::path::Path;

use serde_json::{json, Value};

use crate::args::{Command, Format, GlobalArgs};
use crate::error::{CliError, CliResult};
use crate::manifest::sha256_hex;
use crate::output::{read_file, Sink};

mod extrapolate;
mod fit;
mod predict_alpha;
mod reference;
mod simulate;
mod spectral;
mod thermometry;

pub use simulate::parse_ensemble_config;

pub struct Context {
    pub global: GlobalArgs,
    pub sink: Sink,
}

impl Context {
    pub fn format_or(&self, default: Format) -> Format {
        self.global.format.unwrap_or(default)
    }
}

pub fn dispatch(command: Command, ctx: &Context) -> CliResult<()> {
    match command {
        Command::Simulate(a) => simulate::run(&a, ctx),
        Command::Fit(a) => fit::run(&a, ctx),
        Command::Thermometry(a) => thermometry::run(&a, ctx),
        Command::PredictAlpha(a) => predict_alpha::run(&a, ctx),
        Command::Psd(a) => spectral::run_psd(&a, ctx),
        Command::FitAlpha(a) => spectral::run_fit_alpha(&a, ctx),
        Command::Extrapolate(a) => extrapolate::run(&a, ctx),
        Command::ReferenceTable(a) => reference::run(&a, ctx),
    }
}

/// File contents plus the manifest entry describing them.
pub(crate) struct Input {
    pub bytes: Vec<u8>,
    pub digest: Value,
}

pub(crate) fn read_input(path: &Path) -> CliResult<Input> {
    let bytes = read_file(path)?;
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Err(CliError::input(format!("{}: file is empty", path.display())));
    }
    let digest = json!({ "sha256": sha256_hex(&bytes) });
    Ok(Input { bytes, digest })
}

pub(crate) fn with_path<T>(path: &Path, r: fieldnoise_core::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError::from(e).context(path.display()))
}

pub(crate) fn to_json_pretty<T: serde::Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serialises");
    s.push('\n');
    s
}

/// One-header, one-row CSV.
pub(crate) fn single_row_csv(columns: &[(&str, String)]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(columns.iter().map(|c| c.0)).expect("in-memory write");
    w.write_record(columns.iter().map(|c| c.1.as_str())).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8")
}

pub(crate) fn positive(name: &str, v: f64) -> CliResult<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::input(format!("{name} must be > 0, got {v}")))
    }
}
