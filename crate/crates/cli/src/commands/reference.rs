use std::path::Path;

use fieldnoise_core::dataset::{fmt_f64, write_sideband_csv};
use fieldnoise_core::reference::{load_reference_table, ReferenceTable};
use fieldnoise_core::synthetic::{self, DEFAULT_SEED};
use serde_json::json;

use super::{to_json_pretty, Context};
use crate::args::{Format, ReferenceTableArgs};
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;
use crate::output::write_file;

/// Heating rate of the bundled sideband series, quanta/s.
pub const SIDEBAND_N_DOT: f64 = 4200.0;
const SIDEBAND_TRIALS: u32 = 10_000;

/// `III a` becomes `trap_III_a.csv`.
pub fn dataset_file_name(label: &str) -> String {
    format!("trap_{}.csv", label.split_whitespace().collect::<Vec<_>>().join("_"))
}

fn table_csv(table: &ReferenceTable) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "label",
        "s0_1e-15_V2m2Hz",
        "s0_err",
        "t0_K",
        "t0_err",
        "beta",
        "beta_err",
        "note",
    ])
    .expect("in-memory write");
    for r in &table.rows {
        w.write_record([
            r.label.clone(),
            r.s0.to_string(),
            r.s0_err.to_string(),
            r.t0.to_string(),
            r.t0_err.to_string(),
            r.beta.to_string(),
            r.beta_err.to_string(),
            r.note.clone(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8")
}

fn synthesize(dir: &Path, table: &ReferenceTable, noise: f64, seed: u64) -> CliResult<Vec<String>> {
    if !(noise.is_finite() && noise >= 0.0) {
        return Err(CliError::input(format!("--noise must be >= 0, got {noise}")));
    }
    let mut written = Vec::new();
    for (i, row) in table.rows.iter().enumerate() {
        let data = synthetic::reference_dataset(row, noise, seed + i as u64)?;
        let name = dataset_file_name(&row.label);
        write_file(&dir.join(&name), data.to_csv_string().as_bytes())?;
        written.push(name);
    }
    let anomaly = synthetic::anomaly_dataset(noise, seed)?;
    write_file(&dir.join("anomaly.csv"), anomaly.to_csv_string().as_bytes())?;
    written.push("anomaly.csv".into());

    let delays: Vec<f64> = (0..8).map(|i| i as f64 * 1.5e-4).collect();
    let series = synthetic::sideband_series(SIDEBAND_N_DOT, 0.1, &delays, SIDEBAND_TRIALS, 1e6, seed)?;
    let mut buf = Vec::new();
    write_sideband_csv(&series, &mut buf)?;
    write_file(&dir.join("sideband.csv"), &buf)?;
    written.push("sideband.csv".into());
    Ok(written)
}

pub fn run(args: &ReferenceTableArgs, ctx: &Context) -> CliResult<()> {
    let table = load_reference_table();
    let body = match ctx.format_or(Format::Csv) {
        Format::Csv => table_csv(&table),
        Format::Json => to_json_pretty(&table),
    };
    ctx.sink.emit_str(&body)?;
    let seed = ctx.global.seed.unwrap_or(DEFAULT_SEED);
    let mut config = json!({ "synthesize": args.synthesize.is_some() });
    if let Some(dir) = &args.synthesize {
        let files = synthesize(dir, &table, args.noise, seed)?;
        ctx.sink.info(format!(
            "wrote {} datasets to {} (noise {}, seed {seed})",
            files.len(),
            dir.display(),
            fmt_f64(args.noise)
        ));
        config["noise"] = json!(args.noise);
        config["sideband"] = json!({
            "n_dot": SIDEBAND_N_DOT,
            "n0": 0.1,
            "trials": SIDEBAND_TRIALS,
            "trap_frequency_Hz": 1e6,
        });
        config["files"] = json!(files);
    }
    let manifest = RunManifest::new("reference-table", config, seed)?;
    match (&args.synthesize, ctx.sink.manifest_path()) {
        (Some(dir), None) => write_file(&dir.join("manifest.json"), manifest.to_json_pretty().as_bytes()),
        _ => ctx.sink.write_manifest(&manifest),
    }
}
