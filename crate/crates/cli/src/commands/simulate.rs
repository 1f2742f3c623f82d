use fieldnoise_core::dutta_horn::temperature_exponent;
use fieldnoise_core::ensemble::{ensemble_dataset, sample_ensemble, telegraph_trace_capped, EnsembleConfig};
use fieldnoise_core::{synthetic, Error, NoiseDataset};
use serde_json::{json, Value};

use super::{read_input, to_json_pretty, Context};
use crate::args::{Format, SimulateArgs};
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;

const ENSEMBLE_KEYS: [&str; 7] = ["beta", "e_min_K", "e_max_K", "tau0_s", "n", "amplitude", "seed"];
/// Parameter files for the analytic model reuse the ensemble schema with
/// these extra keys; they are accepted and ignored here.
const SHARED_KEYS: [&str; 2] = ["t0_K", "s0"];

fn line_of(text: &str, key: &str) -> Option<usize> {
    text.find(&format!("\"{key}\""))
        .map(|i| text[..i].bytes().filter(|b| *b == b'\n').count() + 1)
}

fn at_line(text: &str, key: &str) -> String {
    line_of(text, key).map(|l| format!(" (line {l})")).unwrap_or_default()
}

/// Parses and validates an ensemble config, reporting the offending line
/// and field on failure.
pub fn parse_ensemble_config(text: &str) -> CliResult<EnsembleConfig> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::input(format!("config: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| CliError::input("config: expected a JSON object"))?;
    if let Some(key) = obj
        .keys()
        .find(|k| !ENSEMBLE_KEYS.contains(&k.as_str()) && !SHARED_KEYS.contains(&k.as_str()))
    {
        return Err(CliError::input(format!(
            "config: unknown field `{key}`{}; expected one of {}",
            at_line(text, key),
            ENSEMBLE_KEYS.join(", ")
        )));
    }
    let cfg: EnsembleConfig = serde_json::from_str(text).map_err(|e| CliError::input(format!("config: {e}")))?;
    cfg.validate().map_err(|e| match &e {
        Error::InvalidInput { field, .. } => CliError::input(format!("config: {e}{}", at_line(text, field))),
        _ => CliError::from(e).context("config"),
    })?;
    Ok(cfg)
}

pub fn run(args: &SimulateArgs, ctx: &Context) -> CliResult<()> {
    let input = read_input(&args.config)?;
    let text = std::str::from_utf8(&input.bytes)
        .map_err(|_| CliError::input(format!("{}: not UTF-8", args.config.display())))?;
    let mut cfg = parse_ensemble_config(text).map_err(|e| e.context(args.config.display()))?;
    if let Some(seed) = ctx.global.seed {
        cfg.seed = seed;
    }
    let ensemble = sample_ensemble(&cfg)?;
    let format = ctx.format_or(Format::Csv);

    let config = if args.trace {
        let trace = telegraph_trace_capped(
            &ensemble,
            args.temperature,
            args.sample_rate,
            args.duration,
            cfg.seed,
            args.max_samples,
        )?;
        let body = match format {
            Format::Csv => {
                let mut buf = Vec::new();
                trace.write_csv(&mut buf)?;
                String::from_utf8(buf).expect("CSV is UTF-8")
            }
            Format::Json => to_json_pretty(&json!({
                "sample_rate_Hz": trace.sample_rate,
                "seed": trace.seed,
                "values": trace.values,
            })),
        };
        ctx.sink.emit_str(&body)?;
        ctx.sink.info(format!(
            "telegraph trace: {} fluctuators at {} K, {} samples at {} Hz",
            ensemble.len(),
            args.temperature,
            trace.values.len(),
            trace.sample_rate
        ));
        json!({
            "mode": "trace",
            "ensemble": cfg,
            "temperature_K": args.temperature,
            "sample_rate_Hz": args.sample_rate,
            "duration_s": args.duration,
            "max_samples": args.max_samples,
            "config_file": input.digest,
        })
    } else {
        let temps = args
            .temperatures
            .as_ref()
            .map(|g| g.values().to_vec())
            .unwrap_or_else(synthetic::temperature_grid);
        let freqs = args.frequencies.values();
        let data = ensemble_dataset(&ensemble, "simulated", &temps, freqs)?;
        let body = match format {
            Format::Csv => data.to_csv_string(),
            Format::Json => to_json_pretty(&data),
        };
        ctx.sink.emit_str(&body)?;
        ctx.sink.info(format!(
            "{} fluctuators, {} temperatures x {} frequencies",
            ensemble.len(),
            temps.len(),
            freqs.len()
        ));
        if temps.len() >= 2 {
            let f = freqs[0];
            let at_f = NoiseDataset {
                label: data.label.clone(),
                samples: data.samples.iter().filter(|s| s.frequency == f).copied().collect(),
            };
            if let Ok(slope) = temperature_exponent(&at_f) {
                let lo = temps.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = temps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                ctx.sink.info(format!(
                    "log-log slope of S(T) at {} MHz over {lo}-{hi} K: {slope:.3}",
                    f / 1e6
                ));
            }
        }
        json!({
            "mode": "spectra",
            "ensemble": cfg,
            "temperatures_K": temps,
            "frequencies_Hz": freqs,
            "config_file": input.digest,
        })
    };
    let manifest = RunManifest::new("simulate", config, cfg.seed)?.with_input("config", &args.config);
    ctx.sink.write_manifest(&manifest)
}
