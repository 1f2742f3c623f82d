use fieldnoise_core::dataset::fmt_f64;
use fieldnoise_core::dutta_horn::{johnson_prediction, temperature_exponent, ResistivityCurve, REFERENCE_FREQUENCY};
use fieldnoise_core::fitting::{fit_model, FitOptions, FitReport, LossSpace, TempModel};
use fieldnoise_core::NoiseDataset;
use serde_json::{json, Value};

use super::{positive, read_input, to_json_pretty, with_path, Context};
use crate::args::{FitArgs, Format, LossArg, ModelArg};
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;

/// Display unit for spectral densities.
const S_UNIT: f64 = 1e-15;

fn model_of(m: ModelArg) -> TempModel {
    match m {
        ModelArg::TempScaling => TempModel::TempScaling,
        ModelArg::Arrhenius => TempModel::Arrhenius,
    }
}

fn distinct_frequencies(data: &NoiseDataset) -> Vec<f64> {
    let mut f: Vec<f64> = data.samples.iter().map(|s| s.frequency).collect();
    f.sort_by(f64::total_cmp);
    f.dedup();
    f
}

fn johnson_comparison(
    rho: &ResistivityCurve,
    data: &NoiseDataset,
    report: &FitReport,
    warnings: &mut Vec<String>,
) -> CliResult<Value> {
    let (lo, hi) = rho.range();
    let mut temps: Vec<f64> = data.temperatures();
    temps.sort_by(f64::total_cmp);
    temps.dedup();
    let outside = temps.iter().filter(|t| **t < lo || **t > hi).count();
    temps.retain(|t| (lo..=hi).contains(t));
    if outside > 0 {
        warnings.push(format!(
            "{outside} dataset temperatures lie outside the resistivity table [{lo}, {hi}] K and are left out of the Johnson comparison"
        ));
    }
    if temps.len() < 2 {
        return Err(CliError::input(
            "Johnson comparison needs at least two dataset temperatures inside the resistivity table",
        ));
    }
    let johnson = temperature_exponent(&johnson_prediction(rho, &temps)?)?;
    let subset = NoiseDataset {
        label: data.label.clone(),
        samples: data
            .samples
            .iter()
            .filter(|s| (lo..=hi).contains(&s.temperature))
            .copied()
            .collect(),
    };
    let measured = temperature_exponent(&subset)?;
    let mut out = json!({
        "grid_K": [temps[0], temps[temps.len() - 1]],
        "johnson_temperature_exponent": johnson,
        "data_temperature_exponent": measured,
    });
    if report.model == TempModel::TempScaling {
        out["fitted_beta_minus_johnson"] = json!(report.params[2] - johnson);
    }
    Ok(out)
}

fn human_summary(report: &FitReport) -> String {
    let names = report.model.parameter_names();
    let mut out = format!(
        "{} fit: {} points, {} iterations, chi2_red = {:.3}\n",
        names.join("/"),
        report.n_points,
        report.iterations,
        report.chi2_reduced
    );
    for (i, name) in names.iter().enumerate() {
        let (v, e) = (report.params[i], report.errors_1sigma[i]);
        let line = match *name {
            "s0" | "s_t" => format!("  {name:<5} = {:.4} ± {:.4} x 1e-15 V^2/m^2/Hz\n", v / S_UNIT, e / S_UNIT),
            "t0" => format!("  {name:<5} = {v:.3} ± {e:.3} K\n"),
            _ => format!("  {name:<5} = {v:.4} ± {e:.4}\n"),
        };
        out.push_str(&line);
    }
    out
}

pub fn run(args: &FitArgs, ctx: &Context) -> CliResult<()> {
    let input = read_input(&args.dataset)?;
    let label = args
        .dataset
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut data = with_path(&args.dataset, NoiseDataset::read_csv(label, input.bytes.as_slice()))?;
    let mut warnings = Vec::new();

    let freqs = distinct_frequencies(&data);
    let target = match args.scale_to_frequency {
        Some(f) => Some(positive("--scale-to-frequency", f)?),
        None if freqs.len() > 1 => {
            warnings.push(format!(
                "dataset mixes {} frequencies; rescaled to {} MHz assuming 1/f",
                freqs.len(),
                REFERENCE_FREQUENCY / 1e6
            ));
            Some(REFERENCE_FREQUENCY)
        }
        None => None,
    };
    if let Some(f) = target {
        data = data.rescaled_to_frequency(f, 1.0)?;
    }

    let model = model_of(args.model);
    let opts = FitOptions {
        loss_space: match args.loss {
            LossArg::Log => LossSpace::Log,
            LossArg::Linear => LossSpace::Linear,
        },
        max_iterations: args.max_iterations,
        tolerance: args.tolerance,
        bootstrap_resamples: args.bootstrap,
        seed: ctx.global.seed.unwrap_or(0),
        ..FitOptions::default()
    };
    let report = fit_model(&data, model, &opts).map_err(|e| CliError::from(e).context(args.dataset.display()))?;

    let johnson = match &args.johnson {
        Some(path) => {
            let rho_input = read_input(path)?;
            let rho = with_path(path, ResistivityCurve::read_csv(rho_input.bytes.as_slice()))?;
            Some((johnson_comparison(&rho, &data, &report, &mut warnings)?, rho_input.digest))
        }
        None => None,
    };
    warnings.extend(report.warnings.iter().cloned());

    let mut out = report.to_json();
    out["dataset"] = json!(data.label);
    out["scaled_to_frequency_Hz"] = json!(target);
    out["warnings"] = json!(warnings);
    if let Some((j, _)) = &johnson {
        out["johnson"] = j.clone();
    }

    let body = match ctx.format_or(Format::Json) {
        Format::Json => to_json_pretty(&out),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["parameter", "value", "error_1sigma"]).expect("in-memory write");
            for (i, name) in model.parameter_names().iter().enumerate() {
                w.write_record([name.to_string(), fmt_f64(report.params[i]), fmt_f64(report.errors_1sigma[i])])
                    .expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8")
        }
    };
    ctx.sink.emit_str(&body)?;
    ctx.sink.info(human_summary(&report).trim_end());
    for w in &warnings {
        ctx.sink.warn(w);
    }

    let mut config = json!({
        "model": model,
        "loss": opts.loss_space,
        "bootstrap_resamples": opts.bootstrap_resamples,
        "max_iterations": opts.max_iterations,
        "tolerance": opts.tolerance,
        "scale_to_frequency_Hz": args.scale_to_frequency,
        "dataset": input.digest,
    });
    let mut manifest_inputs = vec![("dataset", args.dataset.as_path())];
    if let (Some((_, digest)), Some(path)) = (johnson, &args.johnson) {
        config["resistivity"] = digest;
        manifest_inputs.push(("resistivity", path.as_path()));
    }
    let mut manifest = RunManifest::new("fit", config, opts.seed)?;
    for (role, path) in manifest_inputs {
        manifest = manifest.with_input(role, path);
    }
    ctx.sink.write_manifest(&manifest)
}
