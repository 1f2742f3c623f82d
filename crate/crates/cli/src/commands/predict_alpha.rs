use std::f64::consts::PI;
use std::fmt::Write as _;

use fieldnoise_core::dataset::fmt_f64;
use fieldnoise_core::dutta_horn::{crossover_temperature, model_alpha, spectrum_integral, DuttaHornParams, Normalization};
use fieldnoise_core::Error;
use serde_json::json;

use super::{read_input, to_json_pretty, Context};
use crate::args::{Format, PredictAlphaArgs};
use crate::error::{CliError, CliResult};
use crate::grid::Grid;
use crate::manifest::RunManifest;

const PARITY_TEMPERATURES: [f64; 6] = [10.0, 20.0, 35.0, 46.0, 70.0, 100.0];

fn load_params(args: &PredictAlphaArgs) -> CliResult<(DuttaHornParams, Option<serde_json::Value>)> {
    let (mut p, digest) = match &args.params {
        Some(path) => {
            let input = read_input(path)?;
            let p: DuttaHornParams = serde_json::from_slice(&input.bytes)
                .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            (p, Some(input.digest))
        }
        None => {
            let (beta, t0) = args.beta.zip(args.t0).ok_or_else(|| {
                CliError::input("give --params, or both --beta and --t0")
            })?;
            (DuttaHornParams::new(beta, t0), None)
        }
    };
    if let Some(b) = args.beta {
        p.beta = b;
    }
    if let Some(t0) = args.t0 {
        p.t0 = t0;
    }
    if let Some(tau0) = args.tau0 {
        p.tau0 = tau0;
    }
    p.validate()?;
    Ok((p, digest))
}

fn sorted_grid(grid: &[f64]) -> CliResult<Vec<f64>> {
    if let Some(t) = grid.iter().find(|t| !(**t > 0.0)) {
        return Err(CliError::input(format!("temperatures must be > 0, got {t}")));
    }
    let mut g = grid.to_vec();
    g.sort_by(f64::total_cmp);
    g.dedup();
    Ok(g)
}

pub fn run(args: &PredictAlphaArgs, ctx: &Context) -> CliResult<()> {
    let (p, digest) = load_params(args)?;
    let omega = 2.0 * PI * args.frequency;
    let t1 = match crossover_temperature(&p) {
        Ok(t) => Some(t),
        Err(Error::NoCrossover { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let format = ctx.format_or(Format::Csv);

    let (body, temps) = if args.figure_parity {
        let temps = sorted_grid(args.temperatures.as_ref().map(Grid::values).unwrap_or(&PARITY_TEMPERATURES))?;
        // Scaled so the model matches S0 (1 + (T/T0)^β) at T0 and the reference frequency.
        let norm = Normalization::Reference {
            omega: 2.0 * PI * fieldnoise_core::dutta_horn::REFERENCE_FREQUENCY,
            temperature: p.t0,
            value: 2.0 * p.s0,
        };
        let mut rows = Vec::with_capacity(temps.len() * args.frequencies.values().len());
        for &t in &temps {
            for &f in args.frequencies.values() {
                let s = spectrum_integral(&p, 2.0 * PI * f, t, norm)?;
                rows.push((t, f, s * f));
            }
        }
        let body = match format {
            Format::Csv => {
                let mut out = String::from("temperature_K,frequency_Hz,S_times_f_V2m2\n");
                for (t, f, sf) in &rows {
                    writeln!(out, "{},{},{}", fmt_f64(*t), fmt_f64(*f), fmt_f64(*sf)).unwrap();
                }
                out
            }
            Format::Json => to_json_pretty(&json!({
                "s0": p.s0,
                "rows": rows.iter().map(|(t, f, sf)| json!({
                    "temperature_K": t, "frequency_Hz": f, "S_times_f_V2m2": sf,
                })).collect::<Vec<_>>(),
            })),
        };
        (body, temps)
    } else {
        let default: Grid = "5:150:30".parse().expect("valid grid");
        let mut temps = args.temperatures.clone().unwrap_or(default).0;
        if let Some(t1) = t1 {
            temps.push(t1);
        }
        let temps = sorted_grid(&temps)?;
        let alphas = temps
            .iter()
            .map(|t| model_alpha(&p, omega, *t))
            .collect::<fieldnoise_core::Result<Vec<_>>>()?;
        let body = match format {
            Format::Csv => {
                let mut out = String::new();
                match t1 {
                    Some(t1) => writeln!(out, "# T1_K = {}", fmt_f64(t1)).unwrap(),
                    None => writeln!(out, "# T1_K = none (beta <= 1)").unwrap(),
                }
                writeln!(out, "# frequency_Hz = {}", fmt_f64(args.frequency)).unwrap();
                out.push_str("temperature_K,alpha\n");
                for (t, a) in temps.iter().zip(&alphas) {
                    writeln!(out, "{},{}", fmt_f64(*t), fmt_f64(*a)).unwrap();
                }
                out
            }
            Format::Json => to_json_pretty(&json!({
                "T1_K": t1,
                "frequency_Hz": args.frequency,
                "rows": temps.iter().zip(&alphas).map(|(t, a)| json!({"temperature_K": t, "alpha": a})).collect::<Vec<_>>(),
            })),
        };
        (body, temps)
    };
    ctx.sink.emit_str(&body)?;
    match t1 {
        Some(t1) => ctx.sink.info(format!(
            "beta = {}, T0 = {} K: alpha crosses 1 at T1 = {t1:.2} K",
            p.beta, p.t0
        )),
        None => ctx.sink.info(format!("beta = {} <= 1: alpha never reaches 1", p.beta)),
    }

    let mut config = json!({
        "params": p,
        "frequency_Hz": args.frequency,
        "figure_parity": args.figure_parity,
        "temperatures_K": temps,
    });
    if args.figure_parity {
        config["frequencies_Hz"] = json!(args.frequencies.values());
    }
    if let Some(d) = digest {
        config["params_file"] = d;
    }
    let mut manifest = RunManifest::new("predict-alpha", config, ctx.global.seed.unwrap_or(0))?;
    if let Some(path) = &args.params {
        manifest = manifest.with_input("params", path);
    }
    ctx.sink.write_manifest(&manifest)
}
