use fieldnoise_core::dataset::{fmt_f64, NOISE_HEADER};
use fieldnoise_core::ensemble::TelegraphTrace;
use fieldnoise_core::spectral::{estimate_psd, fit_alpha, PsdEstimate, SpectrumSource, Window};
use fieldnoise_core::NoiseDataset;
use serde_json::json;

use super::{read_input, single_row_csv, to_json_pretty, with_path, Context};
use crate::args::{FitAlphaArgs, Format, PsdArgs, WindowArg};
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;

pub fn run_psd(args: &PsdArgs, ctx: &Context) -> CliResult<()> {
    let input = read_input(&args.trace)?;
    let trace = with_path(&args.trace, TelegraphTrace::read_csv(input.bytes.as_slice()))?;
    let window = match args.window {
        WindowArg::Hann => Window::Hann,
        WindowArg::Rectangular => Window::Rectangular,
    };
    let est = with_path(&args.trace, estimate_psd(&trace, args.segment, window))?;
    let body = match ctx.format_or(Format::Csv) {
        Format::Csv => {
            let mut buf = Vec::new();
            est.write_csv(&mut buf)?;
            String::from_utf8(buf).expect("CSV is UTF-8")
        }
        Format::Json => to_json_pretty(&json!({
            "segments": est.segments,
            "window": est.window,
            "resolution_Hz": est.resolution(),
            "frequencies_Hz": est.frequencies,
            "psd": est.psd,
        })),
    };
    ctx.sink.emit_str(&body)?;
    ctx.sink.info(format!(
        "{} segments of {} samples ({:?} window), resolution {} Hz, integrated power {:.6e}",
        est.segments,
        args.segment,
        window,
        est.resolution(),
        est.total_power()
    ));
    let config = json!({
        "segment_length": args.segment,
        "window": window,
        "trace": input.digest,
    });
    let manifest =
        RunManifest::new("psd", config, ctx.global.seed.unwrap_or(0))?.with_input("trace", &args.trace);
    ctx.sink.write_manifest(&manifest)
}

fn first_record(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes)
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .unwrap_or_default()
        .to_string()
}

pub fn run_fit_alpha(args: &FitAlphaArgs, ctx: &Context) -> CliResult<()> {
    let input = read_input(&args.spectrum)?;
    let header = first_record(&input.bytes);
    let points: Vec<(f64, f64)> = if header.starts_with(NOISE_HEADER[0]) {
        let data = with_path(&args.spectrum, NoiseDataset::read_csv("spectrum", input.bytes.as_slice()))?;
        let mut temps = data.temperatures();
        temps.sort_by(f64::total_cmp);
        temps.dedup();
        if temps.len() > 1 {
            ctx.sink.warn("dataset spans several temperatures; all samples enter one fit");
        }
        data.spectrum_points()
    } else {
        with_path(&args.spectrum, PsdEstimate::read_csv(input.bytes.as_slice()))?.spectrum_points()
    };
    let lo = args
        .f_lo
        .unwrap_or_else(|| points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min));
    let hi = args
        .f_hi
        .unwrap_or_else(|| points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max));
    if !(lo < hi) {
        return Err(CliError::input(format!("empty band [{lo}, {hi}] Hz")));
    }
    let fit = fit_alpha(points.as_slice(), (lo, hi))?;
    let body = match ctx.format_or(Format::Json) {
        Format::Json => to_json_pretty(&fit),
        Format::Csv => single_row_csv(&[
            ("alpha", fmt_f64(fit.alpha)),
            ("alpha_err", fmt_f64(fit.alpha_err)),
            ("prefactor", fmt_f64(fit.prefactor)),
            ("f_lo", fmt_f64(fit.f_lo)),
            ("f_hi", fmt_f64(fit.f_hi)),
            ("n_points", fit.n_points.to_string()),
        ]),
    };
    ctx.sink.emit_str(&body)?;
    ctx.sink.info(format!(
        "alpha = {:.4} ± {:.4} over {} points in [{}, {}] Hz",
        fit.alpha, fit.alpha_err, fit.n_points, fit.f_lo, fit.f_hi
    ));
    let config = json!({ "band_Hz": [lo, hi], "spectrum": input.digest });
    let manifest = RunManifest::new("fit-alpha", config, ctx.global.seed.unwrap_or(0))?
        .with_input("spectrum", &args.spectrum);
    ctx.sink.write_manifest(&manifest)
}
