use fieldnoise_core::dataset::{fmt_f64, read_sideband_csv};
use fieldnoise_core::physics::{field_noise_from_heating, heating_rate_skipping_degenerate, rescale_frequency};
use fieldnoise_core::PhysicalContext;
use serde_json::json;

use super::{positive, read_input, single_row_csv, to_json_pretty, with_path, Context};
use crate::args::{Format, ThermometryArgs};
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;

pub fn run(args: &ThermometryArgs, ctx: &Context) -> CliResult<()> {
    let f_trap = positive("--trap-frequency", args.trap_frequency)?;
    let f_to = positive("--rescale-to", args.rescale_to)?;
    let input = read_input(&args.series)?;
    let series = with_path(&args.series, read_sideband_csv(input.bytes.as_slice(), f_trap))?;
    let n_rows = series.points.len();
    let valid = series.points.iter().filter(|p| p.p_bsb > p.p_rsb).count();
    if n_rows > 0 && valid == 0 {
        return Err(CliError::input(format!(
            "{}: every row has P_bsb <= P_rsb; no phonon number can be inferred",
            args.series.display()
        )));
    }
    let (rate, skipped) = with_path(&args.series, heating_rate_skipping_degenerate(&series))?;

    let mut warnings: Vec<String> = skipped
        .iter()
        .map(|i| {
            let p = &series.points[*i];
            format!(
                "row {} (delay {} s) skipped: P_bsb = {} does not exceed P_rsb = {}",
                i + 1,
                p.delay,
                p.p_bsb,
                p.p_rsb
            )
        })
        .collect();
    // A negative slope is unphysical heating; it is reported as zero noise.
    let n_dot_physical = if rate.n_dot < 0.0 {
        warnings.push(format!(
            "fitted heating rate {:.4e} quanta/s is negative ({:.1} sigma); field noise reported as 0",
            rate.n_dot,
            -rate.n_dot / rate.n_dot_err
        ));
        0.0
    } else {
        rate.n_dot
    };
    let phys = PhysicalContext::strontium_88();
    let s_e = field_noise_from_heating(n_dot_physical, f_trap, &phys)?;
    let s_e_err = field_noise_from_heating(rate.n_dot_err, f_trap, &phys)?;
    let s_e_to = rescale_frequency(s_e, f_trap, f_to)?;
    let s_e_to_err = rescale_frequency(s_e_err, f_trap, f_to)?;

    let body = match ctx.format_or(Format::Json) {
        Format::Json => to_json_pretty(&json!({
            "trap_frequency_Hz": f_trap,
            "n_dot": rate.n_dot,
            "n_dot_err": rate.n_dot_err,
            "n_initial": rate.n_initial,
            "points_used": rate.points_used,
            "skipped_rows": skipped.iter().map(|i| i + 1).collect::<Vec<_>>(),
            "SE_V2m2Hz": s_e,
            "SE_err_V2m2Hz": s_e_err,
            "rescaled_frequency_Hz": f_to,
            "SE_rescaled_V2m2Hz": s_e_to,
            "SE_rescaled_err_V2m2Hz": s_e_to_err,
            "warnings": warnings,
        })),
        Format::Csv => single_row_csv(&[
            ("trap_frequency_Hz", fmt_f64(f_trap)),
            ("n_dot", fmt_f64(rate.n_dot)),
            ("n_dot_err", fmt_f64(rate.n_dot_err)),
            ("n_initial", fmt_f64(rate.n_initial)),
            ("points_used", rate.points_used.to_string()),
            ("SE_V2m2Hz", fmt_f64(s_e)),
            ("SE_err_V2m2Hz", fmt_f64(s_e_err)),
            ("rescaled_frequency_Hz", fmt_f64(f_to)),
            ("SE_rescaled_V2m2Hz", fmt_f64(s_e_to)),
            ("SE_rescaled_err_V2m2Hz", fmt_f64(s_e_to_err)),
        ]),
    };
    ctx.sink.emit_str(&body)?;
    ctx.sink.info(format!(
        "heating rate {:.0} ± {:.0} quanta/s from {} points at {} MHz\n\
         S_E = {:.2} ± {:.2} x 1e-15 V^2/m^2/Hz ({:.2} ± {:.2} x 1e-15 at {} MHz)",
        rate.n_dot,
        rate.n_dot_err,
        rate.points_used,
        f_trap / 1e6,
        s_e / 1e-15,
        s_e_err / 1e-15,
        s_e_to / 1e-15,
        s_e_to_err / 1e-15,
        f_to / 1e6
    ));
    for w in &warnings {
        ctx.sink.warn(w);
    }
    let config = json!({
        "trap_frequency_Hz": f_trap,
        "rescale_to_Hz": f_to,
        "ion": "88Sr+",
        "series": input.digest,
    });
    let manifest = RunManifest::new("thermometry", config, ctx.global.seed.unwrap_or(0))?
        .with_input("series", &args.series);
    ctx.sink.write_manifest(&manifest)
}
