use fieldnoise_core::dataset::fmt_f64;
use fieldnoise_core::extrapolation::{extrapolate, CantileverConfig, ExtrapolationQuery, ScalingLaw};
use fieldnoise_core::PhysicalContext;
use serde_json::json;

use super::{to_json_pretty, Context};
use crate::args::{ExtrapolateArgs, Format};
use crate::error::CliResult;
use crate::manifest::RunManifest;

pub fn query_from(args: &ExtrapolateArgs) -> ExtrapolationQuery {
    let cantilever = match (args.gamma, args.capacitance, args.voltage, args.cantilever_temperature) {
        (Some(gamma), Some(capacitance), Some(voltage), Some(temperature)) => Some(CantileverConfig {
            gamma,
            capacitance,
            voltage,
            temperature,
        }),
        _ => None,
    };
    ExtrapolationQuery {
        law: ScalingLaw {
            distance_exponent: args.distance_exponent,
            frequency_exponent: args.frequency_exponent,
            reference: args.reference,
        },
        distance: args.distance,
        frequency: args.frequency,
        tau: args.tau,
        tau0: args.tau0,
        cantilever,
    }
}

pub fn run(args: &ExtrapolateArgs, ctx: &Context) -> CliResult<()> {
    let query = query_from(args);
    let report = extrapolate(&query, PhysicalContext::default().k_b)?;
    let body = match ctx.global.format {
        None => report.to_table(),
        Some(Format::Json) => to_json_pretty(&report),
        Some(Format::Csv) => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["quantity", "value", "units", "reported", "ratio", "source"])
                .expect("in-memory write");
            let mut row = |q: &str, v: f64, u: &str| {
                w.write_record([q, &fmt_f64(v), u, "", "", ""]).expect("in-memory write");
            };
            row("S_E", report.field_noise, "V^2/m^2/Hz");
            if let Ok(p) = &report.patch {
                row("sigma_E", p.sigma_e, "V/m");
                row("sigma_V2_A_patch", p.sigma_v2_a, "V^2 m^2");
            }
            if let Some(s) = report.cantilever_noise {
                row("cantilever_S_E", s, "V^2/m^2/Hz");
            }
            for c in &report.comparisons {
                w.write_record([
                    c.quantity.as_str(),
                    &fmt_f64(c.extrapolated),
                    c.units.as_str(),
                    &fmt_f64(c.reported),
                    &fmt_f64(c.ratio),
                    c.source.as_str(),
                ])
                .expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8")
        }
    };
    ctx.sink.emit_str(&body)?;
    if let Err(reason) = &report.patch {
        ctx.sink.warn(format!("DC field fluctuation not computed: {reason}"));
    }
    let manifest = RunManifest::new("extrapolate", json!({ "query": query }), ctx.global.seed.unwrap_or(0))?;
    ctx.sink.write_manifest(&manifest)
}
