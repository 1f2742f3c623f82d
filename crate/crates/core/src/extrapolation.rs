//! Power-law extrapolation of field noise to other distances and
//! frequencies, and comparison with static patch-field measurements.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScalingLaw {
    pub distance_exponent: f64,
    pub frequency_exponent: f64,
    /// `S_E · f^a · d^b` in V²·m² for the default exponents.
    pub reference: f64,
}

impl Default for ScalingLaw {
    fn default() -> Self {
        ScalingLaw {
            distance_exponent: 4.0,
            frequency_exponent: 1.0,
            reference: 1e-21,
        }
    }
}

impl ScalingLaw {
    pub fn validate(&self) -> Result<()> {
        if !(self.reference > 0.0 && self.reference.is_finite()) {
            return Err(Error::invalid("reference", format!("must be positive, got {}", self.reference)));
        }
        if !(self.distance_exponent.is_finite() && self.frequency_exponent.is_finite()) {
            return Err(Error::invalid("exponent", "exponents must be finite"));
        }
        Ok(())
    }
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be positive, got {v}")))
    }
}

/// `reference · d^-b · f^-a`
pub fn scale_noise(law: &ScalingLaw, d: f64, f: f64) -> Result<f64> {
    law.validate()?;
    positive("distance", d)?;
    positive("frequency", f)?;
    Ok(law.reference * d.powf(-law.distance_exponent) * f.powf(-law.frequency_exponent))
}

/// RMS field fluctuation accumulated between `tau0` and `tau` for pure
/// `1/f` noise, `σ² = S_E·f · ln(τ/τ0)`.
///
/// Refuses any frequency exponent other than 1: the log integral only
/// holds for `S·f` constant.
pub fn dc_field_fluctuation(law: &ScalingLaw, d: f64, tau: f64, tau0: f64) -> Result<f64> {
    law.validate()?;
    if law.frequency_exponent != 1.0 {
        return Err(Error::Domain(format!(
            "DC extrapolation needs 1/f noise, got frequency exponent {}",
            law.frequency_exponent
        )));
    }
    positive("distance", d)?;
    positive("tau0", tau0)?;
    if !(tau > tau0 && tau.is_finite()) {
        return Err(Error::invalid("tau", format!("must exceed tau0 = {tau0}, got {tau}")));
    }
    let s_times_f = law.reference * d.powf(-law.distance_exponent);
    Ok((s_times_f * (tau / tau0).ln()).sqrt())
}

/// `σ_V² A_patch ≈ σ_E² d⁴`
pub fn patch_product(sigma_e: f64, d: f64) -> Result<f64> {
    if !(sigma_e >= 0.0 && sigma_e.is_finite()) {
        return Err(Error::invalid("sigma_e", format!("must be non-negative, got {sigma_e}")));
    }
    positive("distance", d)?;
    Ok(sigma_e * sigma_e * d.powi(4))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatchStatistics {
    /// V/m
    pub sigma_e: f64,
    /// V²·m²
    pub sigma_v2_a: f64,
    /// s
    pub averaging_time: f64,
}

pub fn patch_statistics(law: &ScalingLaw, d: f64, tau: f64, tau0: f64) -> Result<PatchStatistics> {
    let sigma_e = dc_field_fluctuation(law, d, tau, tau0)?;
    Ok(PatchStatistics {
        sigma_e,
        sigma_v2_a: patch_product(sigma_e, d)?,
        averaging_time: tau,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CantileverConfig {
    /// Damping rate Γ, kg/s.
    pub gamma: f64,
    /// F
    pub capacitance: f64,
    /// V
    pub voltage: f64,
    /// K
    pub temperature: f64,
}

impl CantileverConfig {
    pub fn validate(&self) -> Result<()> {
        positive("gamma", self.gamma)?;
        positive("capacitance", self.capacitance)?;
        positive("voltage", self.voltage)?;
        positive("temperature", self.temperature)
    }
}

/// `4 k_B T Γ / (C V)²`
pub fn cantilever_field_noise(cfg: &CantileverConfig, k_b: f64) -> Result<f64> {
    cfg.validate()?;
    positive("k_b", k_b)?;
    let cv = cfg.capacitance * cfg.voltage;
    Ok(4.0 * k_b * cfg.temperature * cfg.gamma / (cv * cv))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonConstant {
    pub value: f64,
    pub units: String,
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonConstants {
    pub version: u32,
    pub constants: std::collections::BTreeMap<String, ComparisonConstant>,
}

impl ComparisonConstants {
    pub fn get(&self, key: &str) -> Result<&ComparisonConstant> {
        self.constants
            .get(key)
            .ok_or_else(|| Error::Domain(format!("comparison constant {key:?} missing from constants file")))
    }
}

pub const STATIC_FIELD: &str = "static_field_sigma_e";
pub const CONTACT_POTENTIAL: &str = "contact_potential_patch_product";

const CONSTANTS_JSON: &str = include_str!("../data/comparison_constants.json");

/// The bundled comparison constants.
pub fn comparison_constants() -> &'static ComparisonConstants {
    static CELL: OnceLock<ComparisonConstants> = OnceLock::new();
    CELL.get_or_init(|| serde_json::from_str(CONSTANTS_JSON).expect("bundled constants file is valid JSON"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtrapolationQuery {
    pub law: ScalingLaw,
    /// Ion-surface or probe-surface distance, m.
    pub distance: f64,
    /// Hz
    pub frequency: f64,
    /// Averaging time for the DC extrapolation, s.
    pub tau: f64,
    /// Microscopic cutoff, s.
    pub tau0: f64,
    pub cantilever: Option<CantileverConfig>,
}

impl Default for ExtrapolationQuery {
    fn default() -> Self {
        ExtrapolationQuery {
            law: ScalingLaw::default(),
            distance: 1e-6,
            frequency: 1e4,
            tau: 1.0,
            tau0: 1e-12,
            cantilever: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub quantity: String,
    pub extrapolated: f64,
    pub reported: f64,
    pub units: String,
    /// reported / extrapolated
    pub ratio: f64,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolationReport {
    pub query: ExtrapolationQuery,
    /// V²/m²/Hz at (distance, frequency)
    pub field_noise: f64,
    /// DC fluctuation, or the reason it was not computed.
    pub patch: std::result::Result<PatchStatistics, String>,
    pub cantilever_noise: Option<f64>,
    pub comparisons: Vec<Comparison>,
    pub annotations: Vec<String>,
}

pub fn extrapolate(query: &ExtrapolationQuery, k_b: f64) -> Result<ExtrapolationReport> {
    let field_noise = scale_noise(&query.law, query.distance, query.frequency)?;
    let patch = match patch_statistics(&query.law, query.distance, query.tau, query.tau0) {
        Ok(p) => Ok(p),
        Err(e @ Error::Domain(_)) => Err(e.to_string()),
        Err(e) => return Err(e),
    };
    let consts = comparison_constants();
    let mut comparisons = Vec::new();
    let mut annotations = Vec::new();
    if let Ok(p) = &patch {
        let stat = consts.get(STATIC_FIELD)?;
        comparisons.push(Comparison {
            quantity: "sigma_E (static field)".into(),
            extrapolated: p.sigma_e,
            reported: stat.value,
            units: stat.units.clone(),
            ratio: stat.value / p.sigma_e,
            source: stat.source.clone(),
        });
        if let Some(d_ref) = stat.distance_m {
            if (query.distance / d_ref - 1.0).abs() > 1e-9 {
                annotations.push(format!(
                    "static field value was reported at d = {d_ref:e} m, query distance is {:e} m",
                    query.distance
                ));
            }
        }
        let cp = consts.get(CONTACT_POTENTIAL)?;
        comparisons.push(Comparison {
            quantity: "sigma_V^2 A_patch (contact potential)".into(),
            extrapolated: p.sigma_v2_a,
            reported: cp.value,
            units: cp.units.clone(),
            ratio: cp.value / p.sigma_v2_a,
            source: cp.source.clone(),
        });
    }
    let cantilever_noise = match &query.cantilever {
        Some(cfg) => {
            let s = cantilever_field_noise(cfg, k_b)?;
            let ratio = s / field_noise;
            let verdict = if (0.1..=10.0).contains(&ratio) {
                "within"
            } else {
                "outside"
            };
            annotations.push(format!(
                "cantilever noise is {ratio:.3e} x the scaled trap noise ({verdict} an order of magnitude)"
            ));
            Some(s)
        }
        None => None,
    };
    Ok(ExtrapolationReport {
        query: query.clone(),
        field_noise,
        patch,
        cantilever_noise,
        comparisons,
        annotations,
    })
}

impl ExtrapolationReport {
    /// Plain-text table for terminal output.
    pub fn to_table(&self) -> String {
        let q = &self.query;
        let mut out = String::new();
        let mut line = |k: &str, v: String| out.push_str(&format!("{k:<34} {v}\n"));
        line("distance", format!("{:.4e} m", q.distance));
        line("frequency", format!("{:.4e} Hz", q.frequency));
        line(
            "scaling law",
            format!(
                "{:e} V^2 m^2 * d^-{} * f^-{}",
                q.law.reference, q.law.distance_exponent, q.law.frequency_exponent
            ),
        );
        line("S_E", format!("{:.3e} V^2/m^2/Hz", self.field_noise));
        match &self.patch {
            Ok(p) => {
                line("tau / tau0", format!("{:e} s / {:e} s", q.tau, q.tau0));
                line("sigma_E", format!("{:.3e} V/m", p.sigma_e));
                line("sigma_V^2 A_patch", format!("{:.3e} V^2 m^2", p.sigma_v2_a));
            }
            Err(reason) => line("sigma_E", format!("not computed: {reason}")),
        }
        if let Some(s) = self.cantilever_noise {
            line("cantilever S_E", format!("{s:.3e} V^2/m^2/Hz"));
        }
        for c in &self.comparisons {
            line(
                &c.quantity,
                format!(
                    "reported {:.1e} {} vs extrapolated {:.3e} (ratio {:.2e}; {})",
                    c.reported, c.units, c.extrapolated, c.ratio, c.source
                ),
            );
        }
        for a in &self.annotations {
            out.push_str(&format!("note: {a}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn scaled_noise_examples() {
        let law = ScalingLaw::default();
        assert!(rel(scale_noise(&law, 100e-9, 1e4).unwrap(), 1e3) < 1e-12);
        let room = scale_noise(&law, 75e-6, 1e6).unwrap();
        assert!(rel(room, 1e-21 / (75e-6f64.powi(4) * 1e6)) < 1e-12);
        assert!(rel(room, 3.16e-11) < 0.01);
        let s1 = scale_noise(&law, 1e-5, 1e5).unwrap();
        let s2 = scale_noise(&law, 2e-5, 1e5).unwrap();
        assert!(rel(s1 / s2, 16.0) < 1e-12);
    }

    #[test]
    fn dc_extrapolation() {
        let law = ScalingLaw::default();
        let s = dc_field_fluctuation(&law, 1e-6, 1.0, 1e-12).unwrap();
        assert!((1e1..1e3).contains(&s));
        let e = dc_field_fluctuation(&law, 1e-6, 1e-12 * std::f64::consts::E, 1e-12).unwrap();
        assert!(rel(e * e, 1e-21 / 1e-24) < 1e-12);
        let off = ScalingLaw {
            frequency_exponent: 1.2,
            ..law
        };
        assert!(matches!(dc_field_fluctuation(&off, 1e-6, 1.0, 1e-12), Err(Error::Domain(_))));
        assert!(dc_field_fluctuation(&law, 1e-6, 1e-13, 1e-12).is_err());
    }

    #[test]
    fn patch_product_examples() {
        assert!(rel(patch_product(100.0, 1e-6).unwrap(), 1e-20) < 1e-12);
        assert_eq!(patch_product(0.0, 1e-6).unwrap(), 0.0);
    }

    #[test]
    fn constants_file_loads() {
        let c = comparison_constants();
        assert_eq!(c.get(STATIC_FIELD).unwrap().value, 1e4);
        assert_eq!(c.get(CONTACT_POTENTIAL).unwrap().units, "V^2 m^2");
    }
}
