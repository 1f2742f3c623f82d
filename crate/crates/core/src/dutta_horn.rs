//! Analytic evaluation of the activated-fluctuator model.
//!
//! The spectrum at angular frequency `ω` and temperature `T` is
//!
//! ```text
//! S(ω, T) = C ∫ D(E) τ/(1 + ω²τ²) dE,    τ = τ0·exp(E/T)
//! ```
//!
//! The quadrature runs in `u = E/T`, and the Lorentzian factor is evaluated
//! from `ln(ωτ)`. `exp(E/T)` is never formed, because `E/T` reaches several
//! hundred at the ends of the range.
//!
//! Two activation-energy densities are offered:
//!
//! * [`EnergyDensity::PowerLaw`]: `D(E) = E^(β-1)`. The temperature
//!   dependence is a pure `T^β`, and this is the density that
//!   [`crate::ensemble`] samples.
//! * [`EnergyDensity::PowerLawWithFloor`]: `D(E) = E^(β-1) + E0^β/E`
//!   with `E0 = T0·ln(1/(ω_ref τ0))`. The `1/E` part contributes a
//!   temperature-independent floor, so `S(ω_ref, T) ∝ 1 + (T/T0)^β`. The
//!   closed-form exponent [`model_alpha`] describes this density.

use std::f64::consts::PI;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{read_rows, NoiseDataset, NoiseSample};
use crate::quad::{integrate, QuadOptions};
use crate::regression::fit_line;
use crate::{Error, Result};

/// Default `τ0`: an inverse phonon frequency.
pub const DEFAULT_TAU0: f64 = 1e-12;
/// Reference frequency for the floor density and for rescaled data.
pub const REFERENCE_FREQUENCY: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnergyDensity {
    PowerLaw,
    PowerLawWithFloor {
        #[serde(rename = "reference_frequency_Hz")]
        reference_frequency: f64,
    },
}

impl Default for EnergyDensity {
    fn default() -> Self {
        EnergyDensity::PowerLawWithFloor {
            reference_frequency: REFERENCE_FREQUENCY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuttaHornParams {
    pub beta: f64,
    #[serde(rename = "t0_K")]
    pub t0: f64,
    /// Spectrum scale used by [`Normalization::Reference`] helpers.
    #[serde(default = "one")]
    pub s0: f64,
    #[serde(rename = "tau0_s", default = "default_tau0")]
    pub tau0: f64,
    #[serde(rename = "e_min_K", default = "default_e_min")]
    pub e_min: f64,
    #[serde(rename = "e_max_K", default = "default_e_max")]
    pub e_max: f64,
    #[serde(default)]
    pub density: EnergyDensity,
}

fn one() -> f64 {
    1.0
}
fn default_tau0() -> f64 {
    DEFAULT_TAU0
}
fn default_e_min() -> f64 {
    10.0
}
fn default_e_max() -> f64 {
    3000.0
}

impl DuttaHornParams {
    pub fn new(beta: f64, t0: f64) -> Self {
        Self {
            beta,
            t0,
            s0: 1.0,
            tau0: DEFAULT_TAU0,
            e_min: default_e_min(),
            e_max: default_e_max(),
            density: EnergyDensity::default(),
        }
    }

    /// Row III a: β = 3.6, T0 = 46 K, S0 = 167e-15 V²/m²/Hz.
    pub fn trap_iiia() -> Self {
        Self {
            s0: 167e-15,
            ..Self::new(3.6, 46.0)
        }
    }

    pub fn with_density(self, density: EnergyDensity) -> Self {
        Self { density, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be > 0, got {v}")))
            }
        };
        positive("beta", self.beta)?;
        positive("t0_K", self.t0)?;
        positive("tau0_s", self.tau0)?;
        positive("e_min_K", self.e_min)?;
        positive("s0", self.s0)?;
        if !(self.e_max.is_finite() && self.e_max > self.e_min) {
            return Err(Error::invalid("e_max_K", format!("must exceed e_min_K, got {}", self.e_max)));
        }
        if let EnergyDensity::PowerLawWithFloor { reference_frequency } = self.density {
            positive("reference_frequency_Hz", reference_frequency)?;
            if 2.0 * PI * reference_frequency * self.tau0 >= 1.0 {
                return Err(Error::Domain("reference frequency must satisfy ω_ref·τ0 < 1".into()));
            }
        }
        Ok(())
    }

    /// Unnormalised activation-energy density.
    pub fn density_at(&self, energy: f64) -> f64 {
        let power = energy.powf(self.beta - 1.0);
        match self.density {
            EnergyDensity::PowerLaw => power,
            EnergyDensity::PowerLawWithFloor { reference_frequency } => {
                let e0 = self.t0 * -(2.0 * PI * reference_frequency * self.tau0).ln();
                power + e0.powf(self.beta) / energy
            }
        }
    }
}

/// How the constant `C` in front of the integral is fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalization {
    /// `C = 1`.
    Raw,
    /// `C` chosen so that `S(omega, temperature) = value`.
    Reference {
        omega: f64,
        temperature: f64,
        value: f64,
    },
}

fn integral_options() -> QuadOptions {
    QuadOptions {
        rel_tol: 1e-8,
        abs_tol: 0.0,
        max_intervals: 4000,
    }
}

/// `C ∫ D(E) τ/(1+ω²τ²) dE` to relative accuracy 1e-8.
pub fn spectrum_integral(p: &DuttaHornParams, omega: f64, temperature: f64, norm: Normalization) -> Result<f64> {
    spectrum_integral_with(p, omega, temperature, norm, integral_options())
}

pub fn spectrum_integral_with(
    p: &DuttaHornParams,
    omega: f64,
    temperature: f64,
    norm: Normalization,
    opts: QuadOptions,
) -> Result<f64> {
    p.validate()?;
    let raw = raw_integral(p, omega, temperature, opts)?;
    match norm {
        Normalization::Raw => Ok(raw),
        Normalization::Reference {
            omega: omega_ref,
            temperature: t_ref,
            value,
        } => {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid("normalization value", format!("must be > 0, got {value}")));
            }
            let at_ref = raw_integral(p, omega_ref, t_ref, opts)?;
            Ok(raw * value / at_ref)
        }
    }
}

fn raw_integral(p: &DuttaHornParams, omega: f64, temperature: f64, opts: QuadOptions) -> Result<f64> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::invalid("omega", format!("must be > 0, got {omega}")));
    }
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::invalid("temperature", format!("must be > 0, got {temperature}")));
    }
    let ln_omega_tau0 = (omega * p.tau0).ln();
    let integrand = |u: f64| {
        let l = ln_omega_tau0 + u;
        let decay = (-l.abs()).exp();
        let kernel = decay / (omega * (1.0 + decay * decay));
        p.density_at(u * temperature) * kernel * temperature
    };
    // The Lorentzian factor peaks at ωτ = 1; a few widths either side keep
    // the adaptive splitting focused.
    let peak = -ln_omega_tau0;
    let marks = [peak - 8.0, peak - 2.0, peak, peak + 2.0, peak + 8.0];
    let r = integrate(integrand, p.e_min / temperature, p.e_max / temperature, &marks, opts)?;
    Ok(r.value)
}

/// Frequency exponent of the floor density near `ω`:
///
/// `α = 1 - (1/ln(ωτ0))·(β x/(1 + x) - 1)`, `x = (T/T0)^β`.
pub fn model_alpha(p: &DuttaHornParams, omega: f64, temperature: f64) -> Result<f64> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::invalid("temperature", format!("must be > 0, got {temperature}")));
    }
    let ln_wt = (omega * p.tau0).ln();
    if !(ln_wt < 0.0 && ln_wt.is_finite()) {
        return Err(Error::Domain(format!(
            "ω·τ0 = {:e} must lie in (0, 1) for the activated-process exponent",
            omega * p.tau0
        )));
    }
    let x = (temperature / p.t0).powf(p.beta);
    let activation = if x.is_infinite() { p.beta } else { p.beta * x / (1.0 + x) };
    Ok(1.0 - (activation - 1.0) / ln_wt)
}

/// `T1 = T0 / (β - 1)^(1/β)`, where [`model_alpha`] crosses 1.
pub fn crossover_temperature(p: &DuttaHornParams) -> Result<f64> {
    if !(p.beta > 1.0) {
        return Err(Error::NoCrossover { beta: p.beta });
    }
    Ok(p.t0 / (p.beta - 1.0).powf(1.0 / p.beta))
}

/// Tabulated resistivity, linearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct ResistivityCurve {
    samples: Vec<(f64, f64)>,
}

impl ResistivityCurve {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: samples.len(),
            });
        }
        if samples.iter().any(|&(t, rho)| !(t > 0.0 && rho > 0.0 && t.is_finite() && rho.is_finite())) {
            return Err(Error::invalid("resistivity curve", "temperatures and resistivities must be positive"));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid("resistivity curve", "temperatures must be strictly increasing"));
        }
        Ok(Self { samples })
    }

    /// CSV with header `temperature_K,rho_ohm_m`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let rows = read_rows(reader, &["temperature_K", "rho_ohm_m"])?;
        Self::new(rows.into_iter().map(|(_, v)| (v[0], v[1])).collect())
    }

    pub fn read_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read_csv(file)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.samples[0].0, self.samples[self.samples.len() - 1].0)
    }

    pub fn resistivity(&self, temperature: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        if !(temperature >= lo && temperature <= hi) {
            return Err(Error::OutOfRange {
                value: temperature,
                lo,
                hi,
            });
        }
        let i = self.samples.partition_point(|s| s.0 <= temperature).clamp(1, self.samples.len() - 1);
        let (t0, r0) = self.samples[i - 1];
        let (t1, r1) = self.samples[i];
        Ok(r0 + (r1 - r0) * (temperature - t0) / (t1 - t0))
    }
}

/// Shape of a Johnson-type (`ρ·T`) noise model on `grid`, normalised to 1 at
/// the smallest grid temperature.
pub fn johnson_prediction(rho: &ResistivityCurve, grid: &[f64]) -> Result<NoiseDataset> {
    let t_min = grid
        .iter()
        .copied()
        .min_by(f64::total_cmp)
        .ok_or(Error::InsufficientData { needed: 1, got: 0 })?;
    let norm = rho.resistivity(t_min)? * t_min;
    let samples = grid
        .iter()
        .map(|&t| Ok(NoiseSample::new(t, REFERENCE_FREQUENCY, rho.resistivity(t)? * t / norm, 0.0)))
        .collect::<Result<Vec<_>>>()?;
    NoiseDataset::new("johnson", samples)
}

/// Least-squares slope of `ln S` against `ln T`.
pub fn temperature_exponent(data: &NoiseDataset) -> Result<f64> {
    let x: Vec<f64> = data.samples.iter().map(|s| s.temperature.ln()).collect();
    let y = data
        .samples
        .iter()
        .map(|s| {
            if s.s_e > 0.0 {
                Ok(s.s_e.ln())
            } else {
                Err(Error::Domain("log-log slope needs positive spectral values".into()))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(fit_line(&x, &y, None)?.slope)
}
