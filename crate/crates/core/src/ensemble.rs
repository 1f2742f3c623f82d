//! Monte-Carlo populations of thermally activated two-state fluctuators.
//!
//! Activation energies follow `D(E) ∝ E^(β-1)` on `[e_min, e_max]` and are
//! stored in kelvin. A fluctuator with energy `E` at temperature `T`
//! switches on the timescale `τ = τ0·exp(E/T)`; its one-sided spectrum is the
//! Lorentzian `4a²τ / (1 + (2πfτ)²)`, which integrates to `a²`.

use std::f64::consts::PI;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{fmt_f64, read_rows, NoiseDataset, NoiseSample};
use crate::rng::{self, domain};
use crate::{Error, Result};

/// Upper bound on switching times before they are reported as saturated.
pub const MAX_SWITCHING_TIME: f64 = 1e30;

/// Default cap on the number of samples in a telegraph trace.
pub const DEFAULT_MAX_TRACE_SAMPLES: u64 = 1 << 25;

/// Fluctuators are summed in fixed chunks of this size so that the
/// reduction order does not depend on the thread pool.
const CHUNK: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub beta: f64,
    #[serde(rename = "e_min_K", default = "default_e_min")]
    pub e_min: f64,
    #[serde(rename = "e_max_K", default = "default_e_max")]
    pub e_max: f64,
    #[serde(rename = "tau0_s", default = "default_tau0")]
    pub tau0: f64,
    #[serde(rename = "n")]
    pub n_fluctuators: usize,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_e_min() -> f64 {
    10.0
}
fn default_e_max() -> f64 {
    3000.0
}
fn default_tau0() -> f64 {
    1e-12
}
fn default_amplitude() -> f64 {
    1.0
}

impl EnsembleConfig {
    pub fn new(beta: f64, n_fluctuators: usize, seed: u64) -> Self {
        Self {
            beta,
            e_min: default_e_min(),
            e_max: default_e_max(),
            tau0: default_tau0(),
            n_fluctuators,
            amplitude: default_amplitude(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::invalid("beta", format!("must be > 0, got {}", self.beta)));
        }
        if !(self.e_min.is_finite() && self.e_min > 0.0) {
            return Err(Error::invalid("e_min_K", format!("must be > 0, got {}", self.e_min)));
        }
        if !(self.e_max.is_finite() && self.e_max > self.e_min) {
            return Err(Error::invalid(
                "e_max_K",
                format!("must exceed e_min_K = {}, got {}", self.e_min, self.e_max),
            ));
        }
        if !(self.tau0.is_finite() && self.tau0 > 0.0) {
            return Err(Error::invalid("tau0_s", format!("must be > 0, got {}", self.tau0)));
        }
        if self.n_fluctuators == 0 {
            return Err(Error::invalid("n", "need at least one fluctuator"));
        }
        if !(self.amplitude.is_finite() && self.amplitude > 0.0) {
            return Err(Error::invalid("amplitude", format!("must be > 0, got {}", self.amplitude)));
        }
        Ok(())
    }
}

/// Immutable sampled population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluctuatorEnsemble {
    energies: Vec<f64>,
    amplitudes: Vec<f64>,
    tau0: f64,
}

impl FluctuatorEnsemble {
    pub fn from_parts(energies: Vec<f64>, amplitudes: Vec<f64>, tau0: f64) -> Result<Self> {
        if energies.len() != amplitudes.len() || energies.is_empty() {
            return Err(Error::invalid("ensemble", "energies and amplitudes must be non-empty and of equal length"));
        }
        if energies.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::invalid("ensemble", "energies must be finite and non-negative"));
        }
        if amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid("ensemble", "amplitudes must be finite"));
        }
        if !(tau0.is_finite() && tau0 > 0.0) {
            return Err(Error::invalid("tau0_s", format!("must be > 0, got {tau0}")));
        }
        Ok(Self {
            energies,
            amplitudes,
            tau0,
        })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Copy with every amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            energies: self.energies.clone(),
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
            tau0: self.tau0,
        }
    }

    /// Rescales amplitudes so that the spectrum at `(temperature, frequency)`
    /// equals `target`. The model fixes only the shape; this maps it onto a
    /// measured `S0` at a reference point.
    pub fn calibrated(&self, temperature: f64, frequency: f64, target: f64) -> Result<Self> {
        if !(target.is_finite() && target > 0.0) {
            return Err(Error::invalid("calibration target", format!("must be > 0, got {target}")));
        }
        let current = ensemble_spectrum(self, temperature, &[frequency])?[0];
        if !(current > 0.0) {
            return Err(Error::Domain(format!(
                "ensemble spectrum vanishes at T = {temperature} K, f = {frequency} Hz"
            )));
        }
        Ok(self.scaled((target / current).sqrt()))
    }
}

/// Draws energies by inverse CDF, one ChaCha stream per fluctuator.
pub fn sample_ensemble(cfg: &EnsembleConfig) -> Result<FluctuatorEnsemble> {
    cfg.validate()?;
    let ratio = libm::pow(cfg.e_min / cfg.e_max, cfg.beta);
    let inv_beta = 1.0 / cfg.beta;
    let energies: Vec<f64> = (0..cfg.n_fluctuators)
        .into_par_iter()
        .map(|i| {
            let u = rng::uniform(&mut rng::stream(cfg.seed, domain::ENERGIES, i as u64));
            // (e_min^β + u (e_max^β - e_min^β))^(1/β), scaled by e_max
            let e = cfg.e_max * libm::pow(ratio + u * (1.0 - ratio), inv_beta);
            e.clamp(cfg.e_min, cfg.e_max)
        })
        .collect();
    Ok(FluctuatorEnsemble {
        amplitudes: vec![cfg.amplitude; energies.len()],
        energies,
        tau0: cfg.tau0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchingTime {
    /// s
    pub tau: f64,
    /// Set when `tau0·exp(E/T)` exceeded [`MAX_SWITCHING_TIME`].
    pub saturated: bool,
}

/// `τ = τ0·exp(E/T)` with energies in kelvin.
pub fn switching_time(energy: f64, temperature: f64, tau0: f64) -> Result<SwitchingTime> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::invalid("temperature", format!("must be > 0, got {temperature}")));
    }
    let ln_tau = libm::log(tau0) + energy / temperature;
    if ln_tau >= libm::log(MAX_SWITCHING_TIME) {
        return Ok(SwitchingTime {
            tau: MAX_SWITCHING_TIME,
            saturated: true,
        });
    }
    Ok(SwitchingTime {
        tau: tau0 * libm::exp(energy / temperature),
        saturated: false,
    })
}

/// One-sided spectrum `Σ 4aᵢ²τᵢ/(1 + (2πfτᵢ)²)` at each frequency.
///
/// The Lorentzian is evaluated as `1/(ω²τ + 1/τ)`: no overflow for huge τ
/// (the term is then 0) and every operation is monotone in ω, so the
/// result never increases with frequency even under rounding. Each
/// frequency is reduced sequentially in fluctuator order.
pub fn ensemble_spectrum(ens: &FluctuatorEnsemble, temperature: f64, frequencies: &[f64]) -> Result<Vec<f64>> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::invalid("temperature", format!("must be > 0, got {temperature}")));
    }
    if let Some(f) = frequencies.iter().find(|f| !(f.is_finite() && **f > 0.0)) {
        return Err(Error::invalid("frequency", format!("must be > 0, got {f}")));
    }
    let ln_tau0 = libm::log(ens.tau0);
    let inv_t = 1.0 / temperature;
    let terms: Vec<(f64, f64, f64)> = ens
        .energies
        .iter()
        .zip(&ens.amplitudes)
        .map(|(&e, &a)| {
            let ln_tau = ln_tau0 + e * inv_t;
            (4.0 * a * a, libm::exp(ln_tau), libm::exp(-ln_tau))
        })
        .collect();
    Ok(frequencies
        .par_iter()
        .map(|&f| {
            let omega = 2.0 * PI * f;
            let w2 = omega * omega;
            terms.iter().map(|&(weight, tau, inv_tau)| weight / (w2 * tau + inv_tau)).sum()
        })
        .collect())
}

/// Spectra on a `(T, f)` grid as a `NoiseDataset` (zero uncertainties).
pub fn ensemble_dataset(
    ens: &FluctuatorEnsemble,
    label: &str,
    temperatures: &[f64],
    frequencies: &[f64],
) -> Result<NoiseDataset> {
    let mut samples = Vec::with_capacity(temperatures.len() * frequencies.len());
    for &t in temperatures {
        let s = ensemble_spectrum(ens, t, frequencies)?;
        samples.extend(frequencies.iter().zip(s).map(|(&f, s)| NoiseSample::new(t, f, s, 0.0)));
    }
    NoiseDataset::new(label, samples)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TelegraphTrace {
    /// Hz
    pub sample_rate: f64,
    pub values: Vec<f64>,
    pub seed: u64,
}

impl TelegraphTrace {
    pub fn duration(&self) -> f64 {
        self.values.len() as f64 / self.sample_rate
    }

    /// CSV with header `time_s,value`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["time_s", "value"])?;
        for (k, v) in self.values.iter().enumerate() {
            w.write_record([fmt_f64(k as f64 / self.sample_rate), fmt_f64(*v)])?;
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(())
    }

    /// Reads `time_s,value`; the sample rate is inferred from the first two
    /// timestamps and the grid must be uniform.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let rows = read_rows(reader, &["time_s", "value"])?;
        if rows.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: rows.len(),
            });
        }
        let dt = rows[1].1[0] - rows[0].1[0];
        if !(dt > 0.0) {
            return Err(Error::Csv("time_s must be strictly increasing".into()));
        }
        for (i, (line, v)) in rows.iter().enumerate() {
            let expected = rows[0].1[0] + i as f64 * dt;
            if (v[0] - expected).abs() > 1e-6 * dt.max(expected.abs() * 1e-9) + 1e-9 * dt {
                return Err(Error::Csv(format!("line {line}: time_s is not on a uniform grid")));
            }
            if !v[1].is_finite() {
                return Err(Error::Csv(format!("line {line}: value must be finite")));
            }
        }
        Ok(Self {
            sample_rate: 1.0 / dt,
            values: rows.into_iter().map(|(_, v)| v[1]).collect(),
            seed: 0,
        })
    }
}

/// Simulates the summed telegraph signal `Σ aᵢ·sᵢ(t)`, `sᵢ = ±1`.
///
/// Each fluctuator is a symmetric two-state Markov chain leaving either
/// state at rate `1/(2τᵢ)`, started from its stationary distribution. Slow
/// fluctuators are advanced by exact exponential waiting times; fluctuators
/// expected to flip many times per sample are advanced with the exact
/// grid transition probability `(1 - exp(-Δt/τ))/2`, which has the same
/// distribution on the sampling grid.
pub fn telegraph_trace(
    ens: &FluctuatorEnsemble,
    temperature: f64,
    sample_rate: f64,
    duration: f64,
    seed: u64,
) -> Result<TelegraphTrace> {
    telegraph_trace_capped(ens, temperature, sample_rate, duration, seed, DEFAULT_MAX_TRACE_SAMPLES)
}

pub fn telegraph_trace_capped(
    ens: &FluctuatorEnsemble,
    temperature: f64,
    sample_rate: f64,
    duration: f64,
    seed: u64,
    max_samples: u64,
) -> Result<TelegraphTrace> {
    if !(sample_rate.is_finite() && sample_rate > 0.0) {
        return Err(Error::invalid("sample_rate", format!("must be > 0, got {sample_rate}")));
    }
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::invalid("duration", format!("must be > 0, got {duration}")));
    }
    let requested = (duration * sample_rate).floor();
    if requested > max_samples as f64 {
        return Err(Error::ResourceLimit {
            requested: requested.min(u64::MAX as f64) as u64,
            cap: max_samples,
        });
    }
    let n = requested as usize;
    if n < 2 {
        return Err(Error::invalid("duration", "trace must contain at least two samples"));
    }
    let taus = ens
        .energies
        .iter()
        .map(|&e| switching_time(e, temperature, ens.tau0).map(|s| s.tau))
        .collect::<Result<Vec<_>>>()?;
    let dt = 1.0 / sample_rate;

    let mut total = vec![0.0; n];
    let chunk_ids: Vec<usize> = (0..ens.len().div_ceil(CHUNK)).collect();
    let batch = rayon::current_num_threads().max(1) * 2;
    for ids in chunk_ids.chunks(batch) {
        let partials: Vec<Vec<f64>> = ids
            .par_iter()
            .map(|&c| {
                let mut acc = vec![0.0; n];
                let hi = ((c + 1) * CHUNK).min(ens.len());
                for i in c * CHUNK..hi {
                    add_fluctuator(&mut acc, ens.amplitudes[i], taus[i], dt, seed, i as u64);
                }
                acc
            })
            .collect();
        for p in partials {
            for (t, v) in total.iter_mut().zip(p) {
                *t += v;
            }
        }
    }
    Ok(TelegraphTrace {
        sample_rate,
        values: total,
        seed,
    })
}

fn add_fluctuator(acc: &mut [f64], amplitude: f64, tau: f64, dt: f64, seed: u64, index: u64) {
    let mut rng = rng::stream(seed, domain::TELEGRAPH, index);
    let mut state = if rng::uniform(&mut rng) < 0.5 { 1.0 } else { -1.0 };
    let mean_wait = 2.0 * tau;
    if dt / mean_wait < 8.0 {
        let mut next_flip = rng::exponential(&mut rng, mean_wait);
        for (k, slot) in acc.iter_mut().enumerate() {
            let t = k as f64 * dt;
            while next_flip <= t {
                state = -state;
                next_flip += rng::exponential(&mut rng, mean_wait);
            }
            *slot += amplitude * state;
        }
    } else {
        let p_flip = 0.5 * (1.0 - libm::exp(-dt / tau));
        for (k, slot) in acc.iter_mut().enumerate() {
            if k > 0 && rng::uniform(&mut rng) < p_flip {
                state = -state;
            }
            *slot += amplitude * state;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(energy: f64, amplitude: f64) -> FluctuatorEnsemble {
        FluctuatorEnsemble::from_parts(vec![energy], vec![amplitude], 1e-12).unwrap()
    }

    #[test]
    fn config_validation() {
        let mut cfg = EnsembleConfig::new(3.6, 10, 1);
        assert!(cfg.validate().is_ok());
        cfg.e_max = 5.0;
        assert!(matches!(cfg.validate(), Err(Error::InvalidInput { field: "e_max_K", .. })));
        let mut cfg = EnsembleConfig::new(3.6, 0, 1);
        assert!(cfg.validate().is_err());
        cfg.n_fluctuators = 1;
        cfg.tau0 = -1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_json_keys() {
        let cfg: EnsembleConfig = serde_json::from_str(
            r#"{"beta": 2.0, "e_min_K": 5, "e_max_K": 500, "tau0_s": 1e-12, "n": 3, "amplitude": 0.5, "seed": 9}"#,
        )
        .unwrap();
        assert_eq!(cfg.n_fluctuators, 3);
        assert_eq!(cfg.e_max, 500.0);
        let back: EnsembleConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn energies_in_range_and_deterministic() {
        let cfg = EnsembleConfig::new(3.6, 5000, 42);
        let a = sample_ensemble(&cfg).unwrap();
        let b = sample_ensemble(&cfg).unwrap();
        assert!(a.energies().iter().zip(b.energies()).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert!(a.energies().iter().all(|&e| (10.0..=3000.0).contains(&e)));
        let c = sample_ensemble(&EnsembleConfig::new(3.6, 5000, 43)).unwrap();
        assert_ne!(a.energies(), c.energies());
    }

    #[test]
    fn uniform_density_mean() {
        let mut cfg = EnsembleConfig::new(1.0, 200_000, 3);
        cfg.e_min = 20.0;
        cfg.e_max = 220.0;
        let ens = sample_ensemble(&cfg).unwrap();
        let mean = ens.energies().iter().sum::<f64>() / ens.len() as f64;
        // σ/√n = (200/√12)/√2e5 ≈ 0.13
        assert!((mean - 120.0).abs() < 0.6, "{mean}");
    }

    #[test]
    fn switching_time_examples() {
        assert_eq!(switching_time(0.0, 50.0, 1e-12).unwrap().tau, 1e-12);
        let t = switching_time(50.0, 50.0, 1e-12).unwrap().tau;
        assert!((t / (1e-12 * std::f64::consts::E) - 1.0).abs() < 1e-14);
        let t = switching_time(1200.0, 100.0, 1e-12).unwrap();
        assert!((t.tau / 1.627_547_914e-7 - 1.0).abs() < 1e-9 && !t.saturated);
        let omega_tau = 2.0 * PI * 1e6 * t.tau;
        assert!((omega_tau.ln()).abs() < 0.05, "{omega_tau}");
        let sat = switching_time(3000.0, 7.0, 1e-12).unwrap();
        assert!(sat.saturated && sat.tau == MAX_SWITCHING_TIME);
        assert!(switching_time(1.0, 0.0, 1e-12).is_err());
    }

    #[test]
    fn single_lorentzian_half_power() {
        let ens = single(600.0, 1.0);
        let tau = switching_time(600.0, 50.0, 1e-12).unwrap().tau;
        let s = ensemble_spectrum(&ens, 50.0, &[1e-6 / tau, 1.0 / (2.0 * PI * tau)]).unwrap();
        assert!((s[0] / s[1] - 2.0).abs() < 1e-6);
        assert!((s[0] / (4.0 * tau) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn kernel_survives_extreme_energies() {
        let ens = FluctuatorEnsemble::from_parts(vec![0.0, 3000.0], vec![1.0, 1.0], 1e-12).unwrap();
        let s = ensemble_spectrum(&ens, 7.0, &[1e6]).unwrap()[0];
        assert!(s.is_finite() && s > 0.0);
    }

    #[test]
    fn calibration_hits_target() {
        let ens = sample_ensemble(&EnsembleConfig::new(3.6, 2000, 5)).unwrap();
        let cal = ens.calibrated(46.0, 1e6, 1.67e-13).unwrap();
        let s = ensemble_spectrum(&cal, 46.0, &[1e6]).unwrap()[0];
        assert!((s / 1.67e-13 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_fluctuator_trace_is_two_valued() {
        let ens = single(900.0, 0.7);
        let trace = telegraph_trace(&ens, 60.0, 1e7, 1e-3, 11).unwrap();
        assert_eq!(trace.values.len(), 10_000);
        assert!(trace.values.iter().all(|&v| v == 0.7 || v == -0.7));
    }

    #[test]
    fn trace_respects_cap() {
        let ens = single(900.0, 1.0);
        let err = telegraph_trace_capped(&ens, 60.0, 1e6, 10.0, 1, 1000).unwrap_err();
        assert!(matches!(err, Error::ResourceLimit { requested: 10_000_000, cap: 1000 }));
    }

    #[test]
    fn trace_csv_round_trip() {
        let ens = single(900.0, 1.0);
        let trace = telegraph_trace(&ens, 60.0, 1e3, 0.01, 2).unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let back = TelegraphTrace::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.values, trace.values);
        assert!((back.sample_rate / 1e3 - 1.0).abs() < 1e-12);
    }
}
