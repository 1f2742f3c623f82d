//! Seeded generators for datasets with known ground truth.
//!
//! Noise is multiplicative Gaussian: `S = S_true (1 + noise · z)` with the
//! reported uncertainty `noise · S_true`.

use crate::fitting::TempModel;
use crate::physics::{SidebandPoint, SidebandSeries};
use crate::reference::ReferenceRow;
use crate::{rng, Error, NoiseDataset, NoiseSample, Result};

/// Relative noise of the bundled datasets.
pub const DEFAULT_NOISE: f64 = 0.05;
/// Seed of the bundled datasets.
pub const DEFAULT_SEED: u64 = 20080101;

/// Parameters `[S0, S_T, T0]` of the bundled Arrhenius dataset.
pub const ANOMALY_PARAMS: [f64; 3] = [4.2e-12, 4.2e-11, 40.0];
/// Trap frequencies the anomaly samples alternate between.
pub const ANOMALY_FREQUENCIES: [f64; 2] = [0.86e6, 1.23e6];

/// Twelve evenly spaced temperatures from 7 K to 100 K.
pub fn temperature_grid() -> Vec<f64> {
    linear_grid(7.0, 100.0, 12)
}

pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Samples `model` at `temps` (all at `frequency`) with relative noise.
pub fn model_dataset(
    label: &str,
    model: TempModel,
    params: [f64; 3],
    temps: &[f64],
    frequency: f64,
    noise: f64,
    seed: u64,
) -> Result<NoiseDataset> {
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::invalid("noise", format!("must be non-negative, got {noise}")));
    }
    let samples = temps
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let truth = model.evaluate(&params, t);
            let mut g = rng::stream(seed, rng::domain::SYNTHETIC, i as u64);
            let z = rng::standard_normal(&mut g);
            NoiseSample::new(t, frequency, truth * (1.0 + noise * z), noise * truth)
        })
        .collect();
    NoiseDataset::new(label, samples)
}

/// Temperature-scaling data for a reference row on the default grid at 1 MHz.
pub fn reference_dataset(row: &ReferenceRow, noise: f64, seed: u64) -> Result<NoiseDataset> {
    model_dataset(
        &row.label,
        TempModel::TempScaling,
        row.params_si(),
        &temperature_grid(),
        1e6,
        noise,
        seed,
    )
}

/// The bundled temperature-scaling datasets: every reference row with
/// [`DEFAULT_NOISE`], row `i` seeded with `DEFAULT_SEED + i`.
pub fn bundled_reference_datasets() -> Result<Vec<NoiseDataset>> {
    crate::reference::load_reference_table()
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| reference_dataset(row, DEFAULT_NOISE, DEFAULT_SEED + i as u64))
        .collect()
}

/// Arrhenius data measured at two trap frequencies, each sample carrying
/// its own `1/f` level. Rescale to 1 MHz before fitting.
pub fn anomaly_dataset(noise: f64, seed: u64) -> Result<NoiseDataset> {
    let at_1mhz = model_dataset(
        "anomaly",
        TempModel::Arrhenius,
        ANOMALY_PARAMS,
        &temperature_grid(),
        1e6,
        noise,
        seed,
    )?;
    let samples = at_1mhz
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let f = ANOMALY_FREQUENCIES[i % 2];
            let k = 1e6 / f;
            NoiseSample::new(s.temperature, f, s.s_e * k, s.s_e_err * k)
        })
        .collect();
    NoiseDataset::new("anomaly", samples)
}

/// Sideband populations for a linearly heated ion,
/// `n(t) = n0 + n_dot·t`, using `P_bsb = c (n+1)/(2n+1)` and
/// `P_rsb = c n/(2n+1)` with contrast `c = 0.8`, observed through
/// `trials` Bernoulli shots per point.
pub fn sideband_series(
    n_dot: f64,
    n0: f64,
    delays: &[f64],
    trials: u32,
    trap_frequency: f64,
    seed: u64,
) -> Result<SidebandSeries> {
    const CONTRAST: f64 = 0.8;
    if trials == 0 {
        return Err(Error::invalid("trials", "must be at least 1"));
    }
    let points = delays
        .iter()
        .enumerate()
        .map(|(i, &delay)| {
            let n = n0 + n_dot * delay;
            let p_bsb = CONTRAST * (n + 1.0) / (2.0 * n + 1.0);
            let p_rsb = CONTRAST * n / (2.0 * n + 1.0);
            let mut g = rng::stream(seed, rng::domain::SYNTHETIC, i as u64);
            let mut shots = |p: f64| {
                (0..trials).filter(|_| rng::uniform(&mut g) < p).count() as f64 / trials as f64
            };
            let p_bsb = shots(p_bsb);
            let p_rsb = shots(p_rsb);
            SidebandPoint {
                delay,
                p_bsb,
                p_rsb,
                trials,
            }
        })
        .collect();
    SidebandSeries::new(points, trap_frequency)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::load_reference_table;

    #[test]
    fn noiseless_dataset_is_exact() {
        let row = load_reference_table().row("II").unwrap().clone();
        let d = reference_dataset(&row, 0.0, 1).unwrap();
        assert_eq!(d.len(), 12);
        let s = &d.samples[0];
        assert_eq!(s.s_e, TempModel::TempScaling.evaluate(&row.params_si(), 7.0));
    }

    #[test]
    fn seeded_and_reproducible() {
        let a = anomaly_dataset(DEFAULT_NOISE, 5).unwrap();
        let b = anomaly_dataset(DEFAULT_NOISE, 5).unwrap();
        let c = anomaly_dataset(DEFAULT_NOISE, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.samples[1].frequency, 1.23e6);
    }

    #[test]
    fn sideband_populations_encode_n() {
        let s = sideband_series(100.0, 0.5, &[0.0, 0.01], 1_000_000, 1e6, 3).unwrap();
        let (n, _) = s.points[1].phonon_number().unwrap();
        assert!((n - 1.5).abs() < 0.05, "{n}");
    }
}
