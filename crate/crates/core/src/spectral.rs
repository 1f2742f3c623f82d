//! Welch power spectral density estimates and `f^-alpha` fits.

use std::f64::consts::PI;
use std::io::{Read, Write};

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dataset::{fmt_f64, read_rows, NoiseDataset};
use crate::ensemble::TelegraphTrace;
use crate::regression::fit_line;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Rectangular,
    #[default]
    Hann,
}

impl Window {
    /// Periodic window coefficients of length `n`.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
                .collect(),
        }
    }
}

/// One-sided PSD on positive frequencies (DC excluded).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdEstimate {
    pub frequencies: Vec<f64>,
    pub psd: Vec<f64>,
    pub segments: usize,
    pub window: Window,
}

impl PsdEstimate {
    pub fn resolution(&self) -> f64 {
        self.frequencies[0]
    }

    /// `Σ psd·Δf`.
    pub fn total_power(&self) -> f64 {
        self.psd.iter().sum::<f64>() * self.resolution()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["frequency_Hz", "psd"])?;
        for (f, p) in self.frequencies.iter().zip(&self.psd) {
            w.write_record([fmt_f64(*f), fmt_f64(*p)])?;
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(())
    }

    /// Reads `frequency_Hz,psd`. Segment count and window are not stored in
    /// the file and come back as 0 / rectangular.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let rows = read_rows(reader, &["frequency_Hz", "psd"])?;
        let (frequencies, psd): (Vec<f64>, Vec<f64>) = rows.into_iter().map(|(_, v)| (v[0], v[1])).unzip();
        if frequencies.is_empty() || frequencies[0] <= 0.0 || frequencies.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Csv("frequencies must be positive and strictly increasing".into()));
        }
        Ok(Self {
            frequencies,
            psd,
            segments: 0,
            window: Window::Rectangular,
        })
    }
}

pub fn estimate_psd(trace: &TelegraphTrace, segment_length: usize, window: Window) -> Result<PsdEstimate> {
    estimate_psd_samples(&trace.values, trace.sample_rate, segment_length, window)
}

/// Averaged modified periodogram over 50 %-overlapping segments.
///
/// The series mean is removed first. Normalisation is one-sided and
/// compensates the window power, so `Σ psd·Δf` equals the variance.
pub fn estimate_psd_samples(
    values: &[f64],
    sample_rate: f64,
    segment_length: usize,
    window: Window,
) -> Result<PsdEstimate> {
    if !(sample_rate.is_finite() && sample_rate > 0.0) {
        return Err(Error::invalid("sample_rate", format!("must be > 0, got {sample_rate}")));
    }
    if segment_length < 2 || !segment_length.is_power_of_two() {
        return Err(Error::invalid(
            "segment_length",
            format!("must be a power of two >= 2, got {segment_length}"),
        ));
    }
    if values.len() < segment_length {
        return Err(Error::InsufficientData {
            needed: segment_length,
            got: values.len(),
        });
    }
    let n = segment_length;
    let hop = n / 2;
    let segments = (values.len() - n) / hop + 1;
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let w = window.coefficients(n);
    let w_power: f64 = w.iter().map(|x| x * x).sum();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);

    let periodograms: Vec<Vec<f64>> = (0..segments)
        .into_par_iter()
        .map(|s| {
            let mut buf: Vec<Complex<f64>> = values[s * hop..s * hop + n]
                .iter()
                .zip(&w)
                .map(|(x, wi)| Complex::new((x - mean) * wi, 0.0))
                .collect();
            fft.process(&mut buf);
            buf[1..=n / 2].iter().map(|c| c.norm_sqr()).collect()
        })
        .collect();

    let mut psd = vec![0.0; n / 2];
    for p in &periodograms {
        for (acc, v) in psd.iter_mut().zip(p) {
            *acc += v;
        }
    }
    let scale = 1.0 / (segments as f64 * sample_rate * w_power);
    for (k, v) in psd.iter_mut().enumerate() {
        // bins 1..n/2-1 fold the negative frequencies in; Nyquist does not
        let fold = if k + 1 == n / 2 { 1.0 } else { 2.0 };
        *v *= fold * scale;
    }
    let df = sample_rate / n as f64;
    Ok(PsdEstimate {
        frequencies: (1..=n / 2).map(|k| k as f64 * df).collect(),
        psd,
        segments,
        window,
    })
}

/// Anything that can be viewed as `(frequency, spectral density)` pairs.
pub trait SpectrumSource {
    fn spectrum_points(&self) -> Vec<(f64, f64)>;
}

impl SpectrumSource for PsdEstimate {
    fn spectrum_points(&self) -> Vec<(f64, f64)> {
        self.frequencies.iter().copied().zip(self.psd.iter().copied()).collect()
    }
}

impl SpectrumSource for NoiseDataset {
    fn spectrum_points(&self) -> Vec<(f64, f64)> {
        self.samples.iter().map(|s| (s.frequency, s.s_e)).collect()
    }
}

impl SpectrumSource for [(f64, f64)] {
    fn spectrum_points(&self) -> Vec<(f64, f64)> {
        self.to_vec()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaFit {
    pub alpha: f64,
    pub alpha_err: f64,
    /// `S(f) ≈ prefactor · f^-alpha` with `f` in Hz.
    pub prefactor: f64,
    pub f_lo: f64,
    pub f_hi: f64,
    pub n_points: usize,
}

impl AlphaFit {
    pub fn evaluate(&self, f: f64) -> f64 {
        self.prefactor * f.powf(-self.alpha)
    }
}

/// Straight line through `(ln f, ln S)` for `f` in `[f_lo, f_hi]`.
pub fn fit_alpha<S: SpectrumSource + ?Sized>(spectrum: &S, band: (f64, f64)) -> Result<AlphaFit> {
    let (f_lo, f_hi) = band;
    if !(f_lo > 0.0 && f_lo < f_hi && f_hi.is_finite()) {
        return Err(Error::invalid("band", format!("need 0 < f_lo < f_hi, got ({f_lo}, {f_hi})")));
    }
    let points: Vec<(f64, f64)> = spectrum
        .spectrum_points()
        .into_iter()
        .filter(|&(f, _)| f >= f_lo && f <= f_hi)
        .collect();
    if points.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: points.len(),
        });
    }
    if let Some(&(f, s)) = points.iter().find(|p| !(p.1 > 0.0)) {
        return Err(Error::Domain(format!("log-domain fit needs S > 0, got S({f}) = {s}")));
    }
    let x: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let line = fit_line(&x, &y, None)?;
    Ok(AlphaFit {
        alpha: -line.slope,
        alpha_err: line.slope_err_residual,
        prefactor: line.intercept.exp(),
        f_lo,
        f_hi,
        n_points: points.len(),
    })
}
