//! Sideband thermometry, heating rates and the heating-rate to field-noise
//! conversion.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalContext;
use crate::regression::fit_line;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidebandPoint {
    /// Delay between sideband cooling and the probe, s.
    pub delay: f64,
    pub p_bsb: f64,
    pub p_rsb: f64,
    pub trials: u32,
}

impl SidebandPoint {
    pub fn validate(&self) -> Result<()> {
        if !(self.delay.is_finite() && self.delay >= 0.0) {
            return Err(Error::invalid("delay_s", format!("must be >= 0, got {}", self.delay)));
        }
        for (name, p) in [("P_bsb", self.p_bsb), ("P_rsb", self.p_rsb)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid("probability", format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        Ok(())
    }

    /// Phonon number and its binomially propagated standard error.
    pub fn phonon_number(&self) -> Result<(f64, f64)> {
        phonon_number_with_error(self.p_bsb, self.p_rsb, self.trials)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidebandSeries {
    pub points: Vec<SidebandPoint>,
    /// Hz
    pub trap_frequency: f64,
}

impl SidebandSeries {
    pub fn new(points: Vec<SidebandPoint>, trap_frequency: f64) -> Result<Self> {
        if !(trap_frequency.is_finite() && trap_frequency > 0.0) {
            return Err(Error::invalid("trap frequency", format!("must be > 0, got {trap_frequency}")));
        }
        for p in &points {
            p.validate()?;
        }
        if points.windows(2).any(|w| w[1].delay <= w[0].delay) {
            return Err(Error::invalid("delay_s", "delays must be strictly increasing"));
        }
        Ok(Self {
            points,
            trap_frequency,
        })
    }
}

/// Mean phonon number `n = P_rsb / (P_bsb - P_rsb)`.
pub fn phonon_number(p_bsb: f64, p_rsb: f64) -> Result<f64> {
    for p in [p_bsb, p_rsb] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid("probability", format!("must lie in [0, 1], got {p}")));
        }
    }
    if p_bsb <= p_rsb {
        return Err(Error::DegenerateThermometry { p_bsb, p_rsb });
    }
    Ok(p_rsb / (p_bsb - p_rsb))
}

/// Binomial standard error `sqrt(p(1-p)/N)`, floored at `1/(2N)`.
pub fn binomial_error(p: f64, trials: u32) -> f64 {
    let n = trials as f64;
    (p * (1.0 - p) / n).sqrt().max(0.5 / n)
}

pub fn phonon_number_with_error(p_bsb: f64, p_rsb: f64, trials: u32) -> Result<(f64, f64)> {
    let n = phonon_number(p_bsb, p_rsb)?;
    let d = p_bsb - p_rsb;
    // dn/dP_rsb = P_bsb/d², dn/dP_bsb = -P_rsb/d²
    let s_r = binomial_error(p_rsb, trials);
    let s_b = binomial_error(p_bsb, trials);
    let err = (p_bsb * s_r).hypot(p_rsb * s_b) / (d * d);
    Ok((n, err))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatingRate {
    /// quanta/s
    pub n_dot: f64,
    /// quanta/s
    pub n_dot_err: f64,
    /// Fitted phonon number at zero delay.
    pub n_initial: f64,
    pub points_used: usize,
}

/// Weighted least-squares slope of `n` against delay.
///
/// Every point must be valid thermometry; see
/// [`heating_rate_skipping_degenerate`] for the lenient variant.
pub fn heating_rate(series: &SidebandSeries) -> Result<HeatingRate> {
    let mut rows = Vec::with_capacity(series.points.len());
    for p in &series.points {
        let (n, err) = p.phonon_number()?;
        rows.push((p.delay, n, err));
    }
    fit_rows(&rows)
}

/// Like [`heating_rate`] but drops rows with `P_bsb <= P_rsb`, returning
/// the indices that were skipped.
pub fn heating_rate_skipping_degenerate(series: &SidebandSeries) -> Result<(HeatingRate, Vec<usize>)> {
    let mut rows = Vec::with_capacity(series.points.len());
    let mut skipped = Vec::new();
    for (i, p) in series.points.iter().enumerate() {
        match p.phonon_number() {
            Ok((n, err)) => rows.push((p.delay, n, err)),
            Err(Error::DegenerateThermometry { .. }) => skipped.push(i),
            Err(e) => return Err(e),
        }
    }
    Ok((fit_rows(&rows)?, skipped))
}

fn fit_rows(rows: &[(f64, f64, f64)]) -> Result<HeatingRate> {
    if rows.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: rows.len(),
        });
    }
    let x: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let w: Vec<f64> = rows.iter().map(|r| 1.0 / (r.2 * r.2)).collect();
    let line = fit_line(&x, &y, Some(&w))?;
    Ok(HeatingRate {
        n_dot: line.slope,
        n_dot_err: line.slope_err,
        n_initial: line.intercept,
        points_used: rows.len(),
    })
}

/// `S_E(f) = 4 m ħ (2π f) ṅ / q²` in V²/m²/Hz.
pub fn field_noise_from_heating(n_dot: f64, f: f64, ctx: &PhysicalContext) -> Result<f64> {
    if !(f.is_finite() && f > 0.0) {
        return Err(Error::invalid("trap frequency", format!("must be > 0, got {f}")));
    }
    if !(n_dot.is_finite() && n_dot >= 0.0) {
        return Err(Error::invalid("heating rate", format!("must be >= 0, got {n_dot}")));
    }
    ctx.validate()?;
    Ok(4.0 * ctx.ion_mass * ctx.hbar * (2.0 * PI * f) * n_dot / (ctx.ion_charge * ctx.ion_charge))
}

/// Rescales a spectral density measured at `f_from` to `f_to` assuming `1/f`.
pub fn rescale_frequency(s_e: f64, f_from: f64, f_to: f64) -> Result<f64> {
    rescale_frequency_with(s_e, f_from, f_to, 1.0)
}

/// Rescales assuming `S ∝ f^-exponent`.
pub fn rescale_frequency_with(s_e: f64, f_from: f64, f_to: f64, exponent: f64) -> Result<f64> {
    for f in [f_from, f_to] {
        if !(f.is_finite() && f > 0.0) {
            return Err(Error::invalid("frequency", format!("must be > 0, got {f}")));
        }
    }
    if f_from == f_to {
        return Ok(s_e);
    }
    Ok(s_e * libm::pow(f_from / f_to, exponent))
}
