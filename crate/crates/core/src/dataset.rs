//! `NoiseDataset` and the CSV schemas shared by the command-line tools.
//!
//! Floats are written in Rust's shortest round-trip exponent form so that
//! reading and re-writing a canonical file reproduces it byte for byte.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::physics::{SidebandPoint, SidebandSeries};
use crate::{Error, Result};

pub const NOISE_HEADER: [&str; 4] = [
    "temperature_K",
    "frequency_Hz",
    "SE_V2m2Hz",
    "SE_err_V2m2Hz",
];
pub const SIDEBAND_HEADER: [&str; 4] = ["delay_s", "P_bsb", "P_rsb", "trials"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSample {
    /// K
    pub temperature: f64,
    /// Hz
    pub frequency: f64,
    /// V²/m²/Hz
    pub s_e: f64,
    /// V²/m²/Hz
    pub s_e_err: f64,
}

impl NoiseSample {
    pub fn new(temperature: f64, frequency: f64, s_e: f64, s_e_err: f64) -> Self {
        Self {
            temperature,
            frequency,
            s_e,
            s_e_err,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(Error::invalid("temperature_K", format!("must be > 0, got {}", self.temperature)));
        }
        if !(self.frequency.is_finite() && self.frequency > 0.0) {
            return Err(Error::invalid("frequency_Hz", format!("must be > 0, got {}", self.frequency)));
        }
        if !(self.s_e.is_finite() && self.s_e >= 0.0) {
            return Err(Error::invalid("SE_V2m2Hz", format!("must be >= 0, got {}", self.s_e)));
        }
        if !(self.s_e_err.is_finite() && self.s_e_err >= 0.0) {
            return Err(Error::invalid("SE_err_V2m2Hz", format!("must be >= 0, got {}", self.s_e_err)));
        }
        Ok(())
    }
}

/// Labelled collection of field-noise samples.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseDataset {
    pub label: String,
    pub samples: Vec<NoiseSample>,
}

impl NoiseDataset {
    pub fn new(label: impl Into<String>, samples: Vec<NoiseSample>) -> Result<Self> {
        let ds = Self {
            label: label.into(),
            samples,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        self.samples.iter().try_for_each(NoiseSample::validate)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn temperatures(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.temperature).collect()
    }

    /// Rescales every sample (value and error) to `f_to` assuming `S ∝ f^-exponent`.
    pub fn rescaled_to_frequency(&self, f_to: f64, exponent: f64) -> Result<Self> {
        let samples = self
            .samples
            .iter()
            .map(|s| {
                Ok(NoiseSample {
                    temperature: s.temperature,
                    frequency: f_to,
                    s_e: crate::physics::rescale_frequency_with(s.s_e, s.frequency, f_to, exponent)?,
                    s_e_err: crate::physics::rescale_frequency_with(s.s_e_err, s.frequency, f_to, exponent)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            label: self.label.clone(),
            samples,
        })
    }

    pub fn read_csv<R: Read>(label: impl Into<String>, reader: R) -> Result<Self> {
        let rows = read_rows(reader, &NOISE_HEADER)?;
        let mut samples = Vec::with_capacity(rows.len());
        for (line, v) in rows {
            let s = NoiseSample::new(v[0], v[1], v[2], v[3]);
            s.validate().map_err(|e| Error::Csv(format!("line {line}: {e}")))?;
            samples.push(s);
        }
        Ok(Self {
            label: label.into(),
            samples,
        })
    }

    pub fn read_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::read_csv(label, file)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(NOISE_HEADER)?;
        for s in &self.samples {
            w.write_record([
                fmt_f64(s.temperature),
                fmt_f64(s.frequency),
                fmt_f64(s.s_e),
                fmt_f64(s.s_e_err),
            ])?;
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }
}

pub fn read_sideband_csv<R: Read>(reader: R, trap_frequency: f64) -> Result<SidebandSeries> {
    let rows = read_rows(reader, &SIDEBAND_HEADER)?;
    let mut points = Vec::with_capacity(rows.len());
    for (line, v) in rows {
        let trials = v[3];
        if !(trials >= 1.0 && trials.fract() == 0.0 && trials <= u32::MAX as f64) {
            return Err(Error::Csv(format!("line {line}: trials must be a positive integer, got {trials}")));
        }
        let p = SidebandPoint {
            delay: v[0],
            p_bsb: v[1],
            p_rsb: v[2],
            trials: trials as u32,
        };
        p.validate().map_err(|e| Error::Csv(format!("line {line}: {e}")))?;
        points.push(p);
    }
    SidebandSeries::new(points, trap_frequency)
}

pub fn write_sideband_csv<W: Write>(series: &SidebandSeries, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SIDEBAND_HEADER)?;
    for p in &series.points {
        w.write_record([
            fmt_f64(p.delay),
            fmt_f64(p.p_bsb),
            fmt_f64(p.p_rsb),
            p.trials.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}

/// Shortest round-trip representation, always in exponent form.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}

/// Reads a numeric CSV with an exact header; returns `(line, values)` pairs.
pub fn read_rows<R: Read>(reader: R, header: &[&str]) -> Result<Vec<(u64, Vec<f64>)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let found = rdr.headers()?.clone();
    if found.is_empty() || (found.len() == 1 && found[0].is_empty()) {
        return Err(Error::Csv(format!("missing header, expected `{}`", header.join(","))));
    }
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::Csv(format!(
            "line 1: header `{}` does not match expected `{}`",
            found.iter().collect::<Vec<_>>().join(","),
            header.join(",")
        )));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != header.len() {
            return Err(Error::Csv(format!(
                "line {line}: expected {} fields, found {}",
                header.len(),
                rec.len()
            )));
        }
        let values = rec
            .iter()
            .zip(header)
            .map(|(field, name)| {
                field
                    .parse::<f64>()
                    .map_err(|_| Error::Csv(format!("line {line}: `{name}` is not a number: `{field}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push((line, values));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_set() -> NoiseDataset {
        NoiseDataset::new(
            "t",
            vec![
                NoiseSample::new(7.0, 1e6, 4.2e-14, 2.1e-15),
                NoiseSample::new(100.0, 8.6e5, 1.234_567_890_123e-11, 0.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn canonical_csv_round_trips_byte_for_byte() {
        let text = sample_set().to_csv_string();
        let back = NoiseDataset::read_csv("t", text.as_bytes()).unwrap();
        assert_eq!(back, sample_set());
        assert_eq!(back.to_csv_string(), text);
        assert!(text.starts_with("temperature_K,frequency_Hz,SE_V2m2Hz,SE_err_V2m2Hz\n"));
    }

    #[test]
    fn rejects_wrong_header_and_bad_values() {
        let err = NoiseDataset::read_csv("x", "T,f,S,E\n1,2,3,4\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("header"));
        let err = NoiseDataset::read_csv(
            "x",
            "temperature_K,frequency_Hz,SE_V2m2Hz,SE_err_V2m2Hz\n-1,1e6,1,0\n".as_bytes(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = NoiseDataset::read_csv("x", "".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("missing header"));
    }

    #[test]
    fn sideband_csv_round_trip() {
        let text = "delay_s,P_bsb,P_rsb,trials\n0e0,5e-1,0e0,100\n1e-2,6.6e-1,3.3e-1,100\n";
        let series = read_sideband_csv(text.as_bytes(), 1e6).unwrap();
        assert_eq!(series.points.len(), 2);
        let mut out = Vec::new();
        write_sideband_csv(&series, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }
}
