//! Weighted straight-line least squares.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Slope standard error treating the weights as exact inverse variances.
    pub slope_err: f64,
    /// Slope standard error scaled by the residual variance (needs n > 2).
    pub slope_err_residual: f64,
    /// Weighted sum of squared residuals.
    pub chi2: f64,
    pub n: usize,
}

/// Fits `y = intercept + slope·x`. `weights` are inverse variances; `None`
/// means unit weights.
///
/// Coordinates are shifted to the first point before accumulating so that
/// a constant `y` yields a slope of exactly zero.
pub fn fit_line(x: &[f64], y: &[f64], weights: Option<&[f64]>) -> Result<LineFit> {
    let n = x.len();
    if y.len() != n || weights.is_some_and(|w| w.len() != n) {
        return Err(Error::invalid("line fit", "x, y and weights must have equal length"));
    }
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let (x0, y0) = (x[0], y[0]);
    let w = |i: usize| weights.map_or(1.0, |w| w[i]);
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        let (xi, yi, wi) = (x[i] - x0, y[i] - y0, w(i));
        if !(wi.is_finite() && wi > 0.0) {
            return Err(Error::invalid("line fit", format!("weight {i} must be positive, got {wi}")));
        }
        sw += wi;
        sx += wi * xi;
        sy += wi * yi;
        sxx += wi * xi * xi;
        sxy += wi * xi * yi;
    }
    let det = sw * sxx - sx * sx;
    if !(det > 0.0) {
        return Err(Error::Domain("line fit needs at least two distinct abscissae".into()));
    }
    let slope = (sw * sxy - sx * sy) / det;
    let shifted_intercept = (sy - slope * sx) / sw;
    let chi2: f64 = (0..n)
        .map(|i| {
            let r = (y[i] - y0) - shifted_intercept - slope * (x[i] - x0);
            w(i) * r * r
        })
        .sum();
    let slope_var = sw / det;
    let slope_err_residual = if n > 2 {
        (chi2 / (n - 2) as f64 * slope_var).sqrt()
    } else {
        f64::NAN
    };
    Ok(LineFit {
        slope,
        intercept: y0 + shifted_intercept - slope * x0,
        slope_err: slope_var.sqrt(),
        slope_err_residual,
        chi2,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|x| 2.5 - 0.75 * x).collect();
        let f = fit_line(&x, &y, None).unwrap();
        assert!((f.slope + 0.75).abs() < 1e-15);
        assert!((f.intercept - 2.5).abs() < 1e-15);
        assert!(f.chi2 < 1e-28);
    }

    #[test]
    fn constant_data_has_zero_slope() {
        let f = fit_line(&[0.1, 0.2, 0.35], &[0.3; 3], Some(&[1.0, 7.0, 3.0])).unwrap();
        assert_eq!(f.slope, 0.0);
    }

    #[test]
    fn needs_two_distinct_points() {
        assert!(fit_line(&[1.0], &[1.0], None).is_err());
        assert!(fit_line(&[1.0, 1.0], &[1.0, 2.0], None).is_err());
    }
}
