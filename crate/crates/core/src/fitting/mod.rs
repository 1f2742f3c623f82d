//! Least-squares fits of the two empirical temperature laws
//!
//! * power law over a floor: `S(T) = S0 (1 + (T/T0)^beta)`
//! * Arrhenius activation: `S(T) = S0 + S_T exp(-T0/T)`
//!
//! Parameters are fitted as logarithms so positivity needs no constraints.

mod lm;

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::{rng, Error, NoiseDataset, Result};
use lm::{LeastSquares, LmSettings};

/// Jacobian conditioning (of JᵀJ) above which the fit is flagged.
pub const CONDITION_WARNING: f64 = 1e6;
/// Conditioning of JᵀJ treated as a rank-deficient problem.
pub const CONDITION_RANK_DEFICIENT: f64 = 1e16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TempModel {
    /// `S0 (1 + (T/T0)^beta)`, parameters `[s0, t0, beta]`.
    TempScaling,
    /// `S0 + S_T exp(-T0/T)`, parameters `[s0, s_t, t0]`.
    Arrhenius,
}

impl TempModel {
    pub fn parameter_names(self) -> [&'static str; 3] {
        match self {
            TempModel::TempScaling => ["s0", "t0", "beta"],
            TempModel::Arrhenius => ["s0", "s_t", "t0"],
        }
    }

    pub fn evaluate(self, p: &[f64; 3], t: f64) -> f64 {
        match self {
            TempModel::TempScaling => p[0] * (1.0 + libm::pow(t / p[1], p[2])),
            TempModel::Arrhenius => p[0] + p[1] * libm::exp(-p[2] / t),
        }
    }

    /// Model value and its derivatives with respect to the log-parameters.
    fn value_and_log_gradient(self, p: &[f64; 3], t: f64) -> (f64, [f64; 3]) {
        match self {
            TempModel::TempScaling => {
                let ln_ratio = libm::log(t / p[1]);
                let x = libm::exp(p[2] * ln_ratio);
                let sx = p[0] * x;
                (p[0] + sx, [p[0] + sx, -p[2] * sx, p[2] * ln_ratio * sx])
            }
            TempModel::Arrhenius => {
                let a = p[1] * libm::exp(-p[2] / t);
                (p[0] + a, [p[0], a, -a * p[2] / t])
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossSpace {
    /// Residuals `ln model − ln data`.
    #[default]
    Log,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    pub loss_space: LossSpace,
    pub max_iterations: usize,
    /// Largest relative parameter change at which iteration stops.
    pub tolerance: f64,
    pub bootstrap_resamples: usize,
    /// Seed for bootstrap resampling.
    pub seed: u64,
    /// Start point in natural units; `initial_guess` when absent.
    pub initial: Option<[f64; 3]>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            loss_space: LossSpace::Log,
            max_iterations: 200,
            tolerance: 1e-10,
            bootstrap_resamples: 0,
            seed: 0,
            initial: None,
        }
    }
}

impl FitOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::invalid("tolerance", format!("must be positive, got {}", self.tolerance)));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations", "must be at least 1"));
        }
        if let Some(p) = self.initial {
            if p.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(Error::invalid("initial", format!("start parameters must be positive, got {p:?}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UncertaintyMethod {
    Jacobian,
    Bootstrap,
}

/// Everything known about a finished fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub model: TempModel,
    pub params: [f64; 3],
    pub errors_1sigma: [f64; 3],
    /// Covariance used for `errors_1sigma`.
    pub covariance: [[f64; 3]; 3],
    /// `chi2_reduced · (JᵀJ)⁻¹` mapped to natural parameters.
    pub jacobian_covariance: [[f64; 3]; 3],
    pub uncertainty: UncertaintyMethod,
    pub chi2_reduced: f64,
    pub n_points: usize,
    pub converged: bool,
    pub iterations: usize,
    /// Condition number of JᵀJ in log-parameters.
    pub condition_number: f64,
    pub warnings: Vec<String>,
    /// Objective (½ Σ r²) at the start and after each accepted step.
    pub objective_history: Vec<f64>,
    /// Weighted residuals at the solution, in data order.
    pub residuals: Vec<f64>,
    pub bootstrap_used: usize,
}

impl FitReport {
    pub fn evaluate(&self, t: f64) -> f64 {
        self.model.evaluate(&self.params, t)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let names = self.model.parameter_names();
        let named = |v: &[f64; 3]| {
            names
                .iter()
                .zip(v)
                .map(|(n, x)| ((*n).to_string(), json!(x)))
                .collect::<serde_json::Map<_, _>>()
        };
        json!({
            "model": self.model,
            "params": named(&self.params),
            "errors_1sigma": named(&self.errors_1sigma),
            "parameter_order": names,
            "covariance": self.covariance,
            "uncertainty": self.uncertainty,
            "chi2_reduced": self.chi2_reduced,
            "n_points": self.n_points,
            "converged": self.converged,
            "iterations": self.iterations,
            "condition_number": self.condition_number,
            "bootstrap_resamples": self.bootstrap_used,
            "warnings": self.warnings,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TempScalingFit {
    pub s0: f64,
    pub t0: f64,
    pub beta: f64,
    pub covariance: [[f64; 3]; 3],
    pub chi2_reduced: f64,
    pub report: FitReport,
}

impl TempScalingFit {
    pub fn evaluate(&self, t: f64) -> f64 {
        self.report.evaluate(t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrheniusFit {
    pub s0: f64,
    pub s_t: f64,
    pub t0: f64,
    pub covariance: [[f64; 3]; 3],
    pub chi2_reduced: f64,
    pub report: FitReport,
}

impl ArrheniusFit {
    pub fn evaluate(&self, t: f64) -> f64 {
        self.report.evaluate(t)
    }
}

pub fn fit_temp_scaling(data: &NoiseDataset, opts: &FitOptions) -> Result<TempScalingFit> {
    let report = fit_model(data, TempModel::TempScaling, opts)?;
    let [s0, t0, beta] = report.params;
    Ok(TempScalingFit {
        s0,
        t0,
        beta,
        covariance: report.covariance,
        chi2_reduced: report.chi2_reduced,
        report,
    })
}

pub fn fit_arrhenius(data: &NoiseDataset, opts: &FitOptions) -> Result<ArrheniusFit> {
    let report = fit_model(data, TempModel::Arrhenius, opts)?;
    let [s0, s_t, t0] = report.params;
    Ok(ArrheniusFit {
        s0,
        s_t,
        t0,
        covariance: report.covariance,
        chi2_reduced: report.chi2_reduced,
        report,
    })
}

/// Deterministic start point for either model.
pub fn initial_guess(data: &NoiseDataset, model: TempModel) -> Result<[f64; 3]> {
    if data.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut pts: Vec<(f64, f64)> = data.samples.iter().map(|s| (s.temperature, s.s_e)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let s_min = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let s_max = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(match model {
        TempModel::TempScaling => {
            let target = 2.0 * s_min;
            let crossing = pts.windows(2).find_map(|w| {
                let ((t1, s1), (t2, s2)) = (w[0], w[1]);
                (s1 < target && target <= s2).then(|| t1 + (t2 - t1) * (target - s1) / (s2 - s1))
            });
            let t0 = crossing.unwrap_or_else(|| {
                let n = pts.len();
                if n % 2 == 1 {
                    pts[n / 2].0
                } else {
                    0.5 * (pts[n / 2 - 1].0 + pts[n / 2].0)
                }
            });
            [s_min, t0, 3.0]
        }
        TempModel::Arrhenius => [s_min, s_max - s_min, 40.0],
    })
}

/// Fits either model and returns the full report.
pub fn fit_model(data: &NoiseDataset, model: TempModel, opts: &FitOptions) -> Result<FitReport> {
    opts.validate()?;
    data.validate()?;
    let n = data.len();
    if n < 5 {
        return Err(Error::InsufficientData { needed: 5, got: n });
    }
    let temps: Vec<f64> = data.samples.iter().map(|s| s.temperature).collect();
    let values: Vec<f64> = data.samples.iter().map(|s| s.s_e).collect();
    let t_lo = temps.iter().copied().fold(f64::INFINITY, f64::min);
    let t_hi = temps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if t_hi < 3.0 * t_lo {
        return Err(Error::invalid(
            "temperature",
            format!("fit needs a temperature span of at least a factor 3, got [{t_lo}, {t_hi}] K"),
        ));
    }
    if opts.loss_space == LossSpace::Log {
        if let Some(s) = values.iter().find(|s| **s <= 0.0) {
            return Err(Error::invalid("SE_V2m2Hz", format!("log-space fit needs S > 0, got {s}")));
        }
    }

    let mut warnings = Vec::new();
    let errs: Vec<f64> = data.samples.iter().map(|s| s.s_e_err).collect();
    let weighted = errs.iter().all(|e| *e > 0.0);
    if !weighted && errs.iter().any(|e| *e > 0.0) {
        warnings.push("some samples lack uncertainties; fit is unweighted".to_string());
    }
    let sigma: Vec<f64> = match (weighted, opts.loss_space) {
        (true, LossSpace::Log) => errs.iter().zip(&values).map(|(e, s)| e / s).collect(),
        (true, LossSpace::Linear) => errs,
        (false, _) => vec![1.0; n],
    };

    let problem = Problem {
        model,
        loss: opts.loss_space,
        temps: &temps,
        targets: values.clone(),
        sigma: &sigma,
    };

    let start = match opts.initial {
        Some(p) => p,
        None => {
            let mut g = initial_guess(data, model)?;
            let s_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max).abs();
            for v in &mut g {
                if !(*v > 0.0) {
                    *v = 1e-3 * s_max.max(f64::MIN_POSITIVE);
                }
            }
            g
        }
    };
    let settings = LmSettings {
        max_iterations: opts.max_iterations,
        step_tolerance: opts.tolerance,
    };
    let sol = lm::minimize(&problem, log3(&start), settings)
        .ok_or_else(|| Error::Domain(format!("model cannot be evaluated at the start point {start:?}")))?;
    let params = exp3(&sol.params);

    let sv = lm::singular_values(&sol.jacobian);
    let condition = if sv[2] > 0.0 { (sv[0] / sv[2]).powi(2) } else { f64::INFINITY };
    if !(condition < CONDITION_RANK_DEFICIENT) {
        return Err(Error::RankDeficient { condition });
    }
    if !sol.converged {
        return Err(Error::NonConvergence {
            iterations: sol.iterations,
            best: params,
        });
    }
    if condition > CONDITION_WARNING {
        warnings.push(format!(
            "JtJ condition number {condition:.3e} exceeds {CONDITION_WARNING:e}; parameters are weakly identified"
        ));
    }

    let dof = (n - 3) as f64;
    let chi2_reduced = 2.0 * sol.cost / dof;
    let (a, _) = lm::normal_equations(&sol.jacobian, &sol.residuals);
    let a_inv = a
        .try_inverse()
        .ok_or(Error::RankDeficient { condition: f64::INFINITY })?;
    let jacobian_covariance = to_natural(&(a_inv * chi2_reduced), &params);

    let mut report = FitReport {
        model,
        params,
        errors_1sigma: sqrt_diag(&jacobian_covariance),
        covariance: jacobian_covariance,
        jacobian_covariance,
        uncertainty: UncertaintyMethod::Jacobian,
        chi2_reduced,
        n_points: n,
        converged: true,
        iterations: sol.iterations,
        condition_number: condition,
        warnings,
        objective_history: sol.history.clone(),
        residuals: sol.residuals.clone(),
        bootstrap_used: 0,
    };

    if opts.bootstrap_resamples > 0 {
        bootstrap(&problem, &sol, opts, settings, &mut report);
    }
    Ok(report)
}

struct Problem<'a> {
    model: TempModel,
    loss: LossSpace,
    temps: &'a [f64],
    /// Data in natural units.
    targets: Vec<f64>,
    sigma: &'a [f64],
}

impl LeastSquares for Problem<'_> {
    fn n_residuals(&self) -> usize {
        self.temps.len()
    }

    fn evaluate(&self, theta: &Vector3<f64>, r: &mut [f64], j: &mut [[f64; 3]]) -> Option<()> {
        let p = exp3(theta);
        if p.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return None;
        }
        for i in 0..self.temps.len() {
            let (m, grad) = self.model.value_and_log_gradient(&p, self.temps[i]);
            let s = self.sigma[i];
            // ln(m/y) rather than ln m - ln y: no cancellation, and a common
            // scale factor on m and y drops out.
            let (diff, scale) = match self.loss {
                LossSpace::Log => (libm::log(m / self.targets[i]), 1.0 / (m * s)),
                LossSpace::Linear => (m - self.targets[i], 1.0 / s),
            };
            r[i] = diff / s;
            j[i] = [grad[0] * scale, grad[1] * scale, grad[2] * scale];
            if !(r[i].is_finite() && j[i].iter().all(|v| v.is_finite())) {
                return None;
            }
        }
        Some(())
    }
}

/// Residual bootstrap: refit synthetic data built from the fitted curve
/// plus resampled standardized residuals.
fn bootstrap(problem: &Problem<'_>, sol: &lm::Solution, opts: &FitOptions, settings: LmSettings, report: &mut FitReport) {
    let n = problem.temps.len();
    let params = exp3(&sol.params);
    let fitted: Vec<f64> = problem.temps.iter().map(|&t| problem.model.evaluate(&params, t)).collect();
    let samples: Vec<Option<[f64; 3]>> = (0..opts.bootstrap_resamples as u64)
        .into_par_iter()
        .map(|b| {
            let mut g = rng::stream(opts.seed, rng::domain::BOOTSTRAP, b);
            let targets = (0..n)
                .map(|i| {
                    let k = ((rng::uniform(&mut g) * n as f64) as usize).min(n - 1);
                    let shift = -problem.sigma[i] * sol.residuals[k];
                    match problem.loss {
                        LossSpace::Log => fitted[i] * libm::exp(shift),
                        LossSpace::Linear => fitted[i] + shift,
                    }
                })
                .collect();
            let resampled = Problem {
                targets,
                ..*problem
            };
            let s = lm::minimize(&resampled, sol.params, settings)?;
            s.converged.then(|| exp3(&s.params))
        })
        .collect();
    let ok: Vec<[f64; 3]> = samples.into_iter().flatten().collect();
    let failed = opts.bootstrap_resamples - ok.len();
    if failed > 0 {
        report
            .warnings
            .push(format!("{failed} of {} bootstrap resamples did not converge", opts.bootstrap_resamples));
    }
    if ok.len() < 2 {
        report
            .warnings
            .push("too few bootstrap resamples converged; keeping Jacobian uncertainties".to_string());
        return;
    }
    let m = ok.len() as f64;
    let mut mean = [0.0; 3];
    for p in &ok {
        for k in 0..3 {
            mean[k] += p[k] / m;
        }
    }
    let mut cov = [[0.0; 3]; 3];
    for p in &ok {
        for a in 0..3 {
            for b in 0..3 {
                cov[a][b] += (p[a] - mean[a]) * (p[b] - mean[b]) / (m - 1.0);
            }
        }
    }
    report.covariance = cov;
    report.errors_1sigma = sqrt_diag(&cov);
    report.uncertainty = UncertaintyMethod::Bootstrap;
    report.bootstrap_used = ok.len();
}

fn log3(p: &[f64; 3]) -> Vector3<f64> {
    Vector3::new(libm::log(p[0]), libm::log(p[1]), libm::log(p[2]))
}

fn exp3(t: &Vector3<f64>) -> [f64; 3] {
    [libm::exp(t[0]), libm::exp(t[1]), libm::exp(t[2])]
}

/// `D · cov · D` with `D = diag(p)`, since `dp = p · d(ln p)`.
fn to_natural(cov_log: &Matrix3<f64>, p: &[f64; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            out[a][b] = p[a] * cov_log[(a, b)] * p[b];
        }
    }
    out
}

fn sqrt_diag(c: &[[f64; 3]; 3]) -> [f64; 3] {
    [c[0][0].max(0.0).sqrt(), c[1][1].max(0.0).sqrt(), c[2][2].max(0.0).sqrt()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::NoiseSample;

    fn grid() -> Vec<f64> {
        (0..12).map(|i| 7.0 + 93.0 * i as f64 / 11.0).collect()
    }

    fn exact(model: TempModel, p: [f64; 3]) -> NoiseDataset {
        let samples = grid()
            .into_iter()
            .map(|t| NoiseSample::new(t, 1e6, model.evaluate(&p, t), 0.0))
            .collect();
        NoiseDataset::new("exact", samples).unwrap()
    }

    fn assert_rel(got: [f64; 3], want: [f64; 3], tol: f64) {
        for k in 0..3 {
            assert!(((got[k] - want[k]) / want[k]).abs() < tol, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn recovers_noiseless_temp_scaling() {
        let truth = [42e-15, 46.0, 4.1];
        let fit = fit_temp_scaling(&exact(TempModel::TempScaling, truth), &FitOptions::default()).unwrap();
        assert_rel([fit.s0, fit.t0, fit.beta], truth, 1e-6);
        assert!(fit.report.objective_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn recovers_noiseless_arrhenius() {
        let truth = [100e-15, 5000e-15, 40.0];
        let fit = fit_arrhenius(&exact(TempModel::Arrhenius, truth), &FitOptions::default()).unwrap();
        assert_rel([fit.s0, fit.s_t, fit.t0], truth, 1e-6);
    }

    #[test]
    fn linear_loss_also_recovers() {
        let truth = [42e-15, 46.0, 4.1];
        let opts = FitOptions {
            loss_space: LossSpace::Linear,
            ..Default::default()
        };
        let fit = fit_temp_scaling(&exact(TempModel::TempScaling, truth), &opts).unwrap();
        assert_rel([fit.s0, fit.t0, fit.beta], truth, 1e-6);
    }

    #[test]
    fn constant_data_is_rank_deficient() {
        let samples = grid().into_iter().map(|t| NoiseSample::new(t, 1e6, 5e-14, 0.0)).collect();
        let data = NoiseDataset::new("flat", samples).unwrap();
        let err = fit_temp_scaling(&data, &FitOptions::default()).unwrap_err();
        assert!(matches!(err, Error::RankDeficient { .. }), "{err:?}");
    }

    #[test]
    fn guess_fallbacks() {
        let two = NoiseDataset::new(
            "two",
            vec![NoiseSample::new(30.0, 1e6, 2.0, 0.0), NoiseSample::new(10.0, 1e6, 1.5, 0.0)],
        )
        .unwrap();
        assert_eq!(initial_guess(&two, TempModel::TempScaling).unwrap(), [1.5, 20.0, 3.0]);
        assert_eq!(initial_guess(&two, TempModel::Arrhenius).unwrap(), [1.5, 0.5, 40.0]);
    }

    #[test]
    fn too_few_points_or_narrow_span() {
        let d = exact(TempModel::TempScaling, [1.0, 40.0, 3.0]);
        let short = NoiseDataset::new("s", d.samples[..4].to_vec()).unwrap();
        assert!(matches!(
            fit_temp_scaling(&short, &FitOptions::default()),
            Err(Error::InsufficientData { .. })
        ));
        let narrow = NoiseDataset::new("n", d.samples[6..].to_vec()).unwrap();
        assert!(fit_temp_scaling(&narrow, &FitOptions::default()).is_err());
    }

    #[test]
    fn json_report_has_schema_keys() {
        let fit = fit_temp_scaling(&exact(TempModel::TempScaling, [1.0, 40.0, 3.0]), &FitOptions::default()).unwrap();
        let v = fit.report.to_json();
        for key in [
            "model",
            "params",
            "errors_1sigma",
            "covariance",
            "chi2_reduced",
            "n_points",
            "converged",
            "iterations",
            "warnings",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["model"], "temp_scaling");
        assert_eq!(v["params"]["beta"].as_f64().unwrap().round(), 3.0);
    }
}
