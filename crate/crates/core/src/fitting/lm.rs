//! Levenberg–Marquardt for small dense problems.
//!
//! Steps are only accepted when they lower the objective, so the sequence
//! of accepted objective values is non-increasing.

use nalgebra::{DMatrix, Matrix3, Vector3};

/// Residual vector and Jacobian (rows = residuals) at a parameter point.
pub(crate) trait LeastSquares {
    fn n_residuals(&self) -> usize;
    /// Returns `None` when the point is outside the model's domain.
    fn evaluate(&self, params: &Vector3<f64>, residuals: &mut [f64], jacobian: &mut [[f64; 3]]) -> Option<()>;
}

#[derive(Debug, Clone)]
pub(crate) struct Solution {
    pub params: Vector3<f64>,
    pub residuals: Vec<f64>,
    pub jacobian: Vec<[f64; 3]>,
    /// ½ Σ r²
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after the start point and after each accepted step.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct LmSettings {
    pub max_iterations: usize,
    /// Converged when every parameter moves by less than this.
    pub step_tolerance: f64,
}

const LAMBDA_START: f64 = 1e-3;
const LAMBDA_MAX: f64 = 1e16;

pub(crate) fn minimize<P: LeastSquares>(problem: &P, start: Vector3<f64>, settings: LmSettings) -> Option<Solution> {
    let m = problem.n_residuals();
    let mut r = vec![0.0; m];
    let mut j = vec![[0.0; 3]; m];
    problem.evaluate(&start, &mut r, &mut j)?;
    let mut sol = Solution {
        cost: half_norm2(&r),
        params: start,
        residuals: r.clone(),
        jacobian: j.clone(),
        iterations: 0,
        converged: false,
        history: Vec::new(),
    };
    sol.history.push(sol.cost);
    let mut lambda = LAMBDA_START;

    while sol.iterations < settings.max_iterations {
        sol.iterations += 1;
        let (a, g) = normal_equations(&sol.jacobian, &sol.residuals);
        let max_diag = a.diagonal().max().max(f64::MIN_POSITIVE);
        let mut accepted = None;
        while lambda <= LAMBDA_MAX {
            let mut damped = a;
            for k in 0..3 {
                damped[(k, k)] += lambda * a[(k, k)].max(1e-12 * max_diag);
            }
            let Some(chol) = damped.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let step = chol.solve(&-g);
            let trial = sol.params + step;
            if trial.iter().all(|v| v.is_finite()) && problem.evaluate(&trial, &mut r, &mut j).is_some() {
                let cost = half_norm2(&r);
                if cost < sol.cost {
                    accepted = Some((trial, step, cost));
                    break;
                }
            }
            lambda *= 10.0;
        }
        let Some((trial, step, cost)) = accepted else {
            // No descent direction left at any damping: a minimum to rounding.
            sol.converged = true;
            break;
        };
        sol.params = trial;
        sol.cost = cost;
        sol.residuals.copy_from_slice(&r);
        sol.jacobian.copy_from_slice(&j);
        sol.history.push(cost);
        lambda = (lambda / 10.0).max(1e-12);
        if step.amax() < settings.step_tolerance {
            sol.converged = true;
            break;
        }
    }
    Some(sol)
}

pub(crate) fn half_norm2(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|x| x * x).sum::<f64>()
}

pub(crate) fn normal_equations(jac: &[[f64; 3]], r: &[f64]) -> (Matrix3<f64>, Vector3<f64>) {
    let mut a = Matrix3::zeros();
    let mut g = Vector3::zeros();
    for (row, ri) in jac.iter().zip(r) {
        for p in 0..3 {
            g[p] += row[p] * ri;
            for q in 0..3 {
                a[(p, q)] += row[p] * row[q];
            }
        }
    }
    (a, g)
}

/// Singular values of the Jacobian, descending.
pub(crate) fn singular_values(jac: &[[f64; 3]]) -> [f64; 3] {
    let m = DMatrix::from_fn(jac.len(), 3, |i, k| jac[i][k]);
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s.resize(3, 0.0);
    [s[0], s[1], s[2]]
}
