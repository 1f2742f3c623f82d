use std::f64::consts::PI;

use fieldnoise_core::dutta_horn::*;
use fieldnoise_core::ensemble::{ensemble_spectrum, sample_ensemble, EnsembleConfig};
use fieldnoise_core::reference::load_reference_table;
use proptest::prelude::*;

const OMEGA_1MHZ: f64 = 2.0 * PI * 1e6;

fn power_law(beta: f64) -> DuttaHornParams {
    DuttaHornParams::new(beta, 46.0).with_density(EnergyDensity::PowerLaw)
}

fn raw(p: &DuttaHornParams, omega: f64, t: f64) -> f64 {
    spectrum_integral(p, omega, t, Normalization::Raw).unwrap()
}

/// Saddle-point estimate `(π/2)(T/ω) D(T ln(1/ωτ0))`.
fn saddle(p: &DuttaHornParams, omega: f64, t: f64) -> f64 {
    let e = t * (1.0 / (omega * p.tau0)).ln();
    PI / 2.0 * t / omega * p.density_at(e)
}

#[test]
fn doubling_temperature_scales_by_two_to_the_beta() {
    for beta in [1.8, 3.0, 3.6, 4.1] {
        let p = power_law(beta);
        let ratio = raw(&p, OMEGA_1MHZ, 40.0) / raw(&p, OMEGA_1MHZ, 20.0);
        let oracle = saddle(&p, OMEGA_1MHZ, 40.0) / saddle(&p, OMEGA_1MHZ, 20.0);
        assert!((ratio / oracle - 1.0).abs() < 0.02, "beta {beta}: {ratio} vs {oracle}");
    }
}

#[test]
fn absolute_value_near_saddle_estimate() {
    let p = power_law(3.6);
    for t in [20.0, 50.0, 100.0] {
        let r = raw(&p, OMEGA_1MHZ, t) / saddle(&p, OMEGA_1MHZ, t);
        assert!((r - 1.0).abs() < 0.1, "T {t}: ratio {r}");
    }
}

#[test]
fn doubling_frequency_halves_near_crossover() {
    let p = DuttaHornParams::trap_iiia();
    let t1 = crossover_temperature(&p).unwrap();
    let r = raw(&p, 2.0 * OMEGA_1MHZ, t1) / raw(&p, OMEGA_1MHZ, t1);
    assert!((r - 0.5).abs() < 0.02, "{r}");
}

fn fd_alpha(p: &DuttaHornParams, omega: f64, t: f64) -> f64 {
    let h: f64 = 0.01;
    let up = raw(p, omega * h.exp(), t).ln();
    let down = raw(p, omega * (-h).exp(), t).ln();
    -(up - down) / (2.0 * h)
}

#[test]
fn frequency_slope_matches_alpha_formula() {
    let p = DuttaHornParams::trap_iiia();
    for t in [15.0, 20.0, 30.0, 46.0, 70.0, 100.0] {
        let numeric = fd_alpha(&p, OMEGA_1MHZ, t);
        let formula = model_alpha(&p, OMEGA_1MHZ, t).unwrap();
        assert!((numeric - formula).abs() < 0.05, "T {t}: {numeric} vs {formula}");
    }
}

#[test]
fn spectrum_grows_with_temperature() {
    let p = DuttaHornParams::trap_iiia();
    let s: Vec<f64> = (1..=20).map(|i| raw(&p, OMEGA_1MHZ, 5.0 * i as f64)).collect();
    assert!(s.iter().all(|v| v.is_finite() && *v > 0.0));
    assert!(s.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn reference_normalization_reproduces_table_curve() {
    // The floor density at ω_ref reproduces S0 (1 + (T/T0)^β).
    let p = DuttaHornParams::trap_iiia();
    let norm = Normalization::Reference {
        omega: OMEGA_1MHZ,
        temperature: 7.0,
        value: p.s0 * (1.0 + (7.0 / p.t0).powf(p.beta)),
    };
    for t in [20.0, 46.0, 100.0] {
        let s = spectrum_integral(&p, OMEGA_1MHZ, t, norm).unwrap();
        let law = p.s0 * (1.0 + (t / p.t0).powf(p.beta));
        assert!((s / law - 1.0).abs() < 0.1, "T {t}: {s:e} vs {law:e}");
    }
}

#[test]
fn monte_carlo_agrees_with_quadrature() {
    let cfg = EnsembleConfig {
        e_min: 10.0,
        e_max: 1200.0,
        ..EnsembleConfig::new(3.6, 100_000, 2024)
    };
    let ens = sample_ensemble(&cfg).unwrap();
    let p = DuttaHornParams {
        e_min: cfg.e_min,
        e_max: cfg.e_max,
        ..power_law(cfg.beta)
    };
    // E[S] = N · 4a² · ∫ p(E) kernel dE with p(E) = β E^(β-1)/(e_max^β - e_min^β)
    let c = cfg.n_fluctuators as f64 * 4.0 * cfg.beta / (cfg.e_max.powf(cfg.beta) - cfg.e_min.powf(cfg.beta));
    let freqs: Vec<f64> = (0..=20).map(|i| 1e5 * 10f64.powf(i as f64 / 10.0)).collect();
    for t in [30.0, 60.0, 100.0] {
        let mc = ensemble_spectrum(&ens, t, &freqs).unwrap();
        let sq: f64 = freqs
            .iter()
            .zip(&mc)
            .map(|(f, s)| (s / (c * raw(&p, 2.0 * PI * f, t)) - 1.0).powi(2))
            .sum();
        let rms = (sq / freqs.len() as f64).sqrt();
        assert!(rms < 0.05, "T {t}: RMS deviation {rms}");
    }
}

#[test]
fn johnson_model_is_at_odds_with_observed_exponents() {
    let grid: Vec<f64> = (0..12).map(|i| 7.0 + 93.0 / 11.0 * i as f64).collect();
    let linear = ResistivityCurve::new(vec![(1.0, 1e-10), (300.0, 300e-10)]).unwrap();
    let slope = temperature_exponent(&johnson_prediction(&linear, &grid).unwrap()).unwrap();
    assert!((slope - 2.0).abs() < 1e-9);
    let constant = ResistivityCurve::new(vec![(1.0, 2e-8), (300.0, 2e-8)]).unwrap();
    let slope1 = temperature_exponent(&johnson_prediction(&constant, &grid).unwrap()).unwrap();
    assert!((slope1 - 1.0).abs() < 1e-9);

    let table = load_reference_table();
    let steep: Vec<_> = table.rows.iter().filter(|r| r.beta >= 3.0).collect();
    assert_eq!(steep.len(), 6);
    for row in steep {
        assert!(row.beta - slope >= 1.0 - 1e-9, "{}: beta {} vs {slope}", row.label, row.beta);
    }
}

#[test]
fn alpha_domain_errors() {
    let p = DuttaHornParams::trap_iiia();
    assert!(model_alpha(&p, 1e13, 30.0).is_err());
    assert!(model_alpha(&p, OMEGA_1MHZ, 0.0).is_err());
    assert!(matches!(
        crossover_temperature(&DuttaHornParams::new(1.0, 46.0)),
        Err(fieldnoise_core::Error::NoCrossover { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn alpha_is_increasing_and_one_at_crossover(beta in 1.05f64..6.0, t0 in 5.0f64..200.0, f in 1e3f64..1e9) {
        let p = DuttaHornParams::new(beta, t0);
        let omega = 2.0 * PI * f;
        let t1 = crossover_temperature(&p).unwrap();
        prop_assert!((model_alpha(&p, omega, t1).unwrap() - 1.0).abs() < 1e-12);
        let a: Vec<f64> = (1..50).map(|i| model_alpha(&p, omega, t0 * 0.05 * i as f64).unwrap()).collect();
        prop_assert!(a.windows(2).all(|w| w[1] > w[0]));
    }
}
