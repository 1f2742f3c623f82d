mod common;

use std::f64::consts::PI;
use std::fs;

use common::*;
use fieldnoise_core::dataset::write_sideband_csv;
use fieldnoise_core::ensemble::{sample_ensemble, EnsembleConfig};
use fieldnoise_core::physics::{SidebandPoint, SidebandSeries};
use fieldnoise_core::synthetic;
use tempfile::tempdir;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn reference_table_has_the_eight_rows() {
    let out = fieldnoise(["reference-table", "--format", "json", "-q"]);
    let v = json(&out);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    let ii = rows.iter().find(|r| r["label"] == "II").unwrap();
    assert_eq!((ii["s0"].as_f64(), ii["t0"].as_f64(), ii["beta"].as_f64()), (Some(42.0), Some(46.0), Some(4.1)));
    let csv = ok(&fieldnoise(["reference-table", "-q"]));
    assert!(csv.lines().any(|l| l.starts_with("III e,18,3,17,3,1.8,0.1,")));
}

#[test]
fn fit_of_synthetic_trap_ii_matches_the_table() {
    let dir = tempdir().unwrap();
    synthesize(dir.path());
    let v = json(&fieldnoise([
        "fit".as_ref(),
        dir.path().join("trap_II.csv").as_os_str(),
        "-q".as_ref(),
    ]));
    let p = &v["params"];
    let e = &v["errors_1sigma"];
    for (name, truth) in [("s0", 42e-15), ("t0", 46.0), ("beta", 4.1)] {
        let (x, s) = (p[name].as_f64().unwrap(), e[name].as_f64().unwrap());
        assert!(rel(x, truth) < 0.1 || (x - truth).abs() < 2.0 * s, "{name}: {x} ± {s}");
    }
    assert_eq!(v["model"], "temp_scaling");
    assert!(v["converged"].as_bool().unwrap());
}

#[test]
fn arrhenius_fit_of_anomaly_dataset_finds_forty_kelvin() {
    let dir = tempdir().unwrap();
    synthesize(dir.path());
    let out = fieldnoise([
        "fit".as_ref(),
        "--model".as_ref(),
        "arrhenius".as_ref(),
        dir.path().join("anomaly.csv").as_os_str(),
    ]);
    let v = json(&out);
    let t0 = v["params"]["t0"].as_f64().unwrap();
    assert!(rel(t0, 40.0) < 0.1, "T0 {t0}");
    assert!(stderr(&out).contains("rescaled to 1 MHz"));
}

#[test]
fn fit_csv_and_bootstrap_are_seeded() {
    let dir = tempdir().unwrap();
    synthesize(dir.path());
    let data = dir.path().join("trap_III_a.csv");
    let run = |seed: &str| {
        ok(&fieldnoise([
            "fit".as_ref(),
            data.as_os_str(),
            "--bootstrap".as_ref(),
            "50".as_ref(),
            "--seed".as_ref(),
            seed.as_ref(),
            "--format".as_ref(),
            "csv".as_ref(),
            "-q".as_ref(),
        ]))
    };
    let a = run("7");
    assert_eq!(a, run("7"));
    assert_ne!(a, run("8"));
    assert!(a.starts_with("parameter,value,error_1sigma\ns0,"));
}

#[test]
fn johnson_comparison_reports_exponents() {
    let dir = tempdir().unwrap();
    synthesize(dir.path());
    let out = fieldnoise([
        "fit".as_ref(),
        dir.path().join("trap_II.csv").as_os_str(),
        "--johnson".as_ref(),
        data_file("gold_resistivity_bloch_gruneisen.csv").as_os_str(),
        "-q".as_ref(),
    ]);
    let v = json(&out);
    let j = &v["johnson"];
    let johnson = j["johnson_temperature_exponent"].as_f64().unwrap();
    assert!(johnson > 1.0 && johnson < 3.0, "{johnson}");
    assert!(j["fitted_beta_minus_johnson"].as_f64().unwrap() > 1.0);
}

#[test]
fn empty_and_header_only_files_are_input_errors() {
    let dir = tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let out = fieldnoise(["fit".as_ref(), empty.as_os_str()]);
    assert_eq!(out.status.code(), Some(2));
    let header = dir.path().join("header.csv");
    fs::write(&header, "temperature_K,frequency_Hz,SE_V2m2Hz,SE_err_V2m2Hz\n").unwrap();
    let out = fieldnoise(["fit".as_ref(), header.as_os_str()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("insufficient data"));
    let missing = fieldnoise(["fit", "/nonexistent/data.csv"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn non_convergence_is_a_numerical_failure() {
    let dir = tempdir().unwrap();
    synthesize(dir.path());
    let out = fieldnoise([
        "fit".as_ref(),
        dir.path().join("trap_II.csv").as_os_str(),
        "--max-iterations".as_ref(),
        "2".as_ref(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("did not converge"));
}

#[test]
fn malformed_configs_name_the_line_and_field() {
    let dir = tempdir().unwrap();
    let cases = [
        ("{\n  \"beta\": 3.6,\n  \"n\": 10,\n}\n", "line 4"),
        ("{\n  \"beta\": 3.6,\n  \"nn\": 10\n}\n", "unknown field `nn` (line 3)"),
        ("{\n  \"beta\": 3.6,\n  \"n\": 10,\n  \"e_max_K\": 1\n}\n", "e_max_K"),
        ("{\n  \"beta\": \"steep\",\n  \"n\": 10\n}\n", "line 2"),
    ];
    for (i, (text, needle)) in cases.iter().enumerate() {
        let path = dir.path().join(format!("bad{i}.json"));
        fs::write(&path, text).unwrap();
        let out = fieldnoise(["simulate".as_ref(), path.as_os_str()]);
        assert_eq!(out.status.code(), Some(2), "{text}");
        assert!(stderr(&out).contains(needle), "{}", stderr(&out));
    }
}

#[test]
fn single_fluctuator_config_gives_a_lorentzian() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("one.json");
    fs::write(&cfg, r#"{"beta": 2.0, "n": 1, "amplitude": 0.5, "seed": 9}"#).unwrap();
    let csv = ok(&fieldnoise([
        "simulate".as_ref(),
        cfg.as_os_str(),
        "-T".as_ref(),
        "25".as_ref(),
        "-f".as_ref(),
        "log:1e-2:1e10:25".as_ref(),
        "-q".as_ref(),
    ]));
    let ens = sample_ensemble(&EnsembleConfig {
        amplitude: 0.5,
        ..EnsembleConfig::new(2.0, 1, 9)
    })
    .unwrap();
    let tau = ens.tau0() * (ens.energies()[0] / 25.0).exp();
    let rows = csv_rows(&csv);
    assert_eq!(rows.len(), 25);
    for r in rows {
        let w = 2.0 * PI * r[1];
        let lorentz = 4.0 * 0.25 * tau / (1.0 + w * w * tau * tau);
        assert!(rel(r[2], lorentz) < 1e-12, "f {}: {} vs {lorentz}", r[1], r[2]);
    }
}

#[test]
fn simulate_is_reproducible_from_its_manifest() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"beta": 3.6, "n": 2000, "seed": 5}"#).unwrap();
    let first = dir.path().join("a.csv");
    ok(&fieldnoise([
        "simulate".as_ref(),
        cfg.as_os_str(),
        "--seed".as_ref(),
        "11".as_ref(),
        "-o".as_ref(),
        first.as_os_str(),
    ]));
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("a.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["seed"], 11);
    assert_eq!(manifest["timestamp"], "2023-11-14T22:13:20Z");
    assert!(manifest["config_hash"].as_str().unwrap().starts_with("sha256:"));

    // Rerun from the manifest's ensemble block and temperature grid.
    let replay = dir.path().join("replay.json");
    fs::write(&replay, serde_json::to_string(&manifest["config"]["ensemble"]).unwrap()).unwrap();
    let temps: Vec<String> = manifest["config"]["temperatures_K"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t.as_f64().unwrap().to_string())
        .collect();
    let second = ok(&fieldnoise([
        "simulate".as_ref(),
        replay.as_os_str(),
        "-T".as_ref(),
        temps.join(",").as_ref(),
        "-q".as_ref(),
    ]));
    assert_eq!(fs::read_to_string(&first).unwrap(), second);
}

#[test]
fn telegraph_trace_feeds_psd_and_fit_alpha() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"beta": 2.0, "n": 300, "e_min_K": 200, "e_max_K": 600, "seed": 2}"#).unwrap();
    let trace = dir.path().join("trace.csv");
    ok(&fieldnoise([
        "simulate".as_ref(),
        cfg.as_os_str(),
        "--trace".as_ref(),
        "--temperature".as_ref(),
        "20".as_ref(),
        "--sample-rate".as_ref(),
        "1e4".as_ref(),
        "--duration".as_ref(),
        "20".as_ref(),
        "-o".as_ref(),
        trace.as_os_str(),
        "-q".as_ref(),
    ]));
    let psd = dir.path().join("psd.csv");
    ok(&fieldnoise([
        "psd".as_ref(),
        trace.as_os_str(),
        "-o".as_ref(),
        psd.as_os_str(),
        "-q".as_ref(),
    ]));
    let text = fs::read_to_string(&psd).unwrap();
    assert!(text.starts_with("frequency_Hz,psd\n"));
    assert_eq!(csv_rows(&text).len(), 512);
    let v = json(&fieldnoise([
        "fit-alpha".as_ref(),
        psd.as_os_str(),
        "--f-lo".as_ref(),
        "10".as_ref(),
        "--f-hi".as_ref(),
        "1000".as_ref(),
        "-q".as_ref(),
    ]));
    for key in ["alpha", "alpha_err", "prefactor", "f_lo", "f_hi", "n_points"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    let alpha = v["alpha"].as_f64().unwrap();
    assert!(alpha > 0.0 && alpha < 2.5, "{alpha}");
}

fn write_series(dir: &std::path::Path, name: &str, points: Vec<SidebandPoint>) -> std::path::PathBuf {
    let series = SidebandSeries::new(points, 1e6).unwrap();
    let path = dir.join(name);
    let mut buf = Vec::new();
    write_sideband_csv(&series, &mut buf).unwrap();
    fs::write(&path, buf).unwrap();
    path
}

fn thermometry(path: &std::path::Path) -> std::process::Output {
    fieldnoise(["thermometry".as_ref(), path.as_os_str(), "-q".as_ref()])
}

#[test]
fn thermometry_of_synthetic_heating() {
    let dir = tempdir().unwrap();
    let delays: Vec<f64> = (0..8).map(|i| i as f64 * 1.5e-4).collect();
    let series = synthetic::sideband_series(4200.0, 0.1, &delays, 10_000, 1e6, 3).unwrap();
    let path = write_series(dir.path(), "s.csv", series.points);
    let v = json(&thermometry(&path));
    let n_dot = v["n_dot"].as_f64().unwrap();
    let err = v["n_dot_err"].as_f64().unwrap();
    assert!((n_dot - 4200.0).abs() < 3.0 * err, "{n_dot} ± {err}");
    let s_e = v["SE_V2m2Hz"].as_f64().unwrap();
    assert!(rel(s_e, 6.33e-11) < 0.1, "{s_e:e}");
    assert_eq!(v["SE_rescaled_V2m2Hz"], v["SE_V2m2Hz"]);
}

fn point(delay: f64, n: f64) -> SidebandPoint {
    SidebandPoint {
        delay,
        p_bsb: 0.8 * (n + 1.0) / (2.0 * n + 1.0),
        p_rsb: 0.8 * n / (2.0 * n + 1.0),
        trials: 1000,
    }
}

#[test]
fn zero_slope_series_has_zero_field_noise() {
    let dir = tempdir().unwrap();
    let path = write_series(dir.path(), "flat.csv", (0..5).map(|i| point(i as f64 * 1e-3, 1.0)).collect());
    let v = json(&thermometry(&path));
    assert_eq!(v["SE_V2m2Hz"].as_f64(), Some(0.0));
}

#[test]
fn degenerate_row_is_skipped_with_one_warning() {
    let dir = tempdir().unwrap();
    let good: Vec<SidebandPoint> = (0..6).map(|i| point(i as f64 * 1e-4, 0.2 + 0.4 * i as f64)).collect();
    let mut with_bad = good.clone();
    with_bad.insert(
        3,
        SidebandPoint {
            delay: 2.5e-4,
            p_bsb: 0.3,
            p_rsb: 0.35,
            trials: 1000,
        },
    );
    let a = json(&thermometry(&write_series(dir.path(), "good.csv", good)));
    let out = thermometry(&write_series(dir.path(), "bad.csv", with_bad));
    let b = json(&out);
    assert_eq!(a["n_dot"], b["n_dot"]);
    assert_eq!(a["SE_V2m2Hz"], b["SE_V2m2Hz"]);
    assert_eq!(b["warnings"].as_array().unwrap().len(), 1);
    assert_eq!(b["skipped_rows"], serde_json::json!([4]));
    assert_eq!(stderr(&out).matches("warning:").count(), 1);

    let all_bad = write_series(
        dir.path(),
        "all_bad.csv",
        (0..3)
            .map(|i| SidebandPoint {
                delay: i as f64 * 1e-4,
                p_bsb: 0.2,
                p_rsb: 0.3,
                trials: 100,
            })
            .collect(),
    );
    assert_eq!(thermometry(&all_bad).status.code(), Some(2));
}

#[test]
fn predict_alpha_reports_the_crossover() {
    let csv = ok(&fieldnoise([
        "predict-alpha".as_ref(),
        "--params".as_ref(),
        data_file("trap_iiia_params.json").as_os_str(),
        "-T".as_ref(),
        "20,46,100".as_ref(),
        "-q".as_ref(),
    ]));
    let header = csv.lines().next().unwrap();
    let t1: f64 = header.strip_prefix("# T1_K = ").unwrap().parse().unwrap();
    assert!((t1 - 35.3).abs() < 0.1, "{t1}");
    let rows = csv_rows(&csv);
    let at_t1 = rows.iter().find(|r| r[0] == t1).expect("T1 is on the grid");
    assert!((at_t1[1] - 1.0).abs() < 1e-12);
    let at_100 = rows.iter().find(|r| r[0] == 100.0).unwrap();
    assert!((at_100[1] - 1.20).abs() < 0.01, "{}", at_100[1]);

    let out = fieldnoise(["predict-alpha", "--beta", "0.8", "--t0", "40", "-T", "10,20", "-q"]);
    assert!(ok(&out).starts_with("# T1_K = none"));
    let out = fieldnoise(["predict-alpha", "--beta", "3.6", "--t0", "46", "--frequency", "1e13"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn figure_parity_mode_is_plot_ready() {
    let csv = ok(&fieldnoise([
        "predict-alpha",
        "--beta",
        "3.6",
        "--t0",
        "46",
        "--figure-parity",
        "-q",
    ]));
    assert!(csv.starts_with("temperature_K,frequency_Hz,S_times_f_V2m2\n"));
    let rows = csv_rows(&csv);
    assert_eq!(rows.len(), 6 * 21);
    // below T1 S·f rises with f (alpha < 1), above it falls
    let cold: Vec<&Vec<f64>> = rows.iter().filter(|r| r[0] == 20.0).collect();
    let hot: Vec<&Vec<f64>> = rows.iter().filter(|r| r[0] == 100.0).collect();
    assert!(cold.last().unwrap()[2] > cold[0][2]);
    assert!(hot.last().unwrap()[2] < hot[0][2]);
}

#[test]
fn extrapolate_json_and_table() {
    let v = json(&fieldnoise(["extrapolate", "--distance", "1e-7", "--format", "json", "-q"]));
    assert!(rel(v["field_noise"].as_f64().unwrap(), 1e3) < 1e-12);
    assert_eq!(v["comparisons"].as_array().unwrap().len(), 2);
    let table = ok(&fieldnoise(["extrapolate", "-q"]));
    assert!(table.contains("sigma_E (static field)"));
    let off = fieldnoise(["extrapolate", "--frequency-exponent", "1.2", "--format", "json", "-q"]);
    let v = json(&off);
    assert!(v["patch"].get("Err").is_some());
    assert!(stderr(&off).contains("not computed"));
}

#[test]
fn every_command_writes_a_manifest() {
    let dir = tempdir().unwrap();
    synthesize(dir.path());
    assert!(dir.path().join("manifest.json").exists());
    let o = |name: &str| dir.path().join(name);
    let cases: Vec<Vec<std::ffi::OsString>> = vec![
        vec!["fit".into(), o("trap_I.csv").into()],
        vec!["thermometry".into(), o("sideband.csv").into()],
        vec!["predict-alpha".into(), "--beta".into(), "3".into(), "--t0".into(), "70".into()],
        vec!["extrapolate".into()],
        vec!["reference-table".into()],
    ];
    for (i, mut args) in cases.into_iter().enumerate() {
        let out_path = o(&format!("out{i}"));
        args.extend(["-o".into(), out_path.clone().into(), "-q".into()]);
        ok(&fieldnoise(&args));
        let mut m = out_path.into_os_string();
        m.push(".manifest.json");
        let manifest: serde_json::Value = serde_json::from_slice(&fs::read(&m).unwrap()).unwrap();
        assert_eq!(manifest["tool_version"], format!("fieldnoise-cli {}", env!("CARGO_PKG_VERSION")));
        assert_eq!(manifest["command"], args[0].to_str().unwrap());
    }
}

#[test]
fn bad_grid_is_rejected_by_the_parser() {
    let out = fieldnoise(["predict-alpha", "--beta", "3", "--t0", "40", "-T", "log:0:1:3"]);
    assert_eq!(out.status.code(), Some(2));
}
