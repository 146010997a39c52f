use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sparse_ula::{DistributionSeries, SeriesDocument, SeriesKind};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sparse-ula"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn run_doc(args: &[&str]) -> SeriesDocument {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let mut all = args.to_vec();
    let p = path.to_str().unwrap().to_string();
    all.extend(["--out", &p]);
    run_ok(&all);
    SeriesDocument::read_json(&path).unwrap()
}

fn series<'a>(doc: &'a SeriesDocument, label: &str) -> &'a DistributionSeries {
    doc.series
        .iter()
        .find(|s| s.label == label)
        .unwrap_or_else(|| panic!("no series `{label}` in {:?}", doc.series.iter().map(|s| &s.label).collect::<Vec<_>>()))
}

fn xs(s: &DistributionSeries) -> Vec<f64> {
    s.xs().collect()
}

fn assert_contains_all(have: &[f64], want: &[f64]) {
    for w in want {
        assert!(have.iter().any(|h| (h - w).abs() < 1e-12), "{w} missing from {have:?}");
    }
}

#[test]
fn beampattern_lists_nulls_and_grating_lobes() {
    let doc = run_doc(&["beampattern", "--elements", "8", "--eta", "1", "--eta", "4", "--points", "801"]);
    assert_eq!(doc.command, "beampattern");
    let nulls = xs(series(&doc, "nulls eta=1"));
    assert_contains_all(&nulls, &[-0.25, 0.25]);
    assert!(!nulls.iter().any(|x| x.abs() < 0.25 - 1e-12));
    let lobes = xs(series(&doc, "grating lobes eta=4"));
    assert_eq!(lobes, vec![-2.0, -1.5, -1.0, -0.5, 0.5, 1.0, 1.5, 2.0]);
    let pattern = series(&doc, "pattern eta=4");
    assert_eq!(pattern.points.len(), 801);
    assert!(pattern.values().all(|g| (0.0..=1.0).contains(&g)));
}

#[test]
fn json_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    run_ok(&["beampattern", "--config", config("beampattern-m8.toml").to_str().unwrap(), "--out", a.to_str().unwrap()]);
    let doc = SeriesDocument::read_json(&a).unwrap();
    let b = dir.path().join("b.json");
    doc.write_json(&b).unwrap();
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(SeriesDocument::read_json(&b).unwrap(), doc);
}

#[test]
fn csv_output_matches_json() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bp.csv");
    let args = ["beampattern", "--elements", "8", "--eta", "4", "--points", "101"];
    let mut with_out = args.to_vec();
    with_out.extend(["--out", csv.to_str().unwrap()]);
    run_ok(&with_out);
    let doc = run_doc(&args);

    let sidecar: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("bp.meta.json")).unwrap()).unwrap();
    let entries = sidecar["series"].as_array().unwrap();
    assert_eq!(entries.len(), doc.series.len());
    for (entry, s) in entries.iter().zip(&doc.series) {
        let file = dir.path().join(entry["file"].as_str().unwrap());
        let header = fs::read_to_string(&file).unwrap().lines().next().unwrap().to_string();
        assert_eq!(header, "x,value");
        let back = DistributionSeries::read_csv(&file, s.label.clone(), s.kind).unwrap();
        assert_eq!(back.points, s.points);
        assert_eq!(entry["label"], s.label.as_str());
    }
}

#[test]
fn delta_dist_support_concentration_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let cfg = config("delta-10deg.toml");
    for (path, threads) in [(&a, "1"), (&b, "3")] {
        run_ok(&[
            "delta-dist",
            "--config",
            cfg.to_str().unwrap(),
            "--pairs",
            "200000",
            "--threads",
            threads,
            "--out",
            path.to_str().unwrap(),
        ]);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let h = DistributionSeries::read_csv(&a, "delta", SeriesKind::Pdf).unwrap();
    h.validate().unwrap();
    let edge = 2.0 * 10f64.to_radians().sin();
    assert!(h.xs().all(|x| x.abs() <= edge));
    let sidecar: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("a.meta.json")).unwrap()).unwrap();
    let meta = &sidecar["series"][0]["meta"];
    assert!(meta["max_abs_delta"].as_f64().unwrap() <= edge);
    assert!(meta["abs_delta_q999"].as_f64().unwrap() < 0.36);
}

#[test]
fn rate_cdf_los_config_emits_simulated_and_analytic_series() {
    let doc = run_doc(&["rate-cdf", "--config", config("los-mrc-k18.toml").to_str().unwrap(), "--drops", "2000"]);
    let labels: Vec<&str> = doc.series.iter().map(|s| s.label.as_str()).collect();
    assert_eq!(
        labels,
        vec!["simulated mrc eta=1", "simulated mrc eta=4", "binomial eta=1", "binomial eta=4"]
    );
    for s in &doc.series {
        assert_eq!(s.kind, SeriesKind::Cdf);
        assert_eq!(s.points.last().unwrap().1, 1.0);
    }
    assert_eq!(series(&doc, "simulated mrc eta=4").meta["samples"], 2000);
}

#[test]
fn rate_cdf_one_ring_config_emits_six_series() {
    let doc = run_doc(&["rate-cdf", "--config", config("one-ring-m6-k3.toml").to_str().unwrap(), "--drops", "500"]);
    assert_eq!(doc.series.len(), 6);
    for eta in ["1", "8"] {
        for bf in ["mrc", "zf", "mmse"] {
            series(&doc, &format!("simulated {bf} eta={eta}"));
        }
    }
}

#[test]
fn gaussian_series_on_request() {
    let doc = run_doc(&["rate-cdf", "--config", config("los-mrc-k88.toml").to_str().unwrap(), "--drops", "300"]);
    assert_eq!(doc.series.len(), 6);
    series(&doc, "normal eta=4");
    let doc = run_doc(&["analytic-cdf", "--users", "18", "--eta", "4"]);
    assert_eq!(doc.series.len(), 2);
}

#[test]
fn validation_errors_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never.json");
    let o = out.to_str().unwrap();
    let cfg = config("los-mrc-k18.toml");
    for args in [
        vec!["rate-cdf", "--config", cfg.to_str().unwrap(), "--drops", "0", "--out", o],
        vec!["rate-cdf", "--beamformer", "zf", "--elements", "8", "--users", "9", "--drops", "5", "--out", o],
        vec!["crossover", "--eta", "1", "--out", o],
        vec!["beampattern", "--eta", "0.5", "--out", o],
    ] {
        let res = run(&args);
        assert_eq!(res.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&res.stderr));
        assert!(!out.exists());
    }

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "schema_version = 1\n[scenario]\nusers = 3\nspeed = 2\n").unwrap();
    assert_eq!(run(&["beampattern", "--config", bad.to_str().unwrap(), "--out", o]).status.code(), Some(2));
    fs::write(&bad, "schema_version = 7\n").unwrap();
    assert_eq!(run(&["beampattern", "--config", bad.to_str().unwrap(), "--out", o]).status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn io_errors_exit_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("no/such/dir/out.json");
    let res = run(&["beampattern", "--points", "11", "--out", missing.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(4));
    let res = run(&["beampattern", "--config", dir.path().join("absent.toml").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(4));
}

#[test]
fn crossover_thresholds_and_sweep() {
    let doc = run_doc(&["crossover", "--config", config("crossover-m16.toml").to_str().unwrap()]);
    let th = series(&doc, "thresholds eta=5.5");
    assert_eq!(th.meta["regime"], "crossover");
    let lo = th.meta["theta_lower_deg"].as_f64().unwrap();
    let hi = th.meta["theta_upper_deg"].as_f64().unwrap();
    assert!((0.4..=0.6).contains(&lo) && (76.0..=78.0).contains(&hi), "{lo} {hi}");

    let mut signs: Vec<i8> = Vec::new();
    for (_, g) in &series(&doc, "collision gap eta=5.5").points {
        let s = if g.abs() < 1e-12 { 0 } else { g.signum() as i8 };
        if signs.last() != Some(&s) {
            signs.push(s);
        }
    }
    assert_eq!(signs, vec![0, 1, -1]);
}

#[test]
fn fit_lobes_reports_model() {
    let doc = run_doc(&["fit-lobes", "--elements", "32", "--eta", "4", "--points", "201"]);
    let fit = series(&doc, "two-lobe eta=4");
    let alpha = fit.meta["alpha"].as_f64().unwrap();
    let g_side = fit.meta["g_side"].as_f64().unwrap();
    assert!((1.35..=1.85).contains(&alpha), "{alpha}");
    assert!((2.5e-3..=1e-2).contains(&g_side), "{g_side}");
    assert!(fit.meta["rms_error_db"].as_f64().unwrap() >= 0.0);
    assert!(fit.meta["sse_linear"].as_f64().unwrap() >= 0.0);
}

#[test]
fn runs_are_deterministic() {
    let args = ["rate-cdf", "--config", "", "--drops", "1000", "--seed", "42"];
    let cfg = config("one-ring-m6-k3.toml");
    let mut a = args.to_vec();
    a[2] = cfg.to_str().unwrap();
    let mut b = a.clone();
    b.extend(["--threads", "1"]);
    assert_eq!(run_doc(&a), run_doc(&b));
}

#[test]
fn stdout_json_and_schema() {
    let schema: Value =
        serde_json::from_str(include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/schema/output.schema.json"))).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    for args in [
        vec!["beampattern", "--points", "21"],
        vec!["delta-dist", "--pairs", "5000", "--bins", "16"],
        vec!["rate-cdf", "--drops", "200", "--users", "4", "--gaussian"],
        vec!["crossover", "--points", "30"],
        vec!["fit-lobes", "--points", "21"],
        vec!["analytic-cdf", "--points", "21", "--eta", "1"],
    ] {
        let out = run_ok(&args);
        let value: Value = serde_json::from_slice(&out.stdout).unwrap();
        let errors: Vec<String> = validator.iter_errors(&value).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{args:?}: {errors:?}");
    }
}
