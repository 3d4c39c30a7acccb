//! End-to-end tests of the command-line driver: configs in, artifacts and
//! exit codes out.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_rmtlab")
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rmtlab-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, name: &str, json: &serde_json::Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(json).unwrap()).unwrap();
    path
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(bin()).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn data_rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect()
}

#[test]
fn law_grid_has_inclusive_endpoints_and_known_density() {
    let dir = tmp_dir("law");
    let cfg = write_config(
        &dir,
        "law.json",
        &serde_json::json!({
            "law": { "id": "marchenko-pastur", "y": 1.0 },
            "grid": { "min": 0.0, "max": 4.0, "step": 0.01 }
        }),
    );
    let out = dir.join("out");
    let (code, _, _) = run(&[
        "law",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let rows = data_rows(&out.join("law.csv"));
    assert_eq!(rows.len(), 401);
    // density at x = 1 is sqrt(3)/(2 pi)
    let at_one = rows.iter().find(|r| (r[0] - 1.0).abs() < 1e-12).unwrap();
    assert!((at_one[1] - 0.27566444771089595).abs() < 1e-9);
    // header comment present
    let first = fs::read_to_string(out.join("law.csv"))
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string();
    assert!(first.starts_with("# rmtlab v"));
    assert!(first.contains("config="));
}

#[test]
fn radial_law_grid_columns() {
    let dir = tmp_dir("radial");
    let cfg = write_config(
        &dir,
        "law.json",
        &serde_json::json!({
            "law": { "id": "circular-ev" },
            "grid": { "min": 0.0, "max": 1.2, "step": 0.1 }
        }),
    );
    let out = dir.join("out");
    let (code, _, _) = run(&["law", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(out.join("law.csv")).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("r,f,radial_cdf"));
    let rows = data_rows(&out.join("law.csv"));
    // f = 1/pi inside the disc, radial cdf r^2.
    let inside = rows.iter().find(|r| (r[0] - 0.5).abs() < 1e-9).unwrap();
    assert!((inside[1] - 1.0 / std::f64::consts::PI).abs() < 1e-12);
    assert!((inside[2] - 0.25).abs() < 1e-12);
}

#[test]
fn simulate_is_deterministic_and_reports_summary() {
    let dir = tmp_dir("simulate");
    let cfg = write_config(
        &dir,
        "sim.json",
        &serde_json::json!({
            "ensemble": { "function": "product", "m": 1, "n": 8, "entry_law": "complex-gaussian" },
            "trials": 2,
            "seed": 42,
            "mode": "singular"
        }),
    );
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    for out in [&out_a, &out_b] {
        let (code, _, _) = run(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
    }
    let a = fs::read(out_a.join("trial_0000.csv")).unwrap();
    let b = fs::read(out_b.join("trial_0000.csv")).unwrap();
    assert_eq!(a, b, "same config and seed must be byte-identical");
    let rows = data_rows(&out_a.join("trial_0000.csv"));
    assert_eq!(rows.len(), 8);
    // Descending singular values.
    for w in rows.windows(2) {
        assert!(w[0][0] >= w[1][0]);
    }
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["report"]["failures"], 0);
    assert_eq!(summary["report"]["values_per_trial"], 8);
}

#[test]
fn simulate_zero_trials_warns_and_succeeds() {
    let dir = tmp_dir("zerotrials");
    let cfg = write_config(
        &dir,
        "sim.json",
        &serde_json::json!({
            "ensemble": { "function": "product", "m": 1, "n": 8, "entry_law": "rademacher" },
            "trials": 0,
            "seed": 1,
            "mode": "singular"
        }),
    );
    let out = dir.join("out");
    let (code, _, err) = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(err.contains("warning"));
    assert!(out.join("summary.json").exists());
}

#[test]
fn solve_circular_field_and_sidecar() {
    let dir = tmp_dir("solve");
    let cfg = write_config(
        &dir,
        "solve.json",
        &serde_json::json!({
            "law": { "id": "circular-ev" },
            "radial": { "r0": 1e-3, "r_max": 1.3, "step": 1e-3 }
        }),
    );
    let out = dir.join("out");
    let (code, _, _) = run(&["solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let rows = data_rows(&out.join("solve.csv"));
    for r in rows.iter().step_by(100) {
        let want = if r[0] <= 1.0 { r[0] * r[0] } else { 1.0 };
        assert!((r[1] - want).abs() < 1e-6, "psi({}) = {}", r[0], r[1]);
        assert!(r[4] < 1e-8, "residual column {}", r[4]);
    }
    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("transitions.json")).unwrap()).unwrap();
    let transitions = sidecar["report"]["transitions"].as_array().unwrap();
    assert_eq!(transitions.len(), 1);
    assert!((transitions[0].as_f64().unwrap() - 1.0).abs() < 5e-3);
}

#[test]
fn compare_accepts_matching_law_and_rejects_wrong_one() {
    let dir = tmp_dir("compare");
    let sim_cfg = write_config(
        &dir,
        "sim.json",
        &serde_json::json!({
            "ensemble": { "function": "product", "m": 1, "n": 256, "entry_law": "complex-gaussian" },
            "trials": 1,
            "seed": 7,
            "mode": "singular"
        }),
    );
    let sim_out = dir.join("spectra");
    let (code, _, _) = run(&["simulate", "--config", sim_cfg.to_str().unwrap(), "--out", sim_out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let spectra = sim_out.join("trial_0000.csv");

    let good = write_config(
        &dir,
        "good.json",
        &serde_json::json!({
            "spectra": [spectra.to_str().unwrap()],
            "law": { "id": "marchenko-pastur", "y": 1.0 },
            "convention": "squared",
            "threshold": 0.1
        }),
    );
    let (code, _, _) = run(&["compare", "--config", good.to_str().unwrap(), "--out", dir.join("good").to_str().unwrap()]);
    assert_eq!(code, 0, "Ginibre squared singular values match MP(1)");

    let bad = write_config(
        &dir,
        "bad.json",
        &serde_json::json!({
            "spectra": [spectra.to_str().unwrap()],
            "law": { "id": "spherical-sv" },
            "convention": "squared",
            "threshold": 0.1
        }),
    );
    let (code, stdout, _) = run(&["compare", "--config", bad.to_str().unwrap(), "--out", dir.join("bad").to_str().unwrap()]);
    assert_eq!(code, 4, "wrong law must fail statistically: {stdout}");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("bad").join("compare.json")).unwrap())
            .unwrap();
    assert!(report["report"]["value"].as_f64().unwrap() > 0.1);
}

#[test]
fn universality_small_run_passes() {
    let dir = tmp_dir("universality");
    let cfg = write_config(
        &dir,
        "uni.json",
        &serde_json::json!({
            "ensemble": { "function": "product", "m": 2, "n": 128, "entry_law": "rademacher" },
            "entry_law_b": "real-gaussian",
            "trials": 10,
            "seed": 11
        }),
    );
    let out = dir.join("out");
    let (code, stdout, _) = run(&["universality", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{stdout}");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("universality.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["pairs"], 10);
    assert_eq!(report["report"]["pass"], true);
}

#[test]
fn config_errors_exit_2() {
    let dir = tmp_dir("configerr");
    // Unknown law lists the catalog.
    let unknown_law = write_config(
        &dir,
        "unknown.json",
        &serde_json::json!({
            "law": { "id": "no-such-law" },
            "grid": { "min": 0.0, "max": 1.0, "step": 0.1 }
        }),
    );
    let (code, _, err) = run(&["law", "--config", unknown_law.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("marchenko-pastur") && err.contains("spherical-ev"));

    // Unknown fields are rejected up front.
    let extra_field = write_config(
        &dir,
        "extra.json",
        &serde_json::json!({
            "law": { "id": "circular-ev" },
            "grid": { "min": 0.0, "max": 1.0, "step": 0.1 },
            "typo_field": 3
        }),
    );
    let (code, _, err) = run(&["law", "--config", extra_field.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("unknown field"));

    // Convention mismatches against a law are configuration errors.
    fs::write(dir.join("fake.csv"), "# header\ns\n1.0\n0.5\n").unwrap();
    let raw_vs_law = write_config(
        &dir,
        "rawlaw.json",
        &serde_json::json!({
            "spectra": [dir.join("fake.csv").to_str().unwrap()],
            "law": { "id": "marchenko-pastur", "y": 1.0 },
            "convention": "raw",
            "threshold": 0.5
        }),
    );
    let (code, _, err) = run(&["compare", "--config", raw_vs_law.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("squared"), "{err}");
    let radial_vs_1d = write_config(
        &dir,
        "radlaw.json",
        &serde_json::json!({
            "spectra": [dir.join("fake.csv").to_str().unwrap()],
            "law": { "id": "marchenko-pastur", "y": 1.0 },
            "convention": "radial",
            "threshold": 0.5
        }),
    );
    let (code, _, _) = run(&["compare", "--config", radial_vs_1d.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(code, 2);
}
