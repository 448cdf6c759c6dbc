use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn wwm(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wwm"))
        .arg("--out")
        .arg(dir)
        .args(args)
        .env_remove("WWM_SEED")
        .env_remove("WWM_HBAR")
        .env_remove("WWM_WORKERS")
        .env_remove("WWM_ACTION_SCALE")
        .output()
        .unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn artifacts(dir: &Path) -> Value {
    json(&dir.join("manifest.json"))["artifacts"].clone()
}

#[test]
fn unknown_subcommand_is_a_usage_error_without_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let r = wwm(&out, &["frobnicate"]);
    assert_eq!(r.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn schema_violation_and_missing_file_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, r#"{"nvars": 2, "terms": [], "extra": 1}"#).unwrap();
    let out = tmp.path().join("run");
    let r = wwm(&out, &["quantize", "--poly", bad.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2), "{}", String::from_utf8_lossy(&r.stderr));
    let missing = tmp.path().join("none.json");
    let r = wwm(&out, &["quantize", "--poly", missing.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(4));
    assert!(!out.exists());
}

#[test]
fn billiard_escape_is_a_numerical_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    // Outside the table from the start.
    let r = wwm(&out, &["billiard", "--start", "3,0,1,0", "--t-end", "0.1"]);
    assert_eq!(r.status.code(), Some(3), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(!out.exists());
}

#[test]
fn gaussian_decoherence_envelope_matches_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let (sigma, hbar) = (0.5, 0.8);
    let r = wwm(&out, &["--hbar", "0.8", "decohere", "--profile", "gaussian", "--width", "0.5", "--steps", "400"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let text = std::fs::read_to_string(out.join("decohere.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,total_re,total_im,singular_re,regular_envelope"));
    let mut checked = 0;
    let mut singular = None;
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let exact = (-sigma * sigma * v[0] * v[0] / (2.0 * hbar * hbar)).exp();
        if exact >= 1e-3 {
            assert!((v[4] - exact).abs() <= 0.02 * exact, "t = {}: {} vs {exact}", v[0], v[4]);
            checked += 1;
        }
        // The singular term does not evolve.
        assert_eq!(*singular.get_or_insert(v[3]), v[3]);
    }
    assert!(checked > 20);
    let summary = json(&out.join("summary.json"));
    let t = summary["decoherence_time"].as_f64().unwrap();
    let exact = hbar / sigma * (2.0 * 100f64.ln()).sqrt();
    assert!((t - exact).abs() < 0.02 * exact);
}

#[test]
fn manifest_lists_every_artifact_with_its_checksum() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    assert!(wwm(&out, &["symb", "--oscillator", "2", "--dim", "33"]).status.success());
    let listed: Vec<String> = artifacts(&out).as_array().unwrap().iter().map(|a| a["path"].as_str().unwrap().to_string()).collect();
    let mut on_disk: Vec<String> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).filter(|n| n != "manifest.json").collect();
    on_disk.sort();
    let mut sorted = listed.clone();
    sorted.sort();
    assert_eq!(sorted, on_disk);
    let symbol = std::fs::read(out.join("symbol.csv")).unwrap();
    let entry = artifacts(&out).as_array().unwrap().iter().find(|a| a["path"] == "symbol.csv").unwrap().clone();
    assert_eq!(entry["bytes"].as_u64().unwrap() as usize, symbol.len());
    assert_eq!(entry["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn identical_inputs_give_identical_checksums_for_any_worker_count() {
    let tmp = tempfile::tempdir().unwrap();
    let runs: Vec<Value> = ["1", "3", "1"]
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let out = tmp.path().join(format!("run{k}"));
            let r = wwm(&out, &["--workers", w, "--seed", "11", "walkthrough", "classical-limit"]);
            assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
            artifacts(&out)
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
}

#[test]
fn classical_limit_walkthrough_reports_a_normalized_density() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let r = wwm(&out, &["walkthrough", "classical-limit"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let report = json(&out.join("report.json"));
    assert_eq!(report["pass"], true);
    let d = &report["details"];
    assert!((d["normalization"].as_f64().unwrap() - 1.0).abs() <= 1e-3);
    assert!(d["min_value"].as_f64().unwrap() >= -1e-12);
}

#[test]
fn atlas_round_trip_through_build_verify_and_classical() {
    let tmp = tempfile::tempdir().unwrap();
    let ho = r#"{"nvars":2,"terms":[{"powers":[2,0],"coeff":[0.5,0.0]},{"powers":[0,2],"coeff":[0.5,0.0]}]}"#;
    let h = tmp.path().join("h.json");
    std::fs::write(&h, ho).unwrap();
    let cfg = tmp.path().join("atlas.json");
    std::fs::write(&cfg, format!(r#"{{"hamiltonian":{ho},"epsilon":0.2,"charts":[{{"box":{{"lo":[-2,-2],"hi":[2,2]}},"counts":[401,401]}}]}}"#)).unwrap();
    let specs = tmp.path().join("specs.json");
    std::fs::write(
        &specs,
        format!(r#"{{"hamiltonian":{ho},"eta":0.1,"levels":[{{"chart":0,"levels":[1.0],"weight":1.0}}],"grid":{{"mins":[-2,-2],"maxs":[2,2],"counts":[401,401]}},"ensemble":{{"count":4000,"times":[0,2]}}}}"#),
    )
    .unwrap();
    let built = tmp.path().join("built");
    let scales = ["--hbar", "1e-3", "--action-scale", "10"];
    let mut args = scales.to_vec();
    args.extend(["charts", "build", "--config", cfg.to_str().unwrap()]);
    assert!(wwm(&built, &args).status.success());
    // Default hbar = 1 cannot satisfy hbar << eps^2 << S.
    let refused = wwm(&tmp.path().join("refused"), &["charts", "build", "--config", cfg.to_str().unwrap()]);
    assert_eq!(refused.status.code(), Some(3));

    let atlas = built.join("atlas.json");
    let r = wwm(&tmp.path().join("verify"), &["charts", "verify", "--atlas", atlas.to_str().unwrap(), "--hamiltonian", h.to_str().unwrap()]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    assert_eq!(json(&tmp.path().join("verify/verify.json"))["ok"], true);

    let cl = tmp.path().join("classical");
    let r = wwm(&cl, &["classical", "--atlas", atlas.to_str().unwrap(), "--specs", specs.to_str().unwrap()]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let report = json(&cl.join("report.json"));
    assert!((report["normalization"].as_f64().unwrap() - 1.0).abs() <= 1e-3);
    for p in report["chi_square_p"].as_array().unwrap() {
        assert!(p.as_f64().unwrap() > 0.01);
    }
    let ens = std::fs::read_to_string(cl.join("ensemble.csv")).unwrap();
    assert!(ens.starts_with("t,q0,p0,weight\n"));
    assert_eq!(ens.lines().count(), 1 + 2 * 4000);
}
