use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn trispec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trispec")).args(args).output().expect("binary runs")
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).expect("valid JSON")
}

fn single_line_error(out: &Output) -> Value {
    assert!(!out.status.success());
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(text.trim_end().lines().count(), 1, "{text}");
    json(text.as_bytes())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const MODE_ONE: &str = r#"{"type":"fourier","coeffs":[{"n":1,"re":1.0,"im":0.0}]}"#;

#[test]
fn forward_single_mode() {
    let dir = tempfile::tempdir().unwrap();
    let potential = write(dir.path(), "v.json", MODE_ONE);
    let out = dir.path().join("spectrum.json");
    let status = trispec(&[
        "forward",
        "--potential",
        &potential,
        "--alpha",
        "5",
        "--trunc",
        "16",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let data = json(&fs::read(&out).unwrap());
    assert_eq!(data["truncation_N"], 16);
    let moved: Vec<f64> = data["entries"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e["tag"] == "sigma2")
        .map(|e| e["value"].as_f64().unwrap())
        .collect();
    let expected = (2.0 * std::f64::consts::PI).powi(3) + 5.0;
    assert_eq!(moved.len(), 1);
    assert!((moved[0] - expected).abs() < 1e-10);
    let csv = fs::read_to_string(dir.path().join("spectrum_secular.csv")).unwrap();
    assert!(csv.starts_with("z,q\n"));
    assert_eq!(csv.lines().count(), 1 + 40 * 16 + 2);
}

#[test]
fn forward_is_deterministic_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let potential = write(dir.path(), "v.json", r#"{"type":"named","name":"g"}"#);
    let args = ["forward", "--potential", &potential, "--alpha", "-2.5", "--trunc", "10"];
    let a = trispec(&args);
    let b = trispec(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let csv = trispec(&[&args[..], &["--format", "csv"]].concat());
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("value,multiplicity,tag\n"));
    assert_eq!(text.lines().count(), 1 + 21);
}

#[test]
fn inverse4_from_forward_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = dir.path().join("bundle");
    fs::create_dir(&bundle).unwrap();
    let h = 0.5f64.sqrt();
    let potentials = [(
        "sigma_v.json",
        format!(r#"{{"type":"fourier","coeffs":[{{"n":0,"re":{h},"im":0.0}},{{"n":1,"re":0.0,"im":{h}}}]}}"#),
    )];
    let v = write(dir.path(), "v.json", &potentials[0].1);
    let spectrum = |name: &str, pot: &str| {
        let out = bundle.join(name);
        let r = trispec(&[
            "forward",
            "--potential",
            pot,
            "--alpha",
            "1.5",
            "--trunc",
            "16",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
        fs::remove_file(bundle.join(format!("{}_secular.csv", name.trim_end_matches(".json")))).unwrap();
    };
    spectrum("sigma_v.json", &v);
    // v + g and v + ig written out as explicit coefficient files over the window
    for (name, rotate) in [("sigma_v_plus_g.json", false), ("sigma_v_plus_ig.json", true)] {
        let mut coeffs = Vec::new();
        for n in -16i64..=16 {
            let (gr, gi) = if n == 0 { (0.5, 0.0) } else { (0.0, -1.0 / (2.0 * std::f64::consts::PI * n as f64)) };
            let (gr, gi) = if rotate { (-gi, gr) } else { (gr, gi) };
            let (vr, vi) = match n {
                0 => (h, 0.0),
                1 => (0.0, h),
                _ => (0.0, 0.0),
            };
            coeffs.push(format!(r#"{{"n":{n},"re":{:?},"im":{:?}}}"#, vr + gr, vi + gi));
        }
        let p = write(dir.path(), "shifted.json", &format!(r#"{{"type":"fourier","coeffs":[{}]}}"#, coeffs.join(",")));
        spectrum(name, &p);
    }
    let out = trispec(&["inverse4", "--bundle", bundle.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let result = json(&out.stdout);
    assert!((result["alpha"].as_f64().unwrap() - 1.5).abs() < 1e-8);
    for c in result["coefficients"].as_array().unwrap() {
        let (re, im) = (c["re"].as_f64().unwrap(), c["im"].as_f64().unwrap());
        let (er, ei) = match c["n"].as_i64().unwrap() {
            0 => (h, 0.0),
            1 => (0.0, h),
            _ => (0.0, 0.0),
        };
        assert!((re - er).abs() < 1e-8 && (im - ei).abs() < 1e-8, "{c}");
    }
    assert_eq!(result["branch"], "zero_not_in_spectrum");

    fs::remove_file(bundle.join("sigma_v_plus_ig.json")).unwrap();
    let err = single_line_error(&trispec(&["inverse4", "--bundle", bundle.to_str().unwrap()]));
    assert_eq!(err["error"], "ConfigError");
}

#[test]
fn inverse3_equal_spectra_report_zero() {
    let dir = tempfile::tempdir().unwrap();
    let zero = write(dir.path(), "z.json", r#"{"type":"fourier","coeffs":[]}"#);
    for name in ["sigma_v.json", "sigma_v_plus_h.json"] {
        let out = dir.path().join(name);
        assert!(trispec(&[
            "forward",
            "--potential",
            &zero,
            "--alpha",
            "7",
            "--trunc",
            "8",
            "--out",
            out.to_str().unwrap()
        ])
        .status
        .success());
    }
    let out = trispec(&["inverse3", "--bundle", dir.path().to_str().unwrap(), "--symmetry", "even"]);
    assert!(out.status.success());
    let result = json(&out.stdout);
    assert!(result["alpha"].is_null());
    assert!(result["coefficients"].as_array().unwrap().iter().all(|c| c["re"] == 0.0 && c["im"] == 0.0));
}

#[test]
fn verify_round_trip() {
    let out = trispec(&["verify", "--seed", "7"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out.stdout);
    assert!(report["max_coefficient_error"].as_f64().unwrap() <= 1e-6);
    assert!(report["alpha_relative_error"].as_f64().unwrap() <= 1e-6);
    let again = trispec(&["verify", "--seed", "7"]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn verify_respects_thread_cap() {
    let out = Command::new(env!("CARGO_BIN_EXE_trispec"))
        .args(["verify", "--seed", "3", "--format", "csv"])
        .env("TRISPEC_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    let parallel = trispec(&["verify", "--seed", "3", "--format", "csv"]);
    assert_eq!(out.stdout, parallel.stdout);
}

#[test]
fn identities_pass() {
    let out = trispec(&["identities"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = json(&out.stdout);
    assert_eq!(rows.as_array().unwrap().len(), 10);
    assert!(rows.as_array().unwrap().iter().all(|r| r["max_residual"].as_f64().unwrap() <= 1e-10));
}

#[test]
fn errors_are_single_line_json() {
    let dir = tempfile::tempdir().unwrap();
    let potential = write(dir.path(), "v.json", MODE_ONE);
    let err = single_line_error(&trispec(&["forward", "--potential", &potential, "--alpha", "1", "--trunc", "4"]));
    assert_eq!(err["error"], "TruncationTooSmall");
    let err = single_line_error(&trispec(&["forward", "--potential", "/nonexistent.json", "--alpha", "1"]));
    assert_eq!(err["error"], "IoError");
    let broken = write(dir.path(), "broken.json", "{");
    let err = single_line_error(&trispec(&["forward", "--potential", &broken, "--alpha", "1"]));
    assert_eq!(err["error"], "ParseError");
    let err = single_line_error(&trispec(&["forward", "--alpha", "1"]));
    assert_eq!(err["error"], "ConfigError");
    let unnormalized = write(dir.path(), "bundle_v.json", r#"{"type":"fourier","coeffs":[{"n":1,"re":2.0,"im":0.0}]}"#);
    let bundle = dir.path().join("b");
    fs::create_dir(&bundle).unwrap();
    for (name, shift) in
        [("sigma_v.json", None), ("sigma_v_plus_g.json", Some(0.0)), ("sigma_v_plus_ig.json", Some(1.0))]
    {
        let pot = match shift {
            None => unnormalized.clone(),
            Some(rot) => {
                let mut coeffs = Vec::new();
                for n in -8i64..=8 {
                    let (gr, gi) =
                        if n == 0 { (0.5, 0.0) } else { (0.0, -1.0 / (2.0 * std::f64::consts::PI * n as f64)) };
                    let (gr, gi) = if rot == 1.0 { (-gi, gr) } else { (gr, gi) };
                    let vr = if n == 1 { 2.0 } else { 0.0 };
                    coeffs.push(format!(r#"{{"n":{n},"re":{:?},"im":{gi:?}}}"#, vr + gr));
                }
                write(dir.path(), "s.json", &format!(r#"{{"type":"fourier","coeffs":[{}]}}"#, coeffs.join(",")))
            }
        };
        let out = bundle.join(name);
        assert!(trispec(&[
            "forward",
            "--potential",
            &pot,
            "--alpha",
            "1",
            "--trunc",
            "8",
            "--out",
            out.to_str().unwrap()
        ])
        .status
        .success());
    }
    let err = single_line_error(&trispec(&["inverse4", "--bundle", bundle.to_str().unwrap()]));
    assert_eq!(err["error"], "NormMismatch");
}
