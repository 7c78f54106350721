use std::path::Path;
use std::process::Command;

use pinchkit::bounds::{alpha, b_vlachos};
use pinchkit::cli::{run, EXIT_FAILED, EXIT_INPUT, EXIT_OK, EXIT_USAGE};
use serde_json::Value;

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("pinchkit").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_model(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name);
    let mut full = vec!["model"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", path.to_str().unwrap()]);
    let (code, _, err) = invoke(&full);
    assert_eq!(code, EXIT_OK, "{err}");
    path.to_str().unwrap().to_string()
}

#[test]
fn bounds_csv_rows_match_closed_forms() {
    let (code, out, _) = invoke(&[
        "bounds",
        "--n",
        "6",
        "--k-range",
        "2:3",
        "--h-grid",
        "0:2:5",
        "--c",
        "1",
    ]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "n,k,H,c,alpha,b,xu_gu,gamma_k,comparison,b_minus_alpha");
    assert_eq!(lines.len(), 1 + 2 * 5);
    for line in &lines[1..] {
        let f: Vec<&str> = line.split(',').collect();
        let k: u32 = f[1].parse().unwrap();
        let h = match f[2] {
            "1/2" => 0.5,
            "3/2" => 1.5,
            s => s.parse::<f64>().unwrap(),
        };
        let phi = k as f64 * (6.0 - k as f64)
            / (k as f64 * (6.0 - 2.0 * k as f64) + 6.0 * (k as f64 - 1.0) * (6.0 - k as f64));
        let a = (5.0 - 4.0 * phi) * (1.0 + h * h);
        let b = 6.0 * (k as f64 - 1.0) / k as f64
            + 6.0 * (k as f64 - 1.0) * h / (2.0 * (k * k) as f64)
                * (6.0 * h + (36.0 * h * h + 4.0 * (k * (6 - k)) as f64).sqrt());
        assert!((f[4].parse::<f64>().unwrap() - a).abs() < 1e-12, "{line}");
        assert!((f[5].parse::<f64>().unwrap() - b).abs() < 1e-12, "{line}");
        assert!((alpha(6, k, &h, &1.0).unwrap() - a).abs() < 1e-12);
        assert!((b_vlachos(6, k, h).unwrap() - b).abs() < 1e-12);
        let expected = if k == 3 && h == 0.0 {
            "EQUAL"
        } else if b > a {
            "B_GREATER"
        } else {
            "ALPHA_GREATER"
        };
        assert_eq!(f[8], expected, "{line}");
    }
}

#[test]
fn bounds_without_unit_sphere_leaves_b_blank() {
    let (code, out, _) = invoke(&["bounds", "--n", "5", "--h-grid", "1:1:1", "--c", "0"]);
    assert_eq!(code, EXIT_OK);
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[4].parse::<f64>().unwrap(), 50.0 / 17.0);
    assert_eq!(row[5], "");
    assert_eq!(row[8], "");
}

#[test]
fn clifford_model_has_unit_mean_curvature() {
    let (code, out, _) = invoke(&["model", "clifford", "--n", "6", "--r", "1", "--c", "0", "--m", "2"]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    let spec = &v["model_spec"];
    assert_eq!(spec["H"].as_f64().unwrap(), 1.0);
    assert_eq!(spec["H_g"].as_f64().unwrap(), 0.0);
    assert_eq!(spec["H_u"].as_f64().unwrap(), 1.0);
    assert_eq!(v["n"], 6);
}

#[test]
fn exact_models_round_trip_through_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let sphere = write_model(
        dir.path(),
        "s.json",
        &["umbilical", "--n", "5", "--h", "1/2", "--c", "1/4", "--exact"],
    );
    let text = std::fs::read_to_string(&sphere).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["exact"], true);
    assert_eq!(v["c"], "1/4");
    let (code, out, _) = invoke(&["analyze", &sphere]);
    assert_eq!(code, EXIT_OK);
    let s: Value = serde_json::from_str(&out).unwrap();
    assert!((s["H"].as_f64().unwrap() - 0.5).abs() < 1e-15);
    assert!((s["ric_min"].as_f64().unwrap() - 2.0).abs() < 1e-12);

    let (code, out, _) = invoke(&[
        "model", "torus", "--n", "5", "--k", "2", "--r", "1", "--c", "0", "--m", "2", "--exact",
    ]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["model_spec"]["ric_value"], "3");
    assert_eq!(v["model_spec"]["H_g_sq"], "1/50");
}

#[test]
fn classify_reports_errors_per_file() {
    let dir = tempfile::tempdir().unwrap();
    let torus = write_model(
        dir.path(),
        "t.json",
        &["torus", "--n", "6", "--k", "2", "--r", "1", "--c", "0", "--m", "2"],
    );
    let sphere = write_model(dir.path(), "s.json", &["umbilical", "--n", "6", "--h", "1", "--c", "0"]);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"n\": 6, \"c\": 0, \"m\": 1, \"shape_operators\": [[[1]]]}").unwrap();
    let bad = bad.to_str().unwrap();

    let (code, out, _) = invoke(&["classify", &torus, &sphere, "--k", "2"]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["rows"][0]["result"]["verdict"], "EQUALITY_TORUS_STRUCTURE");
    assert_eq!(v["rows"][1]["result"]["verdict"], "STRICT_PINCHED_VANISHING");

    let (code, out, _) = invoke(&["classify", &torus, bad, &sphere, "--k", "2"]);
    assert_eq!(code, EXIT_FAILED);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    assert!(v["rows"][1]["input_error"].is_string(), "{}", v["rows"][1]);

    let (code, _, _) = invoke(&["classify", bad, "--k", "2"]);
    assert_eq!(code, EXIT_INPUT);
}

#[test]
fn exit_codes() {
    assert_eq!(invoke(&["analyze", "/nonexistent/point.json"]).0, EXIT_INPUT);
    assert_eq!(invoke(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(invoke(&["bounds", "--n", "6", "--h-grid", "0:1"]).0, EXIT_USAGE);
    assert_eq!(invoke(&["bounds", "--n", "4", "--c", "1"]).0, EXIT_USAGE);
    assert_eq!(invoke(&["model", "torus", "--n", "5", "--k", "3"]).0, EXIT_USAGE);
    assert_eq!(invoke(&["--help"]).0, EXIT_OK);
}

#[test]
fn verdict_and_optimizer_output() {
    let dir = tempfile::tempdir().unwrap();
    let torus = write_model(
        dir.path(),
        "t.json",
        &["torus", "--n", "7", "--k", "3", "--r", "1", "--c", "1/2", "--m", "3"],
    );
    let (code, out, _) = invoke(&["verdict", &torus, "--q", "3"]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["verdict"], "EQUALITY");
    assert_eq!(v["global_certified"], true);

    let (code, out, _) = invoke(&["optimize-theta", &torus, "--q", "2", "--starts", "4", "--seed", "7"]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["q"], 2);
    assert!(v["value"].as_f64().unwrap() < v["threshold"].as_f64().unwrap());
    assert_eq!(v["plane"].as_array().unwrap().len(), 7);
}

#[test]
fn seed_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    std::fs::write(
        &path,
        "{\"n\": 5, \"c\": 0, \"m\": 1, \"shape_operators\": [[[1,0.3,0,0,0],[0.3,-1,0,0,0],[0,0,0.5,0.2,0],[0,0,0.2,0,0],[0,0,0,0,-0.4]]]}",
    )
    .unwrap();
    let exe = env!("CARGO_BIN_EXE_pinchkit");
    let by_env = Command::new(exe)
        .args(["optimize-theta", path.to_str().unwrap(), "--q", "2"])
        .env("PINCHKIT_SEED", "11")
        .output()
        .unwrap();
    let by_flag = Command::new(exe)
        .args(["optimize-theta", path.to_str().unwrap(), "--q", "2", "--seed", "11"])
        .env_remove("PINCHKIT_SEED")
        .output()
        .unwrap();
    assert_eq!(by_env.status.code(), Some(EXIT_OK));
    assert_eq!(by_env.stdout, by_flag.stdout);
}
