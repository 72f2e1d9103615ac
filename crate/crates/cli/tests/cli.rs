use std::path::PathBuf;

use assert_cmd::Command;
use serde_json::Value;
use walshcap::distinguisher::{monte_carlo, Decider};
use walshcap::infotheory::{capacity, detection_channel};
use walshcap::sampling::Planner;
use walshcap::Distribution;

fn data(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("tests/data");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn cmd() -> Command {
    Command::cargo_bin("walshcap").unwrap()
}

fn run_ok(args: &[&str]) -> Value {
    let out = cmd().args(args).output().unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn exit_code(args: &[&str]) -> Option<i32> {
    cmd().args(args).output().unwrap().status.code()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

fn round12(x: f64) -> f64 {
    format!("{x:.11e}").parse().unwrap()
}

#[test]
fn fwt_histogram_matches_golden_file() {
    let out = cmd()
        .args(["fwt", "--input", &data("histogram.csv")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let golden = std::fs::read_to_string(data("histogram.fwt.golden.json")).unwrap();
    let expected = golden.replace("\r\n", "\n");
    assert_eq!(String::from_utf8(out.stdout).unwrap(), expected);
}

#[test]
fn fwt_counts_and_normalized() {
    let v = run_ok(&["fwt", "--input", &data("histogram.csv")]);
    let r = &v["result"];
    assert_eq!(num(&r["spectrum"][0]), 160.0);
    assert_eq!(num(&r["spectrum"][3]), 32.0);
    assert_eq!(r["top"][0]["index"], 3);
    assert_eq!(r["top"][0]["pattern"], serde_json::json!([0, 1, 1]));

    let v = run_ok(&["fwt", "--input", &data("histogram.csv"), "--normalize"]);
    let r = &v["result"];
    assert_eq!(num(&r["spectrum"][0]), 1.0);
    assert_eq!(num(&r["spectrum"][3]), 0.2);
    assert_eq!(r["probabilities"], true);
}

#[test]
fn fwt_top_is_truncated_to_the_support() {
    let v = run_ok(&[
        "fwt",
        "--input",
        &data("biased_bit.json"),
        "--normalized",
        "--top",
        "9",
    ]);
    assert_eq!(v["result"]["top"].as_array().unwrap().len(), 1);
    assert_eq!(v["warnings"].as_array().unwrap().len(), 1);
}

#[test]
fn plan_examples() {
    let v = run_ok(&["plan", "--bias", "0.015625"]);
    assert_eq!(v["result"]["plan"]["min_samples"], 22714);
    let v = run_ok(&["plan", "--bias", "2^-6"]);
    assert_eq!(v["result"]["plan"]["min_samples"], 22714);

    let v = run_ok(&["plan", "--coeffs", "2^-6.2,2^-6.2", "--N", "2^40"]);
    assert_eq!(v["result"]["plan"]["condition_met"], true);
    assert_eq!(v["result"]["plan"]["sample_budget"], 1u64 << 40);

    let v = run_ok(&["plan", "--bias", "0.1", "--N", "100"]);
    assert_eq!(v["result"]["plan"]["condition_met"], false);
    assert!(num(&v["result"]["plan"]["margin"]) < 0.0);
    assert_eq!(v["warnings"].as_array().unwrap().len(), 1);

    let v = run_ok(&["plan", "--input", &data("histogram.csv")]);
    assert_eq!(v["result"]["source"]["kind"], "distribution");
}

#[test]
fn capacity_methods() {
    let input = data("bias_010.json");
    let approx = run_ok(&[
        "capacity",
        "--input",
        &input,
        "--normalized",
        "--method",
        "approx",
    ]);
    let approx = num(&approx["result"]["capacity_bits"]);
    assert!((approx - 1.80336880111e-3).abs() < 1e-14);

    let ba = run_ok(&["capacity", "--input", &input, "--normalized"]);
    let r = &ba["result"];
    assert_eq!(r["method"], "blahut-arimoto");
    assert!((num(&r["capacity_bits"]) - approx).abs() / approx < 0.02);
    assert!(num(&r["upper_bound_bits"]) >= num(&r["capacity_bits"]));

    let general = run_ok(&[
        "capacity",
        "--input",
        &input,
        "--normalized",
        "--method",
        "general",
    ]);
    assert!(num(&general["result"]["p0_star"]) > 0.0);

    let uniform = run_ok(&[
        "capacity",
        "--input",
        &data("uniform4.json"),
        "--normalized",
    ]);
    assert_eq!(num(&uniform["result"]["capacity_bits"]), 0.0);
}

#[test]
fn simulate_examples() {
    let args = [
        "simulate",
        "--input",
        &data("bias_010.json"),
        "--normalized",
        "--N",
        "555",
        "--trials",
        "1000",
        "--seed",
        "42",
    ];
    let v = run_ok(&args);
    let mean = num(&v["result"]["mean_error"]);
    assert!((0.08..=0.16).contains(&mean), "{mean}");

    let first = cmd().args(args).output().unwrap().stdout;
    let second = cmd().args(args).output().unwrap().stdout;
    assert_eq!(first, second);

    let v = run_ok(&[
        "simulate",
        "--input",
        &data("bias_010.json"),
        "--normalized",
        "--N",
        "1",
        "--trials",
        "1",
    ]);
    assert_eq!(v["result"]["trials"], 1);

    let v = run_ok(&[
        "simulate",
        "--input",
        &data("histogram.csv"),
        "--N",
        "160",
        "--trials",
        "50",
        "--decider",
        "spectral",
        "--alpha",
        "0.01",
    ]);
    assert_eq!(v["result"]["decider"]["name"], "spectral");
}

#[test]
fn renyi_examples() {
    let v = run_ok(&["renyi", "--input", &data("biased_bit.json"), "--normalized"]);
    let ratio = num(&v["result"]["conjecture"]["ratio"]);
    assert!((ratio - 1.0034).abs() < 1e-3, "{ratio}");

    let v = run_ok(&["renyi", "--input", &data("uniform4.json"), "--normalized"]);
    assert_eq!(v["result"]["conjecture"]["degenerate"], true);
    assert!(v["result"]["conjecture"]["ratio"].is_null());
    assert!(!v["warnings"].as_array().unwrap().is_empty());

    let v = run_ok(&[
        "renyi",
        "--input",
        &data("point_mass8.json"),
        "--alpha",
        "2",
    ]);
    let d = num(&v["result"]["divergence_nats"]);
    assert!((d - 3.0 * std::f64::consts::LN_2).abs() < 1e-10);
    assert!(v["result"]["conjecture"].is_null());
}

#[test]
fn exit_codes() {
    assert_eq!(
        exit_code(&["fwt", "--input", &data("histogram.csv")]),
        Some(0)
    );
    assert_eq!(exit_code(&["plan", "--bias", "0"]), Some(2));
    assert_eq!(exit_code(&["plan", "--mass", "0"]), Some(2));
    assert_eq!(exit_code(&["plan", "--bias", "1.5"]), Some(2));
    assert_eq!(exit_code(&["plan"]), Some(2));
    assert_eq!(
        exit_code(&["plan", "--bias", "0.1", "--mass", "0.01"]),
        Some(2)
    );
    assert_eq!(exit_code(&["plan", "--coeffs", "0.5,2"]), Some(2));
    assert_eq!(
        exit_code(&[
            "renyi",
            "--input",
            &data("biased_bit.json"),
            "--normalized",
            "--alpha",
            "1"
        ]),
        Some(2)
    );
    assert_eq!(
        exit_code(&[
            "capacity",
            "--input",
            &data("point_mass8.json"),
            "--method",
            "general"
        ]),
        Some(2)
    );
    assert_eq!(
        exit_code(&[
            "capacity",
            "--input",
            &data("histogram.csv"),
            "--method",
            "bogus"
        ]),
        Some(2)
    );
    assert_eq!(
        exit_code(&[
            "simulate",
            "--input",
            &data("histogram.csv"),
            "--N",
            "10",
            "--decider",
            "bogus"
        ]),
        Some(2)
    );
    assert_eq!(
        exit_code(&["fwt", "--input", &data("missing.csv")]),
        Some(2)
    );
    assert_eq!(
        exit_code(&["fwt", "--input", &data("histogram.csv"), "--top", "0"]),
        Some(2)
    );
    assert_eq!(exit_code(&["nonsense"]), Some(2));
    assert_eq!(exit_code(&["--version"]), Some(0));
}

#[test]
fn malformed_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("three.json", "[1, 2, 3]"),
        ("fraction.json", "[1.5, 2]"),
        ("negative.csv", "0,1\n1,-2\n"),
        ("zeros.csv", "index,count\n0,0\n1,0\n"),
        ("garbage.csv", "hello world\n"),
        ("probabilities.json", "[0.6, 0.3]"),
    ];
    for (name, text) in cases {
        let path = dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        let normalized = name.starts_with("probabilities");
        let mut args = vec!["fwt", "--input", path.to_str().unwrap()];
        if normalized {
            args.push("--normalized");
            args[0] = "capacity";
        }
        assert_eq!(exit_code(&args), Some(2), "{name}");
    }
}

#[test]
fn json_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = cmd()
        .args(["plan", "--bias", "0.1", "--json", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["result"]["plan"]["min_samples"], 555);
}

#[test]
fn input_digest_tracks_input_bytes() {
    let a = run_ok(&["plan", "--bias", "0.1"]);
    let b = run_ok(&["plan", "--bias", "0.1"]);
    let c = run_ok(&["plan", "--bias", "0.2"]);
    assert_eq!(a["input_digest"], b["input_digest"]);
    assert_ne!(a["input_digest"], c["input_digest"]);

    let csv = run_ok(&[
        "capacity",
        "--input",
        &data("histogram.csv"),
        "--method",
        "approx",
    ]);
    let fwt = run_ok(&["fwt", "--input", &data("histogram.csv")]);
    assert_eq!(csv["input_digest"], fwt["input_digest"]);
}

#[test]
fn outputs_equal_library_values() {
    let f = Distribution::from_counts(&[24, 18, 16, 26, 22, 14, 16, 24]).unwrap();

    let plan = Planner::default()
        .plan_for_distribution(&f, Some(1000))
        .unwrap();
    let v = run_ok(&["plan", "--input", &data("histogram.csv"), "--N", "1000"]);
    let p = &v["result"]["plan"];
    assert_eq!(p["min_samples"], plan.min_samples);
    assert_eq!(num(&p["spectral_mass"]), round12(plan.spectral_mass));
    assert_eq!(num(&p["min_bias"]), round12(plan.min_bias));
    assert_eq!(num(&p["snr"]), round12(plan.snr));
    assert_eq!(num(&p["margin"]), round12(plan.margin));
    assert_eq!(p["condition_met"], plan.condition_met);

    let ba = capacity(&detection_channel(&f)).unwrap();
    let v = run_ok(&["capacity", "--input", &data("histogram.csv")]);
    assert_eq!(
        num(&v["result"]["capacity_bits"]),
        round12(ba.capacity_bits)
    );
    assert_eq!(v["result"]["iterations"], ba.iterations);

    let report = monte_carlo(&f, 160, 200, Decider::Llr, 9).unwrap();
    let v = run_ok(&[
        "simulate",
        "--input",
        &data("histogram.csv"),
        "--N",
        "160",
        "--trials",
        "200",
        "--seed",
        "9",
    ]);
    assert_eq!(
        num(&v["result"]["error_signal"]),
        round12(report.error_signal)
    );
    assert_eq!(
        num(&v["result"]["error_noise"]),
        round12(report.error_noise)
    );
}

#[test]
fn reports_validate_against_schema() {
    let schema_path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("schema/report.schema.json");
    let schema: Value =
        serde_json::from_str(&std::fs::read_to_string(schema_path).unwrap()).unwrap();
    let validator = jsonschema::JSONSchema::compile(&schema).unwrap();

    let invocations: Vec<Vec<String>> = [
        vec!["fwt", "--input", &data("histogram.csv")],
        vec![
            "fwt",
            "--input",
            &data("biased_bit.json"),
            "--normalized",
            "--top",
            "3",
        ],
        vec!["plan", "--bias", "0.015625"],
        vec!["plan", "--coeffs", "2^-6.2,-2^-6.2", "--N", "2^40"],
        vec!["plan", "--input", &data("histogram.csv"), "--N", "10"],
        vec![
            "capacity",
            "--input",
            &data("bias_010.json"),
            "--normalized",
            "--method",
            "approx",
        ],
        vec!["capacity", "--input", &data("histogram.csv")],
        vec![
            "capacity",
            "--input",
            &data("histogram.csv"),
            "--method",
            "general",
        ],
        vec![
            "simulate",
            "--input",
            &data("histogram.csv"),
            "--N",
            "50",
            "--trials",
            "20",
        ],
        vec![
            "simulate",
            "--input",
            &data("histogram.csv"),
            "--N",
            "2",
            "--trials",
            "5",
            "--decider",
            "spectral",
        ],
        vec!["renyi", "--input", &data("biased_bit.json"), "--normalized"],
        vec!["renyi", "--input", &data("uniform4.json"), "--normalized"],
        vec![
            "renyi",
            "--input",
            &data("point_mass8.json"),
            "--alpha",
            "3",
        ],
    ]
    .into_iter()
    .map(|a| a.into_iter().map(String::from).collect())
    .collect();

    for args in invocations {
        let v = run_ok(&args.iter().map(String::as_str).collect::<Vec<_>>());
        let messages: Vec<String> = match validator.validate(&v) {
            Ok(()) => Vec::new(),
            Err(errors) => errors
                .map(|e| format!("{} at {}", e, e.instance_path))
                .collect(),
        };
        assert!(
            messages.is_empty(),
            "{args:?} violates schema: {messages:?}"
        );
    }

    let mut broken = run_ok(&["plan", "--bias", "0.1"]);
    broken["result"]["plan"]["min_samples"] = Value::from(-1);
    assert!(!validator.is_valid(&broken));
}
