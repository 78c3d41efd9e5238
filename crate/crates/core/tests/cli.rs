use std::process::{Command, Output};

use hypercube_hh::cli::{
    run_corpus_entries, ConvexityClass, CorpusCheck, CorpusEntry, CorpusOptions,
};
use serde_json::Value;

fn hhcube(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hhcube"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn sandwich_of_sum_of_squares() {
    let out = hhcube(&["sandwich", "--fn", "x1^2 + x2^2", "--box", "0,1;0,1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "sandwich");
    assert_eq!(v["inputs"]["fn"], "x1^2 + x2^2");
    assert_eq!(v["exit_status"], 0);
    let b = &v["results"][0]["bounds"];
    assert_eq!(b["lower"].as_f64(), Some(0.5));
    assert_eq!(b["upper"].as_f64(), Some(1.0));
    assert!((b["mean"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(b["verified"], true);
}

#[test]
fn sandwich_of_product_is_tight() {
    let out = hhcube(&["sandwich", "--fn", "x1*x2", "--box", "0,1;0,1"]);
    assert_eq!(out.status.code(), Some(0));
    let b = &json(&out)["results"][0]["bounds"];
    for key in ["lower", "mean", "upper"] {
        assert!((b[key].as_f64().unwrap() - 0.25).abs() < 1e-12, "{key}");
    }
    for key in ["left_margin", "right_margin"] {
        assert!(b[key].as_f64().unwrap().abs() < 1e-12, "{key}");
    }
}

#[test]
fn asymmetric_weight_is_rejected() {
    let out = hhcube(&["fejer", "--fn", "x1^2", "--weight", "x1", "--box", "0,1"]);
    assert_eq!(out.status.code(), Some(1));
    let r = &json(&out)["results"][0];
    assert_eq!(r["reason"], "weight falsified: asymmetric");
    let w = &r["properties"][0]["verdict"]["witness"];
    assert_eq!(w["kind"], "asymmetry");
    assert_eq!(w["x"].as_array().unwrap().len(), 1);
    assert!(r.get("bounds").is_none());
}

#[test]
fn symmetric_weight_passes() {
    let out = hhcube(&[
        "fejer",
        "--fn",
        "x1^2",
        "--weight",
        "x1*(1 - x1)",
        "--box",
        "0,1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let mean = json(&out)["results"][0]["bounds"]["mean"].as_f64().unwrap();
    assert!((mean - 0.3).abs() < 1e-10);
}

#[test]
fn parse_errors_carry_spans() {
    let out = hhcube(&["sandwich", "--fn", "x1 +* 2", "--box", "0,1"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["exit_status"], 2);
    assert_eq!(v["error"]["span"]["start"], 4);
    assert_eq!(v["error"]["span"]["end"], 5);
    assert!(!out.stderr.is_empty());
}

#[test]
fn usage_errors_exit_two() {
    let dim = hhcube(&["sandwich", "--fn", "x1*x3", "--box", "0,1;0,1"]);
    assert_eq!(dim.status.code(), Some(2));
    assert!(json(&dim)["error"]["message"]
        .as_str()
        .unwrap()
        .contains("x3"));

    let missing = hhcube(&["sandwich", "--box", "0,1"]);
    assert_eq!(missing.status.code(), Some(2));

    let tol = hhcube(&["sandwich", "--fn", "x1", "--box", "0,1", "--tolerance", "0"]);
    assert_eq!(tol.status.code(), Some(2));

    let degenerate = hhcube(&["sandwich", "--fn", "x1", "--box", "1,1"]);
    assert_eq!(degenerate.status.code(), Some(2));
}

#[test]
fn concave_direction() {
    let convex_claim = hhcube(&["sandwich", "--fn", "-(x1^2)", "--box", "0,1"]);
    assert_eq!(convex_claim.status.code(), Some(1));
    let concave = hhcube(&["sandwich", "--fn", "-(x1^2)", "--box", "0,1", "--concave"]);
    assert_eq!(concave.status.code(), Some(0));
    assert_eq!(
        json(&concave)["results"][0]["bounds"]["direction"],
        "concave_reversed"
    );
}

#[test]
fn convexity_classes() {
    let args = [
        "check-convexity",
        "--fn",
        "x1*x2",
        "--box",
        "0,1;0,1",
        "--trials",
        "2000",
    ];
    assert_eq!(hhcube(&args).status.code(), Some(0));
    let joint = hhcube(&[&args[..], &["--class", "joint"]].concat());
    assert_eq!(joint.status.code(), Some(1));
    let w = &json(&joint)["results"][0]["properties"][0]["verdict"]["witness"];
    assert_eq!(w["kind"], "convexity");
}

#[test]
fn jensen_command() {
    let out = hhcube(&[
        "jensen",
        "--fn",
        "x1^2 + exp(x2)",
        "--points",
        "0,0.5,1;-1,2",
        "--alphas",
        "0.2,0.3,0.5;0.25,0.75",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let j = &json(&out)["results"][0]["jensen"];
    assert!(j["gap"].as_f64().unwrap() >= 0.0);

    let bad = hhcube(&[
        "jensen", "--fn", "x1", "--points", "0,1", "--alphas", "0.5,0.6",
    ]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn matrix_sandwich_command() {
    let out = hhcube(&[
        "matrix-sandwich",
        "--fn",
        "x1^2 + x2^2 + x3^2 + x4^2",
        "--matrix-a",
        "0,0,0,0",
        "--matrix-b",
        "1,1,1,1",
        "--rows",
        "2",
        "--quad-nodes",
        "8",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let b = &json(&out)["results"][0]["bounds"];
    assert_eq!(b["lower"].as_f64(), Some(1.0));
    assert_eq!(b["upper"].as_f64(), Some(2.0));
    assert!((b["mean"].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-8);
}

#[test]
fn corpus_json_and_csv() {
    let out = hhcube(&["corpus", "--trials", "2000"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let total = v["summary"]["total"].as_u64().unwrap();
    assert_eq!(v["summary"]["failed"], 0);
    assert_eq!(v["results"].as_array().unwrap().len() as u64, total);
    for r in v["results"].as_array().unwrap() {
        assert!(r["provenance"].as_str().is_some_and(|p| !p.is_empty()));
    }

    let csv = hhcube(&["corpus", "--trials", "2000", "--format", "csv"]);
    assert_eq!(csv.status.code(), Some(0));
    let text = String::from_utf8(csv.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("name,lower,mean,upper,quad_error,verified")
    );
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len() as u64, total);
    assert!(rows
        .iter()
        .all(|r| r.split(',').count() == 6 && r.ends_with(",true")));
}

#[test]
fn out_path_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let args = [
        "corpus",
        "--trials",
        "1000",
        "--seed",
        "7",
        "--out",
        path.to_str().unwrap(),
    ];
    let first = hhcube(&args);
    assert_eq!(first.status.code(), Some(0));
    assert!(first.stdout.is_empty());
    let a = std::fs::read(&path).unwrap();
    hhcube(&args);
    assert_eq!(a, std::fs::read(&path).unwrap());

    let parallel = hhcube(&["corpus", "--trials", "1000", "--seed", "7", "--parallel"]);
    let p: Value = serde_json::from_slice(&parallel.stdout).unwrap();
    let s: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(p["results"], s["results"]);

    let stdout = hhcube(&["corpus", "--trials", "1000", "--seed", "7", "--out", "-"]);
    assert_eq!(stdout.stdout, a);
}

#[test]
fn corpus_negative_control() {
    let entries = vec![
        CorpusEntry::new(
            "ok",
            "x1^2",
            CorpusCheck::Sandwich {
                bounds: "0,1".into(),
            },
            ConvexityClass::Convex,
            "control",
        ),
        CorpusEntry::new(
            "neg",
            "-(x1^2)",
            CorpusCheck::Sandwich {
                bounds: "0,1".into(),
            },
            ConvexityClass::Convex,
            "control",
        ),
    ];
    let s = run_corpus_entries(
        &entries,
        &CorpusOptions {
            trials: 1000,
            ..CorpusOptions::default()
        },
    )
    .unwrap();
    assert_eq!((s.total, s.passed, s.failed), (2, 1, 1));
    let neg = &s.results[1];
    assert!(!neg.passed);
    let witness = neg.properties[0].verdict.witness.as_ref().expect("witness");
    assert!(witness.violation > 0.0);
}
