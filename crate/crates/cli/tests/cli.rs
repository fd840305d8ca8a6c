use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn weylab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weylab"))
        .args(args)
        .env_remove("WEYLAB_BUDGET")
        .output()
        .expect("binary runs")
}

fn records(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).expect("one JSON object per line"))
        .collect()
}

fn schema() -> Value {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/run_record.schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Checks the subset of JSON Schema the record schema uses.
fn validate(schema: &Value, rec: &Value) -> Result<(), String> {
    let obj = rec.as_object().ok_or("record is not an object")?;
    for key in schema["required"].as_array().unwrap() {
        let key = key.as_str().unwrap();
        if !obj.contains_key(key) {
            return Err(format!("missing {key}"));
        }
    }
    let props = schema["properties"].as_object().unwrap();
    for (key, v) in obj {
        let prop = props.get(key).ok_or(format!("unexpected field {key}"))?;
        let ok = match prop["type"].as_str().unwrap() {
            "string" => v.is_string(),
            "object" => v.is_object(),
            "number" => v.as_f64().is_some_and(|x| x >= 0.0),
            "integer" => v.is_u64(),
            t => return Err(format!("unsupported type {t}")),
        };
        if !ok {
            return Err(format!("{key} has the wrong type"));
        }
        if let Some(allowed) = prop["enum"].as_array() {
            if !allowed.contains(v) {
                return Err(format!("{key} = {v} not allowed"));
            }
        }
    }
    Ok(())
}

#[test]
fn sigma_example() {
    let out = weylab(&["sigma", "--profile", "10,9,8"]);
    assert!(out.status.success());
    let r = &records(&out)[0];
    assert_eq!(r["subcommand"], "sigma");
    assert_eq!(r["result"]["sigma"]["num"], 1);
    assert_eq!(r["result"]["sigma"]["den"], 10);
    assert_eq!(r["result"]["D"], 27);
}

#[test]
fn meanvalue_full_count() {
    let out = weylab(&[
        "meanvalue",
        "--profile",
        "2",
        "-s",
        "2",
        "-X",
        "10",
        "--arcs",
        "full",
    ]);
    assert!(out.status.success());
    assert_eq!(records(&out)[0]["result"]["count"], 190);
}

#[test]
fn meanvalue_grid_is_ordered_and_additive() {
    let run = |arcs: &str| {
        records(&weylab(&[
            "meanvalue",
            "--profile",
            "3,1",
            "-s",
            "2",
            "-X",
            "8,4",
            "--arcs",
            arcs,
        ]))
    };
    let full = run("full");
    let major = run("major");
    let minor = run("minor");
    assert_eq!(full[0]["params"]["X"], 4);
    assert_eq!(full[1]["params"]["X"], 8);
    for i in 0..2 {
        let total = full[i]["result"]["count"].as_f64().unwrap();
        let sum = major[i]["result"]["value"].as_f64().unwrap()
            + minor[i]["result"]["value"].as_f64().unwrap();
        assert!((sum - total).abs() <= 1e-6 * total);
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(weylab(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(weylab(&["sigma"]).status.code(), Some(2));
    assert_eq!(
        weylab(&["sigma", "--profile", "3,3"]).status.code(),
        Some(2)
    );
    assert_eq!(
        weylab(&["sum", "--phase", "2:banana", "-X", "5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        weylab(&["--epsilon", "0.9", "sigma", "--profile", "3"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn budget_exceeded_exits_3() {
    let out = Command::new(env!("CARGO_BIN_EXE_weylab"))
        .args(["meanvalue", "--profile", "2", "-s", "2", "-X", "10"])
        .env("WEYLAB_BUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
}

#[test]
fn verify_fast_exits_0() {
    let out = weylab(&["verify", "--suite", "fast"]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(out.status.success(), "{err}");
    assert_eq!(err.lines().filter(|l| l.starts_with("[PASS]")).count(), 10);
    assert_eq!(records(&out)[0]["result"]["passed"], true);
}

#[test]
fn every_record_matches_schema() {
    let schema = schema();
    let runs: [&[&str]; 6] = [
        &["sigma", "--profile", "3,1"],
        &["sum", "--phase", "3:pi,1:1/3", "-X", "50"],
        &[
            "arcs", "--alpha", "sqrt2", "-X", "20", "-k", "2", "--l", "1",
        ],
        &[
            "meanvalue",
            "--profile",
            "3,1",
            "-s",
            "2",
            "-X",
            "4,6",
            "--arcs",
            "minor",
        ],
        &[
            "minfrac",
            "--profile",
            "2",
            "-s",
            "2",
            "-X",
            "10,20",
            "--seed",
            "3",
        ],
        &["verify", "--suite", "fast"],
    ];
    for args in runs {
        let out = weylab(args);
        assert!(out.status.success(), "{args:?}");
        for rec in records(&out) {
            validate(&schema, &rec).unwrap_or_else(|e| panic!("{args:?}: {e}"));
        }
    }
    let bad = serde_json::json!({"subcommand": "plot", "params": {}, "result": {}, "elapsed_ms": 1.0, "seed": 0, "version": "x"});
    assert!(validate(&schema, &bad).is_err());
}

#[test]
fn minfrac_replays() {
    let args = [
        "minfrac",
        "--profile",
        "3",
        "-s",
        "3",
        "-X",
        "8,16",
        "--seed",
        "42",
    ];
    let strip = |out: Output| -> Vec<(Value, Value)> {
        records(&out)
            .into_iter()
            .map(|r| (r["params"].clone(), r["result"].clone()))
            .collect()
    };
    let a = strip(weylab(&args));
    let b = strip(weylab(&args));
    assert_eq!(a.len(), 2);
    assert_eq!(a, b);
    let c = strip(weylab(&[
        "minfrac",
        "--profile",
        "3",
        "-s",
        "3",
        "-X",
        "8,16",
        "--seed",
        "43",
    ]));
    assert_ne!(a, c);
}

#[test]
fn minfrac_explicit_coefficients() {
    // x = 7 makes the 1/7 term an integer, up to rounding of 1/7
    let out = weylab(&[
        "minfrac",
        "--profile",
        "2",
        "-s",
        "2",
        "-X",
        "10",
        "--alpha",
        "1/7,sqrt2",
        "--engine",
        "exhaustive",
    ]);
    assert!(out.status.success());
    let r = &records(&out)[0]["result"];
    assert!(r["min"].as_f64().unwrap() < 1e-50);
    assert_eq!(r["argmin"], serde_json::json!([7, 0]));
    let wrong = weylab(&[
        "minfrac",
        "--profile",
        "2",
        "-s",
        "2",
        "-X",
        "10",
        "--alpha",
        "1/7",
    ]);
    assert_eq!(wrong.status.code(), Some(2));
}

#[test]
fn out_file_and_csv() {
    let dir = std::env::temp_dir().join(format!("weylab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let jsonl = dir.join("runs.jsonl");
    let csv = dir.join("arcs.csv");
    let _ = std::fs::remove_file(&jsonl);
    for _ in 0..2 {
        let out = weylab(&[
            "--out",
            jsonl.to_str().unwrap(),
            "arcs",
            "-X",
            "5",
            "-k",
            "2",
            "--l",
            "1",
            "--csv",
            csv.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        assert!(out.stdout.is_empty());
    }
    assert_eq!(std::fs::read_to_string(&jsonl).unwrap().lines().count(), 2);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("lo,hi,q,a\n"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn config_file_sets_seed() {
    let dir = std::env::temp_dir().join(format!("weylab-cfg-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "# experiment\nseed = 77\n").unwrap();
    let out = weylab(&[
        "--config",
        cfg.to_str().unwrap(),
        "sigma",
        "--profile",
        "4,2",
    ]);
    assert_eq!(records(&out)[0]["seed"], 77);
    let out = weylab(&[
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "5",
        "sigma",
        "--profile",
        "4,2",
    ]);
    assert_eq!(records(&out)[0]["seed"], 5);
    std::fs::remove_dir_all(&dir).unwrap();
}
