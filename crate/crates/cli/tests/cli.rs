// Copyright 2026 The relsvm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use relsvm_core::fixtures::{star_join, triangle};
use relsvm_core::io::{load_spec, write_spec_dir};
use relsvm_core::{build_join_tree, materialize_join, JoinSpec};
use serde_json::Value;

fn relsvm(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relsvm"))
        .args(args)
        .current_dir(cwd)
        .env_remove("RELSVM_ORACLE_CAP")
        .env_remove("RELSVM_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn quickstart() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/quickstart/spec.json")
}

fn read(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_valid(schema: &str, doc: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(format!("{schema}.schema.json"));
    let validator = jsonschema::validator_for(&read(&path)).unwrap();
    let errors: Vec<String> = validator
        .iter_errors(doc)
        .map(|e| format!("{} at {}", e, e.instance_path()))
        .collect();
    assert!(errors.is_empty(), "{schema}: {errors:#?}");
}

fn without_metadata(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("metadata");
    v
}

fn spec_dir(root: &Path, name: &str, spec: &JoinSpec) -> PathBuf {
    write_spec_dir(&root.join(name), spec).unwrap()
}

#[test]
fn quickstart_trains_and_the_trace_validates() {
    let tmp = tempfile::tempdir().unwrap();
    let qs = quickstart();
    let out = relsvm(
        &["train", "--spec", qs.to_str().unwrap(), "--out", "run", "--steps", "40"],
        tmp.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(String::from_utf8_lossy(&out.stdout).contains("F̂(β̂)"));
    let trace = read(&tmp.path().join("run/trace.json"));
    assert_valid("train_trace", &trace);
    assert_valid("run_config", &read(&tmp.path().join("run/config.json")));
    assert_eq!(trace["result"]["steps"].as_array().unwrap().len(), 40);
    assert!(trace["metadata"]["wall_clock_secs"].is_number());
    assert!(trace["result"].get("wall_clock_secs").is_none());
    assert!(tmp.path().join("run/summary.txt").exists());
}

#[test]
fn train_is_deterministic_and_replayable() {
    let tmp = tempfile::tempdir().unwrap();
    let qs = quickstart();
    let args = |out: &'static str| vec!["train", "--spec", qs.to_str().unwrap(), "--out", out, "--steps", "25"];
    let a = args("a");
    let b = args("b");
    assert_eq!(code(&relsvm(&a, tmp.path())), 0);
    assert_eq!(code(&relsvm(&b, tmp.path())), 0);
    let ta = fs::read_to_string(tmp.path().join("a/trace.json")).unwrap();
    let tb = fs::read_to_string(tmp.path().join("b/trace.json")).unwrap();
    let strip = |s: &str| s[..s.find("\"metadata\"").unwrap()].to_string();
    assert_eq!(strip(&ta), strip(&tb));

    let out = relsvm(&["train", "--config", "a/config.json", "--out", "c"], tmp.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(
        without_metadata(read(&tmp.path().join("a/trace.json"))),
        without_metadata(read(&tmp.path().join("c/trace.json")))
    );
}

#[test]
fn missing_spec_is_a_config_error_naming_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let out = relsvm(&["train", "--spec", "nowhere/spec.json", "--out", "run"], tmp.path());
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("nowhere/spec.json"), "{}", stderr(&out));
    assert!(!tmp.path().join("run").exists());
}

#[test]
fn usage_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&relsvm(&["train", "--no-such-flag"], tmp.path())), 1);
    assert_eq!(code(&relsvm(&["--help"], tmp.path())), 0);
    let qs = quickstart();
    let out = relsvm(
        &["train", "--spec", qs.to_str().unwrap(), "--out", "r", "--eps", "0"],
        tmp.path(),
    );
    assert_eq!(code(&out), 1, "{}", stderr(&out));
}

#[test]
fn cyclic_join_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = spec_dir(tmp.path(), "tri", &triangle());
    let out = relsvm(&["train", "--spec", spec.to_str().unwrap(), "--out", "run"], tmp.path());
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(stderr(&out).contains("cyclic"));
}

#[test]
fn bad_data_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("bad");
    fs::create_dir(&dir).unwrap();
    fs::write(dir.join("t.csv"), "x,y\n1,0\n").unwrap();
    fs::write(
        dir.join("spec.json"),
        r#"{"tables": [{"name": "t", "path": "t.csv"}], "label": "y"}"#,
    )
    .unwrap();
    let out = relsvm(&["train", "--spec", "bad/spec.json", "--out", "run"], tmp.path());
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("invalid label"), "{}", stderr(&out));

    fs::write(dir.join("t.csv"), "x,y\n1,1\noops,1\n").unwrap();
    let out = relsvm(&["train", "--spec", "bad/spec.json", "--out", "run"], tmp.path());
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains(":3:"), "{}", stderr(&out));
}

#[test]
fn run_directories_need_force() {
    let tmp = tempfile::tempdir().unwrap();
    let qs = quickstart();
    let args = ["train", "--spec", qs.to_str().unwrap(), "--out", "run", "--steps", "3"];
    assert_eq!(code(&relsvm(&args, tmp.path())), 0);
    let again = relsvm(&args, tmp.path());
    assert_eq!(code(&again), 1);
    assert!(stderr(&again).contains("--force"));
    let mut forced = args.to_vec();
    forced.push("--force");
    assert_eq!(code(&relsvm(&forced, tmp.path())), 0);
}

#[test]
fn verify_passes_on_quickstart() {
    let tmp = tempfile::tempdir().unwrap();
    let qs = quickstart();
    let out = relsvm(
        &["verify", "--spec", qs.to_str().unwrap(), "--out", "v", "--samples", "4"],
        tmp.path(),
    );
    assert_eq!(
        code(&out),
        0,
        "{}{}",
        String::from_utf8_lossy(&out.stdout),
        stderr(&out)
    );
    let report = read(&tmp.path().join("v/report.json"));
    assert_valid("verify_report", &report);
    assert_eq!(report["result"]["all_passed"], true);
    assert_eq!(report["result"]["properties"].as_array().unwrap().len(), 4);
}

#[test]
fn injected_count_error_fails_the_sandwich() {
    let tmp = tempfile::tempdir().unwrap();
    let qs = quickstart();
    let out = relsvm(
        &[
            "verify",
            "--spec",
            qs.to_str().unwrap(),
            "--out",
            "v",
            "--samples",
            "3",
            "--count-scale",
            "1.3",
        ],
        tmp.path(),
    );
    assert_eq!(code(&out), 5);
    let report = read(&tmp.path().join("v/report.json"));
    assert_valid("verify_report", &report);
    let failed: Vec<&str> = report["result"]["properties"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|p| p["passed"] == false)
        .map(|p| p["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, vec!["fhat_sandwich"]);
}

#[test]
fn oversized_join_exits_four() {
    let tmp = tempfile::tempdir().unwrap();
    // 11^6 rows, above the default cap of 10^6
    let spec = spec_dir(tmp.path(), "star", &star_join(6, 11, 0));
    let out = relsvm(&["verify", "--spec", spec.to_str().unwrap(), "--out", "v"], tmp.path());
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    assert!(stderr(&out).contains("1771561"), "{}", stderr(&out));

    let small = spec_dir(tmp.path(), "small", &star_join(3, 20, 0));
    let out = Command::new(env!("CARGO_BIN_EXE_relsvm"))
        .args(["oracle", "--spec", small.to_str().unwrap(), "--out", "o"])
        .current_dir(tmp.path())
        .env("RELSVM_ORACLE_CAP", "1000")
        .output()
        .unwrap();
    assert_eq!(code(&out), 4, "{}", stderr(&out));
}

#[test]
fn gen_knapsack_then_probe() {
    let tmp = tempfile::tempdir().unwrap();
    let out = relsvm(
        &[
            "gen",
            "knapsack",
            "--weights",
            "1,1",
            "--L",
            "1",
            "--k",
            "2",
            "--out",
            "ks",
        ],
        tmp.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csvs: Vec<String> = fs::read_dir(tmp.path().join("ks"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    assert_eq!(csvs.len(), 3);
    assert_valid("gen", &read(&tmp.path().join("ks/gen.json")));
    let spec = load_spec(&tmp.path().join("ks/spec.json")).unwrap().spec;
    assert_eq!(materialize_join(&build_join_tree(&spec).unwrap()).unwrap().len(), 5);

    let out = relsvm(
        &[
            "probe",
            "--spec",
            "ks/spec.json",
            "--alpha",
            "0.01",
            "--delta",
            "0.05",
            "--gamma",
            "0.05",
            "--budget",
            "5",
            "--baseline-steps",
            "300",
            "--out",
            "p",
        ],
        tmp.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = read(&tmp.path().join("p/report.json"));
    assert_valid("probe_report", &report);
    let verdict = report["result"]["verdict"].as_str().unwrap();
    assert!(verdict == "counterexample_found" || verdict == "evidence_of_stability");
}

#[test]
fn gen_stable_writes_metadata() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "gen", "stable", "--d", "4", "--m", "2", "--n", "30", "--seed", "3", "--out", "s",
    ];
    assert_eq!(code(&relsvm(&args, tmp.path())), 0);
    let gen = read(&tmp.path().join("s/gen.json"));
    assert_valid("gen", &gen);
    assert_eq!(gen["result"]["details"]["join_size"], 90);
    let mut again = args.to_vec();
    let last = again.len() - 1;
    again[last] = "t";
    assert_eq!(code(&relsvm(&again, tmp.path())), 0);
    for f in ["fact.csv", "spec.json"] {
        assert_eq!(
            fs::read(tmp.path().join("s").join(f)).unwrap(),
            fs::read(tmp.path().join("t").join(f)).unwrap()
        );
    }
}

#[test]
fn zero_inequality_counts_are_value_frequencies() {
    let tmp = tempfile::tempdir().unwrap();
    let qs = quickstart();
    for label in ["1", "-1"] {
        let out_dir = format!("c{label}");
        let out = relsvm(
            &[
                "count",
                "--spec",
                qs.to_str().unwrap(),
                "--label",
                label,
                "--ladder",
                "--out",
                &out_dir,
            ],
            tmp.path(),
        );
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let doc = read(&tmp.path().join(&out_dir).join("counts.json"));
        assert_valid("counts", &doc);

        let spec = load_spec(&qs).unwrap().spec;
        let x = materialize_join(&build_join_tree(&spec).unwrap()).unwrap();
        let y: f64 = label.parse().unwrap();
        for (j, col) in doc["result"]["counts"]["columns"]
            .as_array()
            .unwrap()
            .iter()
            .enumerate()
        {
            let mut expected: BTreeMap<u64, f64> = BTreeMap::new();
            for (p, _) in x.rows().filter(|&(_, l)| l == y) {
                *expected.entry(p[j].to_bits()).or_insert(0.0) += 1.0;
            }
            let got: BTreeMap<u64, f64> = col["values"]
                .as_array()
                .unwrap()
                .iter()
                .map(|e| (e[0].as_f64().unwrap().to_bits(), e[1].as_f64().unwrap()))
                .filter(|e| e.1 > 0.0)
                .collect();
            assert_eq!(got, expected, "feature {j}");
        }
    }
}

#[test]
fn oracle_writes_matrix_and_validates() {
    let tmp = tempfile::tempdir().unwrap();
    let qs = quickstart();
    let out = relsvm(
        &[
            "oracle",
            "--spec",
            qs.to_str().unwrap(),
            "--out",
            "o",
            "--steps",
            "500",
            "--write-matrix",
        ],
        tmp.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = read(&tmp.path().join("o/oracle.json"));
    assert_valid("oracle", &doc);
    assert_eq!(doc["result"]["n"], 90);
    let design = fs::read_to_string(tmp.path().join("o/design.csv")).unwrap();
    assert_eq!(design.lines().count(), 91);
}

#[test]
fn thread_count_is_honoured() {
    let tmp = tempfile::tempdir().unwrap();
    let qs = quickstart();
    let out = Command::new(env!("CARGO_BIN_EXE_relsvm"))
        .args(["train", "--spec", qs.to_str().unwrap(), "--out", "r", "--steps", "5"])
        .current_dir(tmp.path())
        .env("RELSVM_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn negative_coefficients_parse() {
    let tmp = tempfile::tempdir().unwrap();
    let qs = quickstart();
    let args = [
        "count",
        "--spec",
        qs.to_str().unwrap(),
        "--coef",
        "-1,0.5,0,0,0,-0.25",
        "--offset",
        "-0.5",
        "--out",
        "c",
    ];
    let out = relsvm(&args, tmp.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = read(&tmp.path().join("c/counts.json"));
    assert_valid("counts", &doc);
    let short = relsvm(
        &["count", "--spec", qs.to_str().unwrap(), "--coef", "-1", "--out", "d"],
        tmp.path(),
    );
    assert_eq!(code(&short), 1);
}
