//! End-to-end runs of the `excoll` binary: outputs, exit codes, schemas,
//! determinism.

use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_excoll"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn schema(name: &str) -> Value {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../schemas")
        .join(format!("{name}.schema.json"));
    serde_json::from_str(&std::fs::read_to_string(path).expect("schema file")).expect("schema json")
}

fn json_run(cmd: &str, args: &[&str]) -> (i32, Value) {
    let mut all = vec![cmd];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--format", "json"]);
    let o = run(&all);
    let v: Value = serde_json::from_slice(&o.stdout).expect("json payload");
    let validator = jsonschema::validator_for(&schema(cmd)).expect("valid schema");
    let errors: Vec<String> = validator
        .iter_errors(&v)
        .map(|e| format!("{} at {}", e, e.instance_path))
        .collect();
    assert!(errors.is_empty(), "{cmd} {args:?}: {errors:?}");
    (code(&o), v)
}

#[test]
fn enumerate_counts() {
    for (args, count) in [
        (vec!["enumerate", "--p", "5"], 7),
        (vec!["enumerate", "--p", "7"], 38),
        (
            vec!["enumerate", "--p", "4", "--q", "3", "--variant", "1A"],
            34,
        ),
        (vec!["enumerate", "--p", "6"], 34),
    ] {
        let o = run(&args);
        assert_eq!(code(&o), 0);
        assert!(
            stdout(&o)
                .lines()
                .next()
                .unwrap()
                .ends_with(&format!(": {count} objects")),
            "{args:?}"
        );
    }
}

#[test]
fn verify_exit_codes() {
    assert_eq!(code(&run(&["verify", "--p", "5"])), 0);
    assert_eq!(code(&run(&["verify", "--p", "4", "--q", "3"])), 0);
    let bad = run(&["verify", "--p", "5", "--inject", "F:2:empty"]);
    assert_eq!(code(&bad), 1);
    assert!(stdout(&bad).contains("(k=3)"), "{}", stdout(&bad));
}

#[test]
fn verify_reports_skips_but_passes() {
    let (c, v) = json_run("verify", &["--p", "4", "--q", "2"]);
    assert_eq!(c, 0);
    let s = &v["report"]["summary"];
    assert!(s["skipped"].as_u64().unwrap() > 0);
    assert_eq!(s["exceptional"], false);
    assert_eq!(s["verified_part_exceptional"], true);
}

#[test]
fn rank_and_orbits() {
    let o = run(&["rank", "--n", "7"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "n=7: rank 213");
    let o = run(&["rank", "--weights", "1,1,1,1,1"]);
    assert_eq!(stdout(&o).trim(), "weights=1,1,1,1,1: rank 7");
    let o = run(&["orbits", "--p", "5"]);
    assert_eq!(code(&o), 0);
    assert!(
        stdout(&o).contains("3 orbits, decomposition 3·[5] + 1·[4+1]"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn certify_passes_and_tamper_fails() {
    let o = run(&["certify", "--p", "4", "--q", "3", "--lmax", "4"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("0 invalid"));
    let o = run(&["certify", "--p", "5", "--lmax", "2", "--inject", "tamper"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("first invalid root"));
}

#[test]
fn negative_controls_exit_one() {
    let o = run(&["orbits", "--p", "5", "--inject", "drop:1"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("transposition"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["enumerate", "--p", "2"],
        vec!["enumerate", "--p", "4", "--q", "3", "--variant", "3C"],
        vec!["verify", "--p", "5", "--inject", "X:1:empty"],
        vec!["verify", "--p", "5", "--inject", "F:1:empty"],
        vec!["verify", "--p", "5", "--inject", "F:0:empty"],
        vec!["rank", "--n", "5", "--p", "5"],
        vec!["rank"],
        vec!["rank", "--weights", "1/2,1/2,1/2,1/2"],
        vec!["certify", "--p", "4", "--q", "2"],
        vec!["frobnicate"],
    ] {
        assert_eq!(code(&run(&args)), 2, "{args:?}");
    }
}

#[test]
fn json_outputs_match_schemas() {
    let (c, v) = json_run("enumerate", &["--p", "6"]);
    assert_eq!((c, v["count"].as_u64()), (0, Some(34)));
    let (c, v) = json_run("enumerate", &["--p", "4", "--q", "2", "--variant", "1B+2A"]);
    assert_eq!(c, 0);
    assert!(v["counts"]["tilde_torsion"].as_u64().unwrap() > 0);
    let (c, v) = json_run("verify", &["--p", "5", "--inject", "F:2:empty"]);
    assert_eq!(c, 1);
    assert_eq!(
        v["bundle_window"]["witness"]["set"]
            .as_array()
            .unwrap()
            .len(),
        3
    );
    let (c, v) = json_run("rank", &["--p", "4", "--q", "3"]);
    assert_eq!((c, v["concordant"].as_bool()), (0, Some(true)));
    let (c, v) = json_run("orbits", &["--p", "4", "--q", "3"]);
    assert_eq!(
        (c, v["decomposition"]["total_dimension"].as_u64()),
        (0, Some(34))
    );
    let (c, v) = json_run("certify", &["--p", "5", "--lmax", "2", "--certificates"]);
    assert_eq!((c, v["ok"].as_bool()), (0, Some(true)));
    assert_eq!(
        v["roots"].as_array().unwrap().len(),
        v["certificates"].as_array().unwrap().len()
    );
}

#[test]
fn csv_headers() {
    for (args, header) in [
        (
            vec!["enumerate", "--p", "5"],
            "order_index,tag,l,E,divisor,a,b",
        ),
        (
            vec!["verify", "--p", "5"],
            "source,target,source_label,target_label,status,method,required,ok,result",
        ),
        (
            vec!["rank", "--n", "5"],
            "selector,rank,collection_length,concordant",
        ),
        (
            vec!["orbits", "--p", "5"],
            "constituent,multiplicity,dimension",
        ),
        (
            vec!["certify", "--p", "5", "--lmax", "1"],
            "l,E,nodes,leaves,ok",
        ),
    ] {
        let mut a = args.clone();
        a.extend_from_slice(&["--format", "csv"]);
        let o = run(&a);
        assert_eq!(code(&o), 0);
        assert_eq!(stdout(&o).lines().next(), Some(header), "{args:?}");
    }
}

#[test]
fn reruns_are_identical() {
    for args in [
        vec!["verify", "--p", "4", "--q", "3", "--format", "json"],
        vec!["orbits", "--p", "6", "--q", "1", "--format", "json"],
        vec![
            "certify",
            "--p",
            "5",
            "--lmax",
            "3",
            "--format",
            "json",
            "--certificates",
        ],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn out_file_and_jobs() {
    let dir = std::env::temp_dir().join(format!("excoll-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("c.json");
    let o = Command::new(env!("CARGO_BIN_EXE_excoll"))
        .args([
            "enumerate",
            "--p",
            "7",
            "--format",
            "json",
            "--out",
            path.to_str().unwrap(),
        ])
        .env("EXCOLL_JOBS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "M(7,0) -: 38 objects");
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["count"], 38);
    std::fs::remove_dir_all(&dir).unwrap();
    assert_eq!(code(&run(&["enumerate", "--p", "5", "--jobs", "0"])), 2);
}
