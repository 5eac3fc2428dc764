use std::path::{Path, PathBuf};

use assert_cmd::Command;
use serde_json::Value;

fn zslab() -> Command {
    let mut c = Command::cargo_bin("zslab").unwrap();
    c.env_remove("ZSLAB_CACHE");
    c
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = zslab().args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn stdout(args: &[&str]) -> String {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "zslab {args:?} failed: {err}");
    out
}

fn json(args: &[&str]) -> Value {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    serde_json::from_str(&stdout(&full)).unwrap()
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas").join(format!("{name}.schema.json"));
    let s: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&s).unwrap()
}

fn assert_valid(name: &str, v: &Value) {
    let errors: Vec<String> = schema(name).iter_errors(v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}\n{v:#}");
}

/// Splits a printed reproduction command, honouring single quotes.
fn split_command(cmd: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    for ch in cmd.chars() {
        match ch {
            '\'' => quoted = !quoted,
            ' ' if !quoted => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            _ => cur.push(ch),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

#[test]
fn documented_examples() {
    assert_eq!(stdout(&["davenport", "--group", "C3xC3"]), "5\n");
    assert_eq!(stdout(&["mindelta-cf", "--n", "10", "--a", "3"]), "2\n");
    assert_eq!(stdout(&["mindelta-cf", "--n", "7", "--a", "6"]), "5\n");
    assert_eq!(stdout(&["uk", "--group", "C5", "--k", "3"]), "{2,3,4,5,6}\n");
    assert_eq!(stdout(&["rho", "--group", "C5", "--k", "3"]), "6\n");
    assert_eq!(stdout(&["um", "--group", "C3^2", "--m", "2,5"]), "{2,3,4,5}\n");
    assert_eq!(stdout(&["daleth", "--group", "C3"]), "3\n");
    assert_eq!(stdout(&["delta-star", "--group", "C6", "--bound", "24"]), "{1,2,4}\n");
    assert_eq!(stdout(&["aamp", "classify", "--set", "2,4,5,7", "--d", "3", "--bound", "0"]), "y=2 d=3 period={0,2,3} M=0\n");
    assert_eq!(stdout(&["aamp", "classify", "--set", "2,4", "--d", "1", "--bound", "1"]), "none\n");
}

#[test]
fn lengths_prints_json_in_every_text_mode() {
    let out = stdout(&["lengths", "--group", "C3", "--seq", "[(1)*3,(2)*3]"]);
    assert_eq!(out, "{\"B\":\"[(1)*3,(2)*3]\",\"L\":[2,3],\"delta\":[1]}\n");
    let csv = stdout(&["--format", "csv", "lengths", "--group", "C4", "--seq", "[(1)*4,(3)*4]"]);
    assert_eq!(csv, "set,value\nL,2\nL,4\ndelta,2\n");
}

#[test]
fn group_grammar_variants_agree() {
    let a = stdout(&["group", "info", "--group", "C2^2xC12"]);
    let b = stdout(&["group", "info", "--group", "2,2,12"]);
    assert_eq!(a, b);
    assert!(a.contains("d_star: 14"));
}

#[test]
fn json_outputs_match_schemas() {
    let cases: &[(&str, &[&str])] = &[
        ("group-info", &["group", "info", "--group", "C2xC4"]),
        ("atoms", &["atoms", "--group", "C4"]),
        ("davenport", &["davenport", "--group", "C2^2"]),
        ("lengths", &["lengths", "--group", "C5", "--seq", "[(1)*5,(4)*5]"]),
        ("invariant-report", &["uk", "--group", "C4", "--k", "3"]),
        ("invariant-report", &["um", "--group", "C2^3", "--m", "2,4"]),
        ("invariant-report", &["rho", "--group", "C3", "--k", "5"]),
        ("invariant-report", &["lambda", "--group", "C4", "--k", "5"]),
        ("invariant-report", &["daleth", "--group", "C2^2"]),
        ("elasticity", &["elasticity", "--group", "C4", "--k-max", "3"]),
        ("delta-report", &["delta", "--group", "C5", "--bound", "12"]),
        ("delta-report", &["delta", "--group", "C7", "--subset", "[(1),(6)]", "--bound", "21"]),
        ("delta-star-report", &["delta-star", "--group", "C5", "--bound", "15"]),
        ("mindelta-cf", &["mindelta-cf", "--n", "13", "--a", "5"]),
        ("aamp-classify", &["aamp", "classify", "--set", "2,4,5,7", "--d", "3", "--bound", "0"]),
        ("aamp-classify", &["aamp", "classify", "--set", "2,4", "--d", "1", "--bound", "1"]),
        ("aamp-min-bound", &["aamp", "min-bound", "--set", "3,5,6,7", "--d", "1"]),
        ("verify", &["verify", "lemAP", "--param", "n=3"]),
    ];
    for (name, args) in cases {
        assert_valid(name, &json(args));
    }
    let v: Value = serde_json::from_str(&stdout(&["verify", "cf_vs_bruteforce", "--json"])).unwrap();
    assert_valid("verify", &v);
}

#[test]
fn golden_outputs() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let cases: &[(&str, &[&str])] = &[
        ("atoms_c2xc2.txt", &["atoms", "--group", "C2^2"]),
        ("uk_c5_k3.json", &["--format", "json", "uk", "--group", "C5", "--k", "3"]),
        ("delta_c6_18.json", &["--format", "json", "delta", "--group", "C6", "--bound", "18"]),
        ("delta_star_c5.json", &["--format", "json", "delta-star", "--group", "C5", "--bound", "15"]),
        ("um_c2xc4.csv", &["--format", "csv", "um", "--group", "C2xC4", "--m", "2,5"]),
        ("aamp_min_bound.json", &["--format", "json", "aamp", "min-bound", "--set", "2,10", "--d", "1"]),
    ];
    for (file, args) in cases {
        let expected = std::fs::read_to_string(dir.join(file)).unwrap();
        for jobs in ["1", "3"] {
            let mut full = vec!["--jobs", jobs];
            full.extend_from_slice(args);
            assert_eq!(stdout(&full), expected, "{file} at jobs = {jobs}");
        }
    }
}

#[test]
fn usage_errors_exit_2_and_name_the_token() {
    let (code, _, err) = run(&["davenport", "--group", "C3xQ7"]);
    assert_eq!(code, 2);
    assert!(err.contains("Q7"), "{err}");
    let (code, _, err) = run(&["atoms", "--group", "C3", "--subset", "[(1),(x)]"]);
    assert_eq!(code, 2);
    assert!(err.contains('x'), "{err}");
    let (code, _, _) = run(&["lengths", "--group", "C3", "--seq", "[(1)*2]"]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["uk", "--group", "C3"]);
    assert_eq!(code, 2);
    let (code, _, err) = run(&["verify", "no_such_check"]);
    assert_eq!(code, 2);
    assert!(err.contains("carlitz"));
    let (code, _, _) = run(&["mindelta-cf", "--n", "10", "--a", "4"]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["verify", "prop3u", "--group", "C5"]);
    assert_eq!(code, 2);
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("delta-star"));
}

#[test]
fn failing_check_exits_1_and_its_witness_reproduces() {
    let (code, out, _) = run(&["verify", "lemAP", "--param", "n=4", "--param", "k=2", "--tamper", "lemAP", "--json"]);
    assert_eq!(code, 1);
    let reports: Value = serde_json::from_str(&out).unwrap();
    assert_valid("verify", &reports);
    let r = &reports[0];
    assert_eq!(r["status"], "fail");
    let cmd = r["reproduce"][0].as_str().unwrap();
    let args = split_command(cmd);
    assert_eq!(args[0], "zslab");
    let arg_refs: Vec<&str> = args[1..].iter().map(String::as_str).collect();
    let replay = stdout(&arg_refs);
    // the failure message quotes exactly the value the command prints
    let l: Value = serde_json::from_str(&replay).unwrap();
    let printed: Vec<String> = l["L"].as_array().unwrap().iter().map(|v| v.to_string()).collect();
    assert!(r["summary"].as_str().unwrap().contains(&format!("got {{{}}}", printed.join(","))), "{r}");
}

#[test]
fn verify_subset_of_suite() {
    let (code, out, _) = run(&["verify", "all", "--include", "lem23,lemAP,carlitz"]);
    assert_eq!(code, 0, "{out}");
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("PASS") && lines[0].contains("carlitz"));
    assert!(lines[2].contains("lemAP"));
}

#[test]
fn cache_is_transparent() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let plain = stdout(&["--format", "json", "delta", "--group", "C5", "--bound", "12"]);
    let cold = stdout(&["--cache-dir", d, "--format", "json", "delta", "--group", "C5", "--bound", "12"]);
    let warm = stdout(&["--cache-dir", d, "--format", "json", "delta", "--group", "C5", "--bound", "12"]);
    assert_eq!(plain, cold);
    assert_eq!(plain, warm);
    assert!(std::fs::read_to_string(dir.path().join("index.txt")).unwrap().contains("atoms"));

    // corrupt every entry: results are unchanged and entries get rewritten
    for e in std::fs::read_dir(dir.path()).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_some_and(|x| x == "bin") {
            let mut bytes = std::fs::read(&p).unwrap();
            let n = bytes.len();
            bytes[n / 2] ^= 0xff;
            std::fs::write(&p, bytes).unwrap();
        }
    }
    let corrupted = stdout(&["--cache-dir", d, "--format", "json", "delta", "--group", "C5", "--bound", "12"]);
    assert_eq!(plain, corrupted);

    let env = zslab().env("ZSLAB_CACHE", d).args(["cache", "purge"]).output().unwrap();
    assert!(env.status.success());
    let removed: usize = String::from_utf8(env.stdout).unwrap().trim().parse().unwrap();
    assert!(removed >= 2);
    let (code, _, _) = run(&["cache", "purge"]);
    assert_eq!(code, 2);
}

#[test]
fn verify_with_cache_matches_without() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let strip = |s: String| -> Value {
        let mut v: Value = serde_json::from_str(&s).unwrap();
        for r in v.as_array_mut().unwrap() {
            r["elapsed_ms"] = Value::from(0);
        }
        v
    };
    let args = ["verify", "all", "--include", "davenport,closed_forms", "--json"];
    let a = strip(stdout(&args));
    let mut with_cache = vec!["--cache-dir", d];
    with_cache.extend_from_slice(&args);
    let b = strip(stdout(&with_cache));
    let c = strip(stdout(&with_cache));
    assert_eq!(a, b);
    assert_eq!(a, c);
}
