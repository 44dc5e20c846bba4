use std::io::Write;
use std::process::{Command, Stdio};

use serde_json::Value;

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data");

fn opext(args: &[&str], stdin: Option<&str>) -> (i32, String) {
    let mut child = Command::new(env!("CARGO_BIN_EXE_opext"))
        .args(args)
        .stdin(if stdin.is_some() {
            Stdio::piped()
        } else {
            Stdio::null()
        })
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    if let Some(input) = stdin {
        child
            .stdin
            .take()
            .unwrap()
            .write_all(input.as_bytes())
            .unwrap();
    }
    let out = child.wait_with_output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
    )
}

fn data(name: &str) -> String {
    format!("{DATA}/{name}")
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

fn real_entries(m: &Value) -> Vec<Vec<f64>> {
    m.as_array()
        .unwrap()
        .iter()
        .map(|row| {
            row.as_array()
                .unwrap()
                .iter()
                .map(|z| {
                    assert!(z[1].as_f64().unwrap().abs() <= 1e-8);
                    z[0].as_f64().unwrap()
                })
                .collect()
        })
        .collect()
}

fn assert_close(m: &Value, expected: &[&[f64]]) {
    let got = real_entries(m);
    assert_eq!(got.len(), expected.len());
    for (row, want) in got.iter().zip(expected) {
        for (a, b) in row.iter().zip(want.iter()) {
            assert!((a - b).abs() <= 1e-8, "{got:?} vs {expected:?}");
        }
    }
}

#[test]
fn kvn_fixture() {
    let (code, out) = opext(&["kvn", &data("kvn.json")], None);
    assert_eq!(code, 0);
    let r = json(&out);
    assert_eq!(r["status"], "ok");
    assert_close(&r["outputs"]["a_n"], &[&[1.0, 1.0], &[1.0, 1.0]]);
}

#[test]
fn kvn_restriction_failure_is_infeasible() {
    let (code, out) = opext(&["kvn", &data("kvn-infeasible.json")], None);
    assert_eq!(code, 1);
    let r = json(&out);
    assert_eq!(r["status"], "infeasible");
    assert_eq!(r["error"]["code"], "RestrictionConditionFailed");
    assert!(r["error"]["message"]
        .as_str()
        .unwrap()
        .contains("restriction condition"));
}

#[test]
fn sa_ext_worked_example() {
    let (code, out) = opext(&["sa-ext", &data("sa-ext.json")], None);
    assert_eq!(code, 0);
    let r = json(&out);
    let o = &r["outputs"];
    assert!((o["alpha"].as_f64().unwrap() - 1.0).abs() <= 1e-10);
    assert_close(&o["s_min"], &[&[1.0, 0.0], &[0.0, -1.0]]);
    assert_close(&o["s_max"], &[&[1.0, 0.0], &[0.0, 1.0]]);
    assert_eq!(o["probe_in_interval"], true);
}

#[test]
fn parrott_endpoints_agree_on_forced_completion() {
    for endpoint in ["min", "max", "mid"] {
        let (code, out) = opext(
            &["parrott", &data("parrott.json"), "--endpoint", endpoint],
            None,
        );
        assert_eq!(code, 0);
        let r = json(&out);
        assert_eq!(r["outputs"]["endpoint"], endpoint);
        assert_close(&r["outputs"]["t"], &[&[0.0, 1.0], &[1.0, 0.0]]);
    }
}

#[test]
fn functional_fixture() {
    let (code, out) = opext(&["functional-ext", &data("functional-ext.json")], None);
    assert_eq!(code, 0);
    let r = json(&out);
    assert_close(&r["outputs"]["g_min"], &[&[1.0, 0.0], &[0.0, -1.0]]);
    assert_close(&r["outputs"]["g_max"], &[&[1.0, 0.0], &[0.0, 1.0]]);
}

#[test]
fn cstar_check_example_is_extendible() {
    let (code, out) = opext(&["cstar-check", &data("cstar-check.json")], None);
    assert_eq!(code, 0);
    let r = json(&out);
    assert_eq!(r["outputs"]["extendible"], true);
    assert_eq!(r["seed"], 5);
}

#[test]
fn every_example_runs() {
    for kind in [
        "kvn",
        "sa-ext",
        "parrott",
        "strong-parrott",
        "functional-ext",
        "cstar-check",
    ] {
        let (code, out) = opext(&[kind, &data(&format!("{kind}.json"))], None);
        assert_eq!(code, 0, "{kind}: {out}");
    }
}

#[test]
fn subcommand_must_match_file_kind() {
    let (code, out) = opext(&["parrott", &data("kvn.json")], None);
    assert_eq!(code, 2);
    assert_eq!(json(&out)["error"]["code"], "KindMismatch");
}

#[test]
fn unparsable_input_is_invalid() {
    let (code, out) = opext(&["run", "-"], Some("{not json"));
    assert_eq!(code, 2);
    assert_eq!(json(&out)["status"], "invalid-input");
}

#[test]
fn gen_is_deterministic() {
    let a = opext(&["gen", "--kind", "kvn", "--n", "4", "--seed", "42"], None);
    let b = opext(&["gen", "--kind", "kvn", "--n", "4", "--seed", "42"], None);
    assert_eq!(a.0, 0);
    assert_eq!(a, b);
    let c = opext(&["gen", "--kind", "kvn", "--n", "4", "--seed", "43"], None);
    assert_ne!(a.1, c.1);
}

#[test]
fn generated_strong_parrott_runs() {
    let (code, file) = opext(
        &[
            "gen",
            "--kind",
            "strong-parrott",
            "--dims",
            "2,2,2",
            "--seed",
            "7",
        ],
        None,
    );
    assert_eq!(code, 0);
    let (code, out) = opext(&["strong-parrott", "-"], Some(&file));
    assert_eq!(code, 0, "{out}");
    assert!(json(&out)["diagnostics"]["norm"].as_f64().unwrap() <= 1.0 + 1e-8);
}

#[test]
fn gen_rejects_invalid_dims() {
    let (code, _) = opext(
        &["gen", "--kind", "kvn", "--dims", "0", "--seed", "1"],
        None,
    );
    assert_eq!(code, 2);
    let (code, _) = opext(
        &["gen", "--kind", "functional-ext", "--n", "9", "--seed", "1"],
        None,
    );
    assert_eq!(code, 2);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("result.json");
    let (code, stdout) = opext(
        &["kvn", &data("kvn.json"), "--out", path.to_str().unwrap()],
        None,
    );
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(json(&written)["status"], "ok");
    assert!(written.ends_with('\n'));
}

#[test]
fn tolerance_flags_are_echoed() {
    let (code, out) = opext(
        &["kvn", &data("kvn.json"), "--tol-eq", "1e-6", "--seed", "3"],
        None,
    );
    assert_eq!(code, 0);
    let r = json(&out);
    assert_eq!(r["tolerances"]["eq"].as_f64(), Some(1e-6));
    assert_eq!(r["seed"], 3);
}

#[test]
fn verify_reports_counts() {
    for kind in [
        "kvn",
        "sa-ext",
        "parrott",
        "strong-parrott",
        "functional-ext",
        "cstar-check",
    ] {
        let (code, out) = opext(
            &["verify", "--kind", kind, "--count", "12", "--seed", "1"],
            None,
        );
        let r = json(&out);
        assert_eq!(code, 0, "{kind}: {out}");
        assert_eq!(r["passed"], 12);
        assert_eq!(r["failed"], 0);
        let indices: Vec<u64> = r["instances"]
            .as_array()
            .unwrap()
            .iter()
            .map(|i| i["index"].as_u64().unwrap())
            .collect();
        assert_eq!(indices, (0..12).collect::<Vec<_>>());
    }
}
