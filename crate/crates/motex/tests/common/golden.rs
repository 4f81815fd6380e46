//! Command outputs compared against stored goldens.
//!
//! Each golden holds the exit code, the output streams and any written file,
//! with timing fields zeroed. Set `UPDATE_GOLDEN=1` to rewrite them.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

pub fn crate_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

pub fn fixture(name: &str) -> String {
    format!("tests/fixtures/{name}")
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the binary from the crate directory, so fixture paths in messages
/// are relative and stable.
pub fn motex(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_motex"))
        .current_dir(crate_dir())
        .args(args)
        .env_remove("MOT_LOG")
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

/// Zeroes every member of `timings_ms` objects.
fn normalize_json(text: &str) -> String {
    fn walk(v: &mut serde_json::Value) {
        match v {
            serde_json::Value::Object(map) => {
                for (k, child) in map.iter_mut() {
                    if k == "timings_ms" {
                        if let serde_json::Value::Object(t) = child {
                            for x in t.values_mut() {
                                *x = serde_json::json!(0.0);
                            }
                        }
                    } else {
                        walk(child);
                    }
                }
            }
            serde_json::Value::Array(items) => items.iter_mut().for_each(walk),
            _ => {}
        }
    }
    let mut value: serde_json::Value = serde_json::from_str(text).unwrap();
    walk(&mut value);
    serde_json::to_string_pretty(&value).unwrap() + "\n"
}

/// Zeroes the `runtime_ms` column of a CSV whose header names it.
fn normalize_csv(text: &str) -> String {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    let Some(col) = header.split(',').position(|h| h == "runtime_ms") else {
        return text.to_owned();
    };
    let mut out = format!("{header}\n");
    for line in lines {
        let mut fields: Vec<&str> = line.split(',').collect();
        if fields.len() > col {
            fields[col] = "0";
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn normalize_file(path: &Path) -> String {
    let text = fs::read_to_string(path).unwrap();
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => normalize_json(&text),
        Some("csv") => normalize_csv(&text),
        _ => text,
    }
}

/// Compares a run (and the file it wrote) with `tests/golden/{name}.txt`.
pub fn compare(name: &str, run: &Run, file: Option<&Path>) -> Result<(), String> {
    let mut actual = format!("exit={}\n--- stdout\n{}", run.code, run.stdout);
    if !run.stderr.is_empty() {
        actual.push_str("--- stderr\n");
        actual.push_str(&run.stderr);
    }
    if let Some(path) = file {
        actual.push_str("--- file\n");
        actual.push_str(&normalize_file(path));
    }
    let golden = crate_dir().join("tests/golden").join(format!("{name}.txt"));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&golden, &actual).map_err(|e| format!("{}: {e}", golden.display()))?;
        return Ok(());
    }
    let expected =
        fs::read_to_string(&golden).map_err(|e| format!("{}: {e}; rerun with UPDATE_GOLDEN=1", golden.display()))?;
    if expected == actual {
        Ok(())
    } else {
        Err(format!("--- expected\n{expected}--- actual\n{actual}"))
    }
}

/// Runs `args`, appending `--out <tmp>/<out>` when an output file is named.
fn case(name: &str, args: &[&str], out: Option<&str>) -> Result<(), String> {
    let dir = tempfile::tempdir().unwrap();
    let mut args: Vec<String> = args.iter().map(|a| a.to_string()).collect();
    let file: Option<PathBuf> = out.map(|f| dir.path().join(f));
    if let Some(path) = &file {
        args.push("--out".into());
        args.push(path.to_string_lossy().into_owned());
    }
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    compare(name, &motex(&refs), file.as_deref())
}

/// Writes a certificate with `hedge --out`, checks `--verify` accepts it,
/// then lowers ψ by 1 at the middle ν-atom (which carries plan mass) and
/// checks it is rejected with exit code 3.
fn verify_cases() -> Vec<(String, Result<(), String>)> {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("certificate.json");
    let cert_arg = cert.to_string_lossy().into_owned();
    let (mu, nu, cost) = (
        fixture("put_mu.csv"),
        fixture("put_nu.csv"),
        fixture("american_put.json"),
    );
    let written = motex(&["hedge", &mu, &nu, &cost, "--out", &cert_arg]);
    if written.code != 0 {
        return vec![(
            "hedge_verify".into(),
            Err(format!("hedge --out exited {}", written.code)),
        )];
    }
    let accepted = motex(&["hedge", &mu, &nu, &cost, "--verify", &cert_arg]);
    let mut out = vec![(
        "hedge_verify_accepted".into(),
        compare("hedge_verify_accepted", &accepted, None),
    )];

    let mut value: serde_json::Value = serde_json::from_str(&fs::read_to_string(&cert).unwrap()).unwrap();
    let psi = value["psi"][1].as_f64().unwrap();
    value["psi"][1] = serde_json::json!(psi - 1.0);
    fs::write(&cert, serde_json::to_string(&value).unwrap()).unwrap();
    let rejected = motex(&["hedge", &mu, &nu, &cost, "--verify", &cert_arg]);
    let result = if rejected.code == 3 {
        compare("hedge_verify_rejected", &rejected, None)
    } else {
        Err(format!("corrupted certificate exited {}", rejected.code))
    };
    out.push(("hedge_verify_rejected".into(), result));
    out
}

/// Every golden case, with its outcome.
pub fn check_all() -> Vec<(String, Result<(), String>)> {
    let f = fixture;
    let cases: Vec<(&str, Vec<String>, Option<&str>)> = vec![
        (
            "check_two_components",
            vec!["check".into(), f("two_mu.csv"), f("two_nu.csv"), f("american_put.json")],
            None,
        ),
        (
            "check_generic",
            vec!["check".into(), f("two_mu.csv"), f("two_nu.csv"), f("generic.json")],
            None,
        ),
        (
            "check_reversed",
            vec!["check".into(), f("split_nu.csv"), f("split_mu.csv")],
            None,
        ),
        (
            "check_malformed",
            vec!["check".into(), f("malformed.csv"), f("split_nu.csv")],
            None,
        ),
        (
            "price_identity",
            vec![
                "price".into(),
                f("identity.csv"),
                f("identity.csv"),
                f("identity_put.json"),
            ],
            Some("report.json"),
        ),
        (
            "price_split",
            vec![
                "price".into(),
                f("split_mu.csv"),
                f("split_nu.csv"),
                f("const_vs_square.json"),
            ],
            Some("report.json"),
        ),
        (
            "price_put_csv",
            vec![
                "price".into(),
                f("put_mu.csv"),
                f("put_nu.csv"),
                f("american_put.json"),
                "--format".into(),
                "csv".into(),
            ],
            Some("report.csv"),
        ),
        (
            "price_put_heuristic",
            vec![
                "price".into(),
                f("put_mu.csv"),
                f("put_nu.csv"),
                f("american_put.json"),
                "--max-enum".into(),
                "0".into(),
            ],
            Some("report.json"),
        ),
        (
            "hedge_identity",
            vec![
                "hedge".into(),
                f("identity.csv"),
                f("identity.csv"),
                f("identity_put.json"),
            ],
            Some("certificate.json"),
        ),
        (
            "hedge_put",
            vec!["hedge".into(), f("put_mu.csv"), f("put_nu.csv"), f("american_put.json")],
            Some("certificate.json"),
        ),
        (
            "curtain_fixture",
            vec!["curtain".into(), f("curtain_mu.csv"), f("curtain_nu.csv")],
            Some("plan.csv"),
        ),
        (
            "curtain_identity",
            vec!["curtain".into(), f("identity.csv"), f("identity.csv")],
            None,
        ),
        (
            "curtain_split",
            vec!["curtain".into(), f("split_mu.csv"), f("split_nu.csv")],
            None,
        ),
        (
            "study_constant",
            vec!["study".into(), f("study_constant.json")],
            Some("study.csv"),
        ),
        (
            "study_jensen",
            vec!["study".into(), f("study_jensen.json")],
            Some("study.csv"),
        ),
        (
            "study_put_plus_quadratic",
            vec!["study".into(), f("study_ppq.json")],
            Some("study.csv"),
        ),
    ];
    let mut results: Vec<(String, Result<(), String>)> = cases
        .into_iter()
        .map(|(name, args, out)| {
            let refs: Vec<&str> = args.iter().map(String::as_str).collect();
            (name.to_owned(), case(name, &refs, out))
        })
        .collect();
    results.extend(verify_cases());
    results
}
