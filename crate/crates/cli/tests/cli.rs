use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bispectral_core::ba::{construct, Artifact, Budget};
use bispectral_core::config::{Config, Params};
use bispectral_core::{Rat, XExpPoly};
use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bispectral-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bispectral")).args(args).current_dir(cwd).output().unwrap()
}

fn json_lines(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn construct_records_m_and_hits_the_cache() {
    let dir = scratch("cache");
    let first = run(&["construct", "--l", "1", "--k", "1", "--p", "0", "--r", "0"], &dir);
    assert!(first.status.success());
    let a = &json_lines(&first)[0];
    assert_eq!(a["big_m"], 2);
    assert_eq!(a["cache_hit"], false);
    let second = run(&["construct", "--l", "1", "--k", "1", "--p", "0", "--r", "0"], &dir);
    let b = &json_lines(&second)[0];
    assert_eq!(b["cache_hit"], true);
    assert_eq!(a["content_hash"], b["content_hash"]);
}

#[test]
fn construct_reads_a_config_file_and_flags_override_it() {
    let dir = scratch("config");
    std::fs::write(dir.join("p.json"), r#"{"l": 1, "k": "3", "p": 0, "r": 0}"#).unwrap();
    let out = run(&["construct", "--config", "p.json"], &dir);
    assert!(out.status.success());
    assert_eq!(json_lines(&out)[0]["big_m"], 3);
    let out = run(&["construct", "--config", "p.json", "--k", "1"], &dir);
    assert_eq!(json_lines(&out)[0]["big_m"], 2);
}

#[test]
fn construct_exit_codes() {
    let dir = scratch("exits");
    let out = run(&["construct", "--l", "1", "--k", "2"], &dir);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("odd"));
    let out = run(&["construct", "--l", "3", "--k", "1"], &dir);
    assert_eq!(out.status.code(), Some(3));
    std::fs::write(dir.join("bad.json"), "{").unwrap();
    assert_eq!(run(&["construct", "--config", "bad.json"], &dir).status.code(), Some(2));
}

#[test]
fn expansion_suite_reports_one_row_per_exponent() {
    let dir = scratch("expansion");
    assert!(run(&["construct", "--l", "1", "--k", "1", "--p", "1", "--r", "0", "--out", "a.json"], &dir).status.success());
    let out = run(&["verify", "--artifact", "a.json", "--suite", "expansion", "--max-height", "4"], &dir);
    assert!(out.status.success());
    let rows = json_lines(&out);
    let nu_rows = rows.iter().filter(|r| r["check"].as_str().unwrap().starts_with("expansion.c_nu[")).count();
    assert_eq!(nu_rows, 15);
    assert!(rows.iter().all(|r| r["schema_version"] == 1 && r["status"] == "pass"));
}

#[test]
fn tampered_artifact_fails_verification() {
    let dir = scratch("tampered");
    let cfg = Config::build(Params::new(1, Rat::ONE, 0, 0)).unwrap();
    let (mut ba, _) = construct(&cfg, &Budget::default()).unwrap();
    ba.phi = ba.phi.mul_xexp(&XExpPoly::sinh2(2, bispectral_core::IVec::unit(0, 2)));
    std::fs::write(dir.join("t.json"), Artifact::new(ba, 0).to_json()).unwrap();
    let out = run(&["verify", "--artifact", "t.json", "--suite", "axioms,eigenD"], &dir);
    assert_eq!(out.status.code(), Some(1));
    let failed: Vec<String> =
        json_lines(&out).iter().filter(|r| r["status"] == "fail").map(|r| r["check"].as_str().unwrap().to_owned()).collect();
    assert!(failed.contains(&"axioms.leading_term".to_owned()));
    assert!(!failed.contains(&"eigenD.exact".to_owned()), "an x-only factor commutes with D");
}

#[test]
fn hash_mismatch_is_a_deserialization_error() {
    let dir = scratch("hash");
    assert!(run(&["construct", "--l", "1", "--k", "1", "--out", "a.json"], &dir).status.success());
    let text = std::fs::read_to_string(dir.join("a.json")).unwrap().replacen("\"big_m\":2", "\"big_m\":3", 1);
    std::fs::write(dir.join("a.json"), text).unwrap();
    let out = run(&["verify", "--artifact", "a.json"], &dir);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn continue_rejects_nonpositive_real_part() {
    let dir = scratch("continue");
    assert_eq!(run(&["continue", "--k", "-1"], &dir).status.code(), Some(2));
    assert_eq!(run(&["continue", "--k", "0+1i"], &dir).status.code(), Some(2));
}

#[test]
fn continue_writes_points_and_checks() {
    let dir = scratch("continue-out");
    let out = run(&["continue", "--k", "2.3", "--p", "0.4", "--r", "0.1", "--height", "6", "--points", "2", "--out", "c.jsonl"], &dir);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(dir.join("c.jsonl")).unwrap();
    let rows: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.iter().filter(|r| r["kind"] == "point").count(), 4);
    let checks: Vec<&Value> = rows.iter().filter(|r| r["kind"] == "check").collect();
    assert!(checks.iter().any(|c| c["check"] == "dtilde.identities"));
    assert!(checks.iter().all(|c| c["status"] == "pass"));
}
