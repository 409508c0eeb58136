use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn konic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_konic")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("konic-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write_spec(name: &str, spec: &Value) -> String {
    let p = tmp(name);
    std::fs::write(&p, serde_json::to_string_pretty(spec).unwrap()).unwrap();
    p.to_string_lossy().into_owned()
}

fn c3_spec() -> Value {
    let shown = json(&konic(&["catalog", "show", "c3_module"]));
    shown["spec"].clone()
}

#[test]
fn sl2_catalog_run() {
    let r = json(&konic(&["catalog", "run", "sl2_rank_one"]));
    assert_eq!(r["verdict"], "KStable");
    assert_eq!(r["barycenter_pairing"], "1/3");
}

#[test]
fn g2_catalog_run_reports_obstruction() {
    let r = json(&konic(&["catalog", "run", "g2_cone", "--m", "1"]));
    assert_eq!(r["solution"]["outcome"]["status"], "NoStableReeb");
    let coeffs: Vec<&str> = r["obstruction_polynomial"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(coeffs, ["2376", "9225", "13407", "9357", "3179", "424"]);
}

#[test]
fn catalog_list_names_every_id() {
    let r = json(&konic(&["catalog", "list"]));
    let ids: Vec<&str> = r["entries"].as_array().unwrap().iter().map(|e| e["id"].as_str().unwrap()).collect();
    for id in ["sl2_rank_one", "g2_cone", "c3_module", "a1_times_c", "horosym_rank_one", "boundary_divisor_cone"] {
        assert!(ids.contains(&id), "{id}");
    }
}

#[test]
fn strict_exit_code_on_unstable() {
    let out = konic(&["catalog", "run", "boundary_divisor_cone", "--type", "G2", "--root", "long", "--strict"]);
    assert_eq!(out.status.code(), Some(2));
    let out = konic(&["catalog", "run", "boundary_divisor_cone", "--type", "G2", "--root", "short", "--strict"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn verdict_round_trip() {
    let spec = c3_spec();
    let path = write_spec("c3.json", &spec);
    let r = json(&konic(&["verdict", &path]));
    assert_eq!(r["verdict"], "KStable");
    assert_eq!(r["paths_agree"], true);
    assert_eq!(r["input"], spec);
    // feed the normalized Reeb vector back
    let mut again = spec.clone();
    again["reeb"] = r["reeb"].clone();
    let path2 = write_spec("c3-again.json", &again);
    let r2 = json(&konic(&["verdict", &path2]));
    assert_eq!(r2["verdict"], r["verdict"]);
    assert_eq!(r2["barycenter"], r["barycenter"]);
}

#[test]
fn reeb_outside_cone_is_diagnosed() {
    let mut spec = c3_spec();
    spec["reeb"] = serde_json::json!(["0", "-1"]);
    let path = write_spec("bad-reeb.json", &spec);
    let out = konic(&["verdict", &path]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid polarization"));
}

#[test]
fn parse_errors_name_the_field() {
    let mut spec = c3_spec();
    spec["colors"][0]["a_d"] = serde_json::json!("1/0");
    let path = write_spec("bad-field.json", &spec);
    let out = konic(&["verdict", &path]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("colors[0].a_d"));
}

#[test]
fn futaki_and_degenerate() {
    let mut spec = c3_spec();
    spec["angles"] = serde_json::json!({ "0": "1/4" });
    let path = write_spec("c3-semistable.json", &spec);
    let f = json(&konic(&["futaki", &path, "--nu", "-1,0"]));
    assert_eq!(f["futaki"], "0");
    let d = json(&konic(&["degenerate", &path, "--kstable"]));
    assert_eq!(d["final"]["verdict"], "KStable");
    assert_eq!(d["steps"][0]["is_trivial"], false);
    let h = json(&konic(&["degenerate", &path, "--horospherical"]));
    assert_eq!(h["horospherical"], true);
    let n = json(&konic(&["degenerate", &path, "--nu", "0,1"]));
    assert_eq!(n["is_trivial"], true);
}

#[test]
fn crepant_check_reports_no_resolution() {
    for m in ["1", "2"] {
        let r = json(&konic(&["crepant-check", "--m", m]));
        assert_eq!(r["result"], "NoCrepantResolution");
        assert_eq!(r["witness"]["bound"], 200);
    }
}

#[test]
fn out_flag_writes_file() {
    let p = tmp("report.json");
    let out = konic(&["catalog", "run", "sl2_rank_one", "--out", p.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
    assert_eq!(v["verdict"], "KStable");
}

#[test]
fn output_is_deterministic() {
    let a = konic(&["catalog", "run", "a1_times_c"]);
    let b = konic(&["catalog", "run", "a1_times_c"]);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["solution"]["outcome"]["xi"], serde_json::json!(["3", "1"]));
}

#[test]
fn spec_only_output_is_a_valid_input() {
    let spec = json(&konic(&["catalog", "show", "c3_module", "--spec-only"]));
    assert_eq!(spec, c3_spec());
    let path = write_spec("c3_only.json", &spec);
    let r = json(&konic(&["degenerate", &path, "--horospherical"]));
    assert_eq!(r["horospherical"], true);
}
