use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dhde(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dhde"))
        .args(args)
        .current_dir(dir)
        .env_remove("DHDE_CONFIG")
        .output()
        .expect("binary runs")
}

fn error_record(o: &Output) -> Value {
    let stderr = String::from_utf8_lossy(&o.stderr);
    let line = stderr.lines().rev().find(|l| l.starts_with('{')).expect("JSON record on stderr");
    serde_json::from_str(line).unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn gap_values_flagged_fixture() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("flagged.csv"), "node,date,residual\nA,2025-01-10,-100\nA,2025-01-11,-50\nA,2025-01-12,40\n").unwrap();
    let o = dhde(tmp.path(), &["--spend", "13811", "gap", "--flagged", "flagged.csv", "--output-dir", "out"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let g = read_json(&tmp.path().join("out/gap.json"));
    let total = &g["report"]["total"];
    assert_eq!(total["lost_visitors"], 150.0);
    assert_eq!(total["yen_value"], 2_071_650);
    assert_eq!(total["usd_value"], 13_195.22);
    assert_eq!(g["fx_yen_per_usd"], 157.0);
    assert_eq!(g["spend"]["source"], "configured");
}

#[test]
fn gap_reconciles_against_reference() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("f.csv"), "node,date,residual\nall,2025-01-01,-865917\n").unwrap();
    let o = dhde(tmp.path(), &["gap", "--flagged", "f.csv", "--reference-yen", "11959183083", "--output-dir", "."]);
    assert!(o.status.success());
    let g = read_json(&tmp.path().join("gap.json"));
    assert_eq!(g["spend"]["source"], "fallback");
    assert_eq!(g["report"]["total"]["yen_value"], 11_959_179_687u64);
    assert_eq!(g["report"]["reconciliation"]["divergence_yen"], 3396);
}

#[test]
fn unknown_flag_exits_with_usage_code() {
    let tmp = tempfile::tempdir().unwrap();
    let o = dhde(tmp.path(), &["fit", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_record(&o)["error"]["kind"], "usage");
}

#[test]
fn help_lists_every_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let top = String::from_utf8(dhde(tmp.path(), &["--help"]).stdout).unwrap();
    for flag in ["--config", "--output-dir", "--seed", "--fx", "--spend", "--node", "--help", "--version"] {
        assert!(top.contains(flag), "{flag} missing from help");
    }
    for cmd in ["synth", "ingest", "features", "fit", "diagnose", "forest", "mine", "gap", "ccf", "rank", "nudge"] {
        assert!(top.contains(cmd), "{cmd} missing from help");
    }
    let sub = |c: &str| String::from_utf8(dhde(tmp.path(), &[c, "--help"]).stdout).unwrap();
    for (c, flags) in [
        ("synth", &["--dir", "--days", "--start"][..]),
        ("gap", &["--flagged", "--observed-days", "--reference-yen"]),
        ("ccf", &["--max-lag"]),
        ("rank", &["--recovered"]),
        ("nudge", &["--forecast", "--issued"]),
    ] {
        let h = sub(c);
        for f in flags {
            assert!(h.contains(f), "{c} help lacks {f}");
        }
    }
}

#[test]
fn config_problems_are_all_reported() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("bad.toml"),
        "[inputs.counts]\nA = \"missing.csv\"\n[inputs]\nsurvey = \"nope.csv\"\n[economics]\nfx_yen_per_usd = 0\n",
    )
    .unwrap();
    let o = dhde(tmp.path(), &["--config", "bad.toml", "fit"]);
    assert_eq!(o.status.code(), Some(1));
    let rec = error_record(&o);
    assert_eq!(rec["error"]["kind"], "config");
    assert_eq!(rec["error"]["problems"].as_array().unwrap().len(), 3, "{rec}");
}

#[test]
fn env_var_names_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("c.toml"), "[economics]\nfx_yen_per_usd = -3\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_dhde"))
        .args(["fit"])
        .current_dir(tmp.path())
        .env("DHDE_CONFIG", "c.toml")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(error_record(&o)["error"]["problems"][0].as_str().unwrap().contains("fx_yen_per_usd"));
}

#[test]
fn flags_override_the_file() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("c.toml"), "[economics]\nfx_yen_per_usd = 100\n").unwrap();
    fs::write(tmp.path().join("f.csv"), "node,date,residual\nA,2025-01-01,-1\n").unwrap();
    let o = dhde(tmp.path(), &["--config", "c.toml", "--fx", "157", "--spend", "157", "gap", "--flagged", "f.csv"]);
    assert!(o.status.success());
    let g = read_json(&tmp.path().join("out/gap.json"));
    assert_eq!(g["report"]["total"]["usd_value"], 1.0);
}

#[test]
fn missing_survey_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = dhde(tmp.path(), &["mine"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_record(&o)["error"]["kind"], "data");
}

fn synth_dir(tmp: &Path, seed: &str) -> std::path::PathBuf {
    let o = dhde(tmp, &["--seed", seed, "synth", "--dir", "data", "--days", "120"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    tmp.join("data")
}

#[test]
fn constant_counts_are_a_numerical_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let data = synth_dir(tmp.path(), "3");
    let intent = fs::read_to_string(data.join("intent_A.csv")).unwrap();
    let mut cam = String::from("aggregate from,aggregate to,total count\n");
    for line in intent.lines().skip(1) {
        let date = line.split(',').next().unwrap();
        cam.push_str(&format!("{date} 08:00:00+09:00,{date} 08:05:00+09:00,100\n"));
    }
    fs::write(data.join("camera_A.csv"), cam).unwrap();
    let o = dhde(&data, &["--node", "A", "fit"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(error_record(&o)["error"]["kind"], "numerical");
}

#[test]
fn unknown_node_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let data = synth_dir(tmp.path(), "4");
    let o = dhde(&data, &["--node", "Z", "ingest"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn every_command_runs_on_synthetic_data() {
    let tmp = tempfile::tempdir().unwrap();
    let data = synth_dir(tmp.path(), "5");
    for cmd in ["ingest", "features", "fit", "diagnose", "mine", "gap", "ccf", "rank", "nudge"] {
        let o = dhde(&data, &[cmd]);
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = dhde(&data, &["--node", "B", "forest"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = data.join("out");
    for f in [
        "panel_A.csv",
        "features_D.csv",
        "fit_C.json",
        "holdout_A.svg",
        "diagnostics_B.json",
        "prevalence.json",
        "gap.json",
        "ccf_A.svg",
        "ranking.csv",
        "ranking.svg",
        "nudges.jsonl",
        "forest_B.json",
    ] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let diag = read_json(&out.join("diagnostics_A.json"));
    for key in ["baseline", "first_difference", "lagged_dependent"] {
        assert!(diag["specifications"][key]["durbin_watson"].is_number());
    }
    assert!(diag["adf"]["count"]["p_value"].is_number());
    assert!(diag["vif"].as_array().unwrap().len() == 16);
    let gap = read_json(&out.join("gap.json"));
    assert_eq!(gap["spend"]["source"], "survey_bands");
    assert!(gap["report"]["total"]["yen_value"].is_u64());
    let prev = read_json(&out.join("prevalence.json"));
    assert_eq!(prev["prevalence"]["low"]["rate"], 0.25);
    assert!(fs::read_to_string(out.join("ranking.svg")).unwrap().contains(r#"version="1.1""#));
}

#[test]
fn fit_output_is_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let run = |t: &Path| {
        let data = synth_dir(t, "11");
        assert!(dhde(&data, &["ingest"]).status.success());
        assert!(dhde(&data, &["fit"]).status.success());
        fs::read(data.join("out/fit_A.json")).unwrap()
    };
    assert_eq!(run(a.path()), run(b.path()));
}
