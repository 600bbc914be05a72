use std::process::{Command, Output};

use serde_json::Value;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corona-tst")).args(args).env_remove("CORONA_TST_SEED").output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn trivial_suite_exits_cleanly() {
    let out = cli(&["verify", "--suite", "trivial"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 21);
    assert!(text.contains("21/21 passed"));
}

#[test]
fn validation_errors_exit_with_one() {
    assert_eq!(cli(&["beta", "--domain", "cantor", "j=x"]).status.code(), Some(1));
    assert_eq!(cli(&["beta", "--domain", "torus"]).status.code(), Some(1));
    assert_eq!(cli(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(cli(&["verify", "--suite", "most"]).status.code(), Some(1));
    assert_eq!(cli(&["--help"]).status.code(), Some(0));
}

#[test]
fn beta_csv_follows_the_cantor_generations() {
    let out = cli(&["beta", "--domain", "cantor", "j=3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    let mut per_level = [0usize; 7];
    for r in &rows {
        per_level[r[1].parse::<usize>().unwrap()] += 1;
    }
    // level 2m has one cube per generation-m square
    for m in 0..=3 {
        assert_eq!(per_level[2 * m], 4usize.pow(m as u32), "{per_level:?}");
    }
    let root_side: f64 = rows[0][2].parse().unwrap();
    let total: f64 = root_side + rows.iter().map(|r| r[5].parse::<f64>().unwrap()).sum::<f64>();
    let summary: Value = serde_json::from_slice(&out.stderr).unwrap();
    let reported = summary["summary"]["total"].as_f64().unwrap();
    assert!((reported - total).abs() < 1e-9, "{reported} vs {total}");
    assert_eq!(summary["config"]["seed"], 1729);
}

#[test]
fn seed_environment_variable_overrides_flag() {
    let base = ["wos", "--domain", "disk", "--pole", "0,0", "--target", "1,0,0.5", "--walkers", "500"];
    let flag = stdout_json(&cli(&[&base[..], &["--seed", "9"]].concat()));
    let env = Command::new(env!("CARGO_BIN_EXE_corona-tst")).args(base).args(["--seed", "1"]).env("CORONA_TST_SEED", "9").output().unwrap();
    let env = stdout_json(&env);
    assert_eq!(env["config"]["seed_from_env"], true);
    assert_eq!(flag["estimate"], env["estimate"]);
    let other = stdout_json(&cli(&[&base[..], &["--seed", "10"]].concat()));
    assert_ne!(flag["estimate"], other["estimate"]);
}

#[test]
fn generated_spec_file_drives_other_commands() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("flake.json");
    let spec_s = spec.to_str().unwrap();
    assert_eq!(cli(&["gen-domain", "--kind", "snowflake", "--params", "iter=1", "--out", spec_s]).status.code(), Some(0));
    let out = cli(&["cubes", "--domain", spec_s, "--k-max", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["domain"]["kind"], "snowflake");
    assert_eq!(doc["lattice_config"]["k_max"], 3);
}

#[test]
fn loginteg_expands_ranges() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("li.json");
    let out = cli(&["loginteg", "--domain", "cantor", "j=1..2", "--walkers", "2000", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1]["domain"]["j"], 2);
    assert!(rows.iter().all(|r| r["result"]["value"].as_f64().unwrap().is_finite()));
}

#[test]
fn corona_command_reports_trees_and_config() {
    let out = cli(&["corona", "--domain", "half-plane", "window=4", "--h", "0.01", "--k-max", "4", "--walkers", "500"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = stdout_json(&out);
    assert!(doc["corona"]["tops"].as_array().is_some_and(|t| !t.is_empty()));
    assert_eq!(doc["wos"]["walkers"], 500);
}

#[test]
fn selected_criteria_write_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&["verify", "--quick", "--only", "C2,C3", "--out", dir.path().to_str().unwrap()]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().any(|l| l.contains("C2")) && text.lines().any(|l| l.contains("C3")), "{text}");
    for id in ["C2", "C3"] {
        let doc: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join(format!("{id}.json"))).unwrap()).unwrap();
        assert_eq!(doc["config"]["quick"], true);
        assert_eq!(doc["config"]["seed"], 1729);
    }
}
